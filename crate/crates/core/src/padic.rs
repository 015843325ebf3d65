//! Elements of `Q_p`, multiplicative shells, the level-0 additive character
//! `psi` and the structure of the unit groups `(Z/p^a)^x`.
//!
//! Two representations of field elements are used:
//! * [`QpRational`] is an exact element of `Z[1/p]`, dense in `Q_p`. Step
//!   functions use it for ball centers and additive twists.
//! * [`PAdicElt`] is `p^val * u` with the unit `u` known modulo `p^prec`. It is
//!   what characters and kernels are evaluated on.
//!
//! Measures: `d^+x` gives `Z_p` volume 1 and `d^x x = d^+x / |x|`, so every
//! shell `S_m = {|x| = p^{-m}}` has multiplicative volume `1 - 1/p`.

use std::collections::HashMap;
use std::fs;
use std::path::PathBuf;
use std::sync::{Arc, OnceLock, RwLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{root_of_unity, Scalar};

/// Environment variable naming the on-disk cache directory for unit-group tables.
pub const CACHE_DIR_ENV: &str = "LOCALGAMMA_CACHE_DIR";

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

pub fn check_prime(p: u64) -> Result<()> {
    if is_prime(p) {
        Ok(())
    } else {
        Err(Error::NotPrime(p))
    }
}

/// `p^e` as `u128`, panicking on overflow (desk-scale parameters never overflow).
pub fn ipow(p: u64, e: u32) -> u128 {
    (p as u128).checked_pow(e).expect("p-power overflow")
}

fn ipow_i(p: u64, e: u32) -> i128 {
    (p as i128).checked_pow(e).expect("p-power overflow")
}

/// `|(Z/p^a)^x|`.
pub fn euler_phi(p: u64, a: u32) -> u64 {
    if a == 0 {
        1
    } else {
        (ipow(p, a - 1) as u64) * (p - 1)
    }
}

/// Unit residues modulo `p^a` in increasing order. For `a = 0` the single residue is 0.
pub fn unit_residues(p: u64, a: u32) -> Vec<u64> {
    if a == 0 {
        return vec![0];
    }
    let m = ipow(p, a) as u64;
    (1..m).filter(|u| u % p != 0).collect()
}

pub fn mod_pow(mut b: u64, mut e: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let m128 = m as u128;
    let mut acc: u128 = 1;
    let mut base = (b % m) as u128;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % m128;
        }
        base = base * base % m128;
        e >>= 1;
    }
    b = acc as u64;
    b
}

pub fn mod_inv(a: u64, m: u64) -> Option<u64> {
    if m == 1 {
        return Some(0);
    }
    let (mut old_r, mut r) = (a as i128 % m as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let qt = old_r / r;
        (old_r, r) = (r, old_r - qt * r);
        (old_s, s) = (s, old_s - qt * s);
    }
    if old_r != 1 {
        return None;
    }
    Some(old_s.rem_euclid(m as i128) as u64)
}

/// An exact element `num / p^den_exp` of `Z[1/p]`.
///
/// Normal form: either `num = 0, den_exp = 0`, or `den_exp = 0`, or `p` does not
/// divide `num`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QpRational {
    p: u64,
    num: i128,
    den_exp: u32,
}

impl QpRational {
    pub fn new(p: u64, num: i128, den_exp: u32) -> Self {
        let mut x = QpRational { p, num, den_exp };
        x.normalize();
        x
    }

    pub fn zero(p: u64) -> Self {
        QpRational { p, num: 0, den_exp: 0 }
    }

    pub fn from_int(p: u64, n: i128) -> Self {
        Self::new(p, n, 0)
    }

    /// `u * p^e` for an integer `u`.
    pub fn from_parts(p: u64, u: i128, e: i32) -> Self {
        if e >= 0 {
            Self::new(p, u.checked_mul(ipow_i(p, e as u32)).expect("overflow"), 0)
        } else {
            Self::new(p, u, (-e) as u32)
        }
    }

    fn normalize(&mut self) {
        if self.num == 0 {
            self.den_exp = 0;
            return;
        }
        let p = self.p as i128;
        while self.den_exp > 0 && self.num % p == 0 {
            self.num /= p;
            self.den_exp -= 1;
        }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn num(&self) -> i128 {
        self.num
    }

    pub fn den_exp(&self) -> u32 {
        self.den_exp
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    /// `v_p(x)`, or `None` for zero.
    pub fn valuation(&self) -> Option<i32> {
        if self.num == 0 {
            return None;
        }
        let p = self.p as i128;
        let mut n = self.num;
        let mut v = 0i32;
        while n % p == 0 {
            n /= p;
            v += 1;
        }
        Some(v - self.den_exp as i32)
    }

    fn aligned(&self, other: &Self) -> (i128, i128, u32) {
        assert_eq!(self.p, other.p, "QpRational primes differ");
        let k = self.den_exp.max(other.den_exp);
        let a = self.num.checked_mul(ipow_i(self.p, k - self.den_exp)).expect("overflow");
        let b = other.num.checked_mul(ipow_i(self.p, k - other.den_exp)).expect("overflow");
        (a, b, k)
    }

    pub fn add(&self, other: &Self) -> Self {
        let (a, b, k) = self.aligned(other);
        Self::new(self.p, a.checked_add(b).expect("overflow"), k)
    }

    pub fn sub(&self, other: &Self) -> Self {
        let (a, b, k) = self.aligned(other);
        Self::new(self.p, a.checked_sub(b).expect("overflow"), k)
    }

    pub fn neg(&self) -> Self {
        Self::new(self.p, -self.num, self.den_exp)
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.p, other.p, "QpRational primes differ");
        Self::new(
            self.p,
            self.num.checked_mul(other.num).expect("overflow"),
            self.den_exp + other.den_exp,
        )
    }

    /// Multiplies by `p^e`.
    pub fn mul_p_pow(&self, e: i32) -> Self {
        Self::from_parts(self.p, 1, e).mul(self)
    }

    /// The p-adic fractional part as `(r, k)` with `frac_p(x) = r / p^k`, `0 <= r < p^k`.
    pub fn frac(&self) -> (u128, u32) {
        let m = ipow_i(self.p, self.den_exp);
        (self.num.rem_euclid(m) as u128, self.den_exp)
    }

    /// `psi(x) = exp(2 pi i frac_p(x))`.
    pub fn psi(&self) -> Scalar {
        let (r, k) = self.frac();
        root_of_unity(r as i128, ipow(self.p, k))
    }

    /// True when `self - center` lies in `p^rad Z_p`.
    pub fn in_ball(&self, center: &Self, rad: i32) -> bool {
        match self.sub(center).valuation() {
            None => true,
            Some(v) => v >= rad,
        }
    }

    /// The canonical representative of the class of `self` in `Z[1/p] / p^r Z_p`:
    /// `n / p^K` with `0 <= n < p^{r+K}` and the fraction reduced.
    pub fn reduce_mod(&self, r: i32) -> Self {
        let k = self.den_exp as i32;
        let big_k = k.max(-r).max(0);
        let n = self.num.checked_mul(ipow_i(self.p, (big_k - k) as u32)).expect("overflow");
        let modulus = ipow_i(self.p, (r + big_k) as u32);
        Self::new(self.p, n.rem_euclid(modulus), big_k as u32)
    }

    /// Converts to a finite-precision element (zero is rejected).
    pub fn to_padic(&self, prec: u32) -> Result<PAdicElt> {
        let v = self.valuation().ok_or_else(|| Error::InvalidElement("zero has no unit part".into()))?;
        // x = p^v * u with u an integer prime to p
        let p = self.p as i128;
        let mut n = self.num;
        while n % p == 0 {
            n /= p;
        }
        let m = ipow_i(self.p, prec);
        PAdicElt::new(self.p, v, n.rem_euclid(m) as u64, prec)
    }
}

/// `p^val * u` with `u` a unit known modulo `p^prec`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PAdicElt {
    p: u64,
    val: i32,
    unit: u64,
    prec: u32,
}

impl PAdicElt {
    pub fn new(p: u64, val: i32, unit: u64, prec: u32) -> Result<Self> {
        check_prime(p)?;
        if prec == 0 {
            return Err(Error::InvalidElement("precision must be at least 1".into()));
        }
        let m = ipow(p, prec);
        if m > u64::MAX as u128 {
            return Err(Error::InvalidElement(format!("precision {prec} too large for p = {p}")));
        }
        let unit = unit % m as u64;
        if unit == 0 || unit.is_multiple_of(p) {
            return Err(Error::InvalidElement(format!("{unit} is not a unit mod {p}")));
        }
        Ok(PAdicElt { p, val, unit, prec })
    }

    pub fn one(p: u64, prec: u32) -> Self {
        Self::new(p, 0, 1, prec).expect("valid unit")
    }

    /// `p^m` to precision `prec`.
    pub fn p_power(p: u64, m: i32, prec: u32) -> Self {
        Self::new(p, m, 1, prec).expect("valid unit")
    }

    pub fn from_int(p: u64, n: i128, prec: u32) -> Result<Self> {
        QpRational::from_int(p, n).to_padic(prec)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn val(&self) -> i32 {
        self.val
    }

    pub fn unit(&self) -> u64 {
        self.unit
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    /// `|x|_p = p^{-val}`.
    pub fn abs(&self) -> f64 {
        (self.p as f64).powi(-self.val)
    }

    /// The unit part modulo `p^a`.
    pub fn unit_mod(&self, a: u32) -> Result<u64> {
        if a > self.prec {
            return Err(Error::InsufficientPrecision { need: a as i64, have: self.prec as i64 });
        }
        Ok(self.unit % ipow(self.p, a) as u64)
    }

    pub fn with_prec(&self, prec: u32) -> Result<Self> {
        if prec > self.prec {
            return Err(Error::InsufficientPrecision { need: prec as i64, have: self.prec as i64 });
        }
        Self::new(self.p, self.val, self.unit, prec)
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.p, other.p, "PAdicElt primes differ");
        let prec = self.prec.min(other.prec);
        let m = ipow(self.p, prec);
        let u = (self.unit as u128 * other.unit as u128) % m;
        PAdicElt { p: self.p, val: self.val + other.val, unit: u as u64, prec }
    }

    pub fn inv(&self) -> Self {
        let m = ipow(self.p, self.prec) as u64;
        let u = mod_inv(self.unit, m).expect("unit is invertible");
        PAdicElt { p: self.p, val: -self.val, unit: u, prec: self.prec }
    }

    /// The exact representative `p^val * unit` in `Z[1/p]`.
    pub fn to_rational(&self) -> QpRational {
        QpRational::from_parts(self.p, self.unit as i128, self.val)
    }
}

/// `psi(x) = exp(2 pi i frac_p(x))`, trivial on `Z_p` and nontrivial on `p^{-1} Z_p`.
pub fn psi_value(x: &PAdicElt) -> Result<Scalar> {
    if x.val >= 0 {
        return Ok(Scalar::new(1.0, 0.0));
    }
    let k = (-x.val) as u32;
    if x.prec < k {
        return Err(Error::InsufficientPrecision { need: k as i64, have: x.prec as i64 });
    }
    let m = ipow(x.p, k);
    Ok(root_of_unity((x.unit as u128 % m) as i128, m))
}

/// The shell `S_m = {x : |x| = p^{-m}}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Shell {
    pub p: u64,
    pub m: i32,
}

impl Shell {
    pub fn new(p: u64, m: i32) -> Self {
        Shell { p, m }
    }

    pub fn contains(&self, x: &PAdicElt) -> bool {
        x.p == self.p && x.val == self.m
    }

    pub fn volume(&self) -> f64 {
        shell_volume(self.m, self.p)
    }

    /// Representatives `p^m u` of the cosets of `1 + p^level Z_p` in the shell
    /// (the whole shell when `level = 0`), each carried at precision `prec >= level`.
    pub fn coset_reps(&self, level: u32, prec: u32) -> Vec<PAdicElt> {
        let prec = prec.max(level).max(1);
        unit_residues(self.p, level)
            .into_iter()
            .map(|u| PAdicElt::new(self.p, self.m, if level == 0 { 1 } else { u }, prec).expect("unit"))
            .collect()
    }
}

/// `vol(S_m, d^x x) = 1 - 1/p`, independent of `m`.
pub fn shell_volume(_m: i32, p: u64) -> f64 {
    1.0 - 1.0 / p as f64
}

/// Multiplicative volume of a coset of `1 + p^level Z_p` (`Z_p^x` at level 0).
pub fn coset_volume(p: u64, level: u32) -> f64 {
    if level == 0 {
        shell_volume(0, p)
    } else {
        (p as f64).powi(-(level as i32))
    }
}

/// Generators, orders and discrete logarithms of `(Z/p^a)^x`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnitGroupTable {
    pub p: u64,
    pub a: u32,
    /// `(residue, order)` pairs.
    pub generators: Vec<(u64, u64)>,
    dlog: HashMap<u64, Vec<u64>>,
}

impl UnitGroupTable {
    pub fn build(p: u64, a: u32) -> Result<Self> {
        check_prime(p)?;
        let generators = group_generators(p, a);
        let modulus = if a == 0 { 1 } else { ipow(p, a) as u64 };
        let mut dlog = HashMap::with_capacity(euler_phi(p, a) as usize);
        let orders: Vec<u64> = generators.iter().map(|g| g.1).collect();
        let total: u64 = orders.iter().product();
        for idx in 0..total {
            let mut rem = idx;
            let mut exps = Vec::with_capacity(orders.len());
            let mut r: u64 = 1 % modulus;
            for (&(g, _), &o) in generators.iter().zip(&orders) {
                let e = rem % o;
                rem /= o;
                exps.push(e);
                r = ((r as u128 * mod_pow(g, e, modulus) as u128) % modulus as u128) as u64;
            }
            dlog.insert(r, exps);
        }
        debug_assert_eq!(dlog.len() as u64, euler_phi(p, a));
        Ok(UnitGroupTable { p, a, generators, dlog })
    }

    pub fn order(&self) -> u64 {
        self.generators.iter().map(|g| g.1).product()
    }

    /// Least common multiple of the generator orders.
    pub fn exponent(&self) -> u64 {
        self.generators.iter().fold(1, |acc, &(_, o)| lcm(acc, o))
    }

    pub fn modulus(&self) -> u64 {
        if self.a == 0 {
            1
        } else {
            ipow(self.p, self.a) as u64
        }
    }

    /// Exponent vector of a unit residue (reduced mod `p^a` first).
    pub fn dlog(&self, residue: u64) -> Option<&[u64]> {
        self.dlog.get(&(residue % self.modulus())).map(|v| v.as_slice())
    }

    pub fn exp(&self, exps: &[u64]) -> u64 {
        let m = self.modulus();
        let mut r = 1 % m;
        for (&(g, o), &e) in self.generators.iter().zip(exps) {
            r = ((r as u128 * mod_pow(g, e % o, m) as u128) % m as u128) as u64;
        }
        r
    }

    fn to_disk(&self) -> TableJson {
        let mut dlog: Vec<(u64, Vec<u64>)> = self.dlog.iter().map(|(k, v)| (*k, v.clone())).collect();
        dlog.sort();
        TableJson { p: self.p, a: self.a, generators: self.generators.clone(), dlog }
    }
}

#[derive(Serialize, Deserialize)]
struct TableJson {
    p: u64,
    a: u32,
    generators: Vec<(u64, u64)>,
    dlog: Vec<(u64, Vec<u64>)>,
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

fn group_generators(p: u64, a: u32) -> Vec<(u64, u64)> {
    if a == 0 {
        return Vec::new();
    }
    let m = ipow(p, a) as u64;
    if p == 2 {
        return match a {
            1 => Vec::new(),
            2 => vec![(3, 2)],
            _ => vec![(m - 1, 2), (5, 1 << (a - 2))],
        };
    }
    let phi = euler_phi(p, a);
    let factors = prime_factors(phi);
    let g = (2..m)
        .filter(|g| g % p != 0)
        .find(|&g| factors.iter().all(|&l| mod_pow(g, phi / l, m) != 1))
        .expect("(Z/p^a)^x is cyclic for odd p");
    vec![(g, phi)]
}

type TableCache = RwLock<HashMap<(u64, u32), Arc<UnitGroupTable>>>;

fn cache() -> &'static TableCache {
    static CACHE: OnceLock<TableCache> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

fn disk_path(p: u64, a: u32) -> Option<PathBuf> {
    let dir = std::env::var_os(CACHE_DIR_ENV)?;
    Some(PathBuf::from(dir).join(format!("unit_group_p{p}_a{a}.json")))
}

fn load_from_disk(p: u64, a: u32) -> Option<UnitGroupTable> {
    let path = disk_path(p, a)?;
    let text = fs::read_to_string(path).ok()?;
    let raw: TableJson = serde_json::from_str(&text).ok()?;
    if raw.p != p || raw.a != a {
        return None;
    }
    let table = UnitGroupTable {
        p,
        a,
        generators: raw.generators,
        dlog: raw.dlog.into_iter().collect(),
    };
    // reject stale or corrupted files
    (table == UnitGroupTable::build(p, a).ok()?).then_some(table)
}

fn store_to_disk(table: &UnitGroupTable) {
    if let Some(path) = disk_path(table.p, table.a) {
        if let Some(dir) = path.parent() {
            let _ = fs::create_dir_all(dir);
        }
        if let Ok(text) = serde_json::to_string(&table.to_disk()) {
            let _ = fs::write(path, text);
        }
    }
}

/// The process-wide cached table for `(Z/p^a)^x`.
pub fn unit_group(p: u64, a: u32) -> Arc<UnitGroupTable> {
    if let Some(t) = cache().read().unwrap().get(&(p, a)) {
        return Arc::clone(t);
    }
    let table = match load_from_disk(p, a) {
        Some(t) => t,
        None => {
            let t = UnitGroupTable::build(p, a).expect("prime p");
            store_to_disk(&t);
            t
        }
    };
    let mut w = cache().write().unwrap();
    Arc::clone(w.entry((p, a)).or_insert_with(|| Arc::new(table)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_order(g: u64, m: u64) -> u64 {
        let mut x = g % m;
        let mut k = 1;
        while x != 1 {
            x = x * g % m;
            k += 1;
        }
        k
    }

    #[test]
    fn psi_trivial_on_integers() {
        for n in [1i128, 7, -3, 125] {
            let x = PAdicElt::from_int(5, n, 4).unwrap();
            assert_eq!(psi_value(&x).unwrap(), Scalar::new(1.0, 0.0));
        }
    }

    #[test]
    fn psi_of_one_over_p() {
        let x = PAdicElt::new(7, -1, 1, 3).unwrap();
        let expect = Scalar::from_polar(1.0, 2.0 * std::f64::consts::PI / 7.0);
        assert!((psi_value(&x).unwrap() - expect).norm() < 1e-15);
    }

    #[test]
    fn psi_of_four_ninths() {
        let x = QpRational::new(3, 4, 2).to_padic(3).unwrap();
        let expect = Scalar::from_polar(1.0, 2.0 * std::f64::consts::PI * 4.0 / 9.0);
        assert!((psi_value(&x).unwrap() - expect).norm() < 1e-15);
        assert!((QpRational::new(3, 4, 2).psi() - expect).norm() < 1e-15);
    }

    #[test]
    fn psi_needs_precision() {
        let x = PAdicElt::new(3, -3, 2, 2).unwrap();
        assert_eq!(psi_value(&x), Err(Error::InsufficientPrecision { need: 3, have: 2 }));
    }

    #[test]
    fn unit_group_examples() {
        let t = unit_group(5, 1);
        assert_eq!(t.generators, vec![(2, 4)]);
        let t = unit_group(2, 3);
        assert_eq!(t.generators, vec![(7, 2), (5, 2)]);
        let t = unit_group(3, 2);
        assert_eq!(t.generators, vec![(2, 6)]);
        assert!(unit_group(2, 1).generators.is_empty());
    }

    #[test]
    fn primitive_roots_match_brute_force() {
        for (p, a) in [(3u64, 1u32), (3, 2), (3, 3), (5, 1), (5, 2), (7, 1), (7, 2), (11, 1), (13, 1)] {
            let m = ipow(p, a) as u64;
            let smallest = (2..m).find(|&g| g % p != 0 && brute_order(g, m) == euler_phi(p, a)).unwrap();
            assert_eq!(unit_group(p, a).generators, vec![(smallest, euler_phi(p, a))]);
        }
    }

    #[test]
    fn two_adic_structure_matches_brute_force() {
        for a in 3..=6u32 {
            let m = 1u64 << a;
            let t = unit_group(2, a);
            assert_eq!(brute_order(t.generators[0].0, m), t.generators[0].1);
            assert_eq!(brute_order(t.generators[1].0, m), t.generators[1].1);
            assert_eq!(t.order(), euler_phi(2, a));
        }
    }

    #[test]
    fn dlog_exp_roundtrip() {
        for (p, a) in [(2u64, 1u32), (2, 2), (2, 4), (3, 3), (5, 2), (7, 2), (13, 1)] {
            let t = unit_group(p, a);
            assert_eq!(t.order(), euler_phi(p, a));
            for u in unit_residues(p, a) {
                let e = t.dlog(u).unwrap().to_vec();
                assert_eq!(t.exp(&e), u % t.modulus());
            }
        }
    }

    #[test]
    fn shell_volumes() {
        assert!((shell_volume(0, 5) - 0.8).abs() < 1e-15);
        assert!((shell_volume(7, 3) - 2.0 / 3.0).abs() < 1e-15);
        assert!((shell_volume(-2, 2) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn shell_volume_is_sum_of_coset_volumes() {
        for p in [2u64, 3, 5] {
            for level in 0..3 {
                let n = Shell::new(p, 0).coset_reps(level, 3).len() as f64;
                assert!((n * coset_volume(p, level) - shell_volume(0, p)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn psi_sum_over_minus_one_shell() {
        // sum over the p-1 unit residues u of psi(u/p) is -1; with d^x volume 1/p each
        // coset of 1 + pZ_p in S_{-1} contributes p^{-1}, so the integral is -1/p
        for p in [2u64, 3, 5, 7] {
            let s: Scalar = Shell::new(p, -1)
                .coset_reps(1, 1)
                .iter()
                .map(|x| psi_value(x).unwrap())
                .sum();
            assert!((s - Scalar::new(-1.0, 0.0)).norm() < 1e-14);
            let integral = s * coset_volume(p, 1);
            assert!((integral.re + 1.0 / p as f64).abs() < 1e-14);
        }
    }

    #[test]
    fn reduce_mod_is_canonical() {
        let p = 3;
        let x = QpRational::new(p, 31, 2); // 31/9
        for r in -2..3 {
            let y = x.reduce_mod(r);
            assert!(y.in_ball(&x, r));
            let shifted = x.add(&QpRational::from_parts(p, 5, r));
            assert_eq!(shifted.reduce_mod(r), y);
        }
        assert_eq!(QpRational::from_int(p, 9).reduce_mod(2), QpRational::zero(p));
    }

    #[test]
    fn padic_mul_inv() {
        let x = PAdicElt::new(7, -2, 10, 4).unwrap();
        let y = x.inv();
        let one = x.mul(&y);
        assert_eq!(one.val(), 0);
        assert_eq!(one.unit(), 1);
    }

    #[test]
    fn disk_cache_roundtrip() {
        let dir = std::env::temp_dir().join(format!("lg-cache-{}", std::process::id()));
        let _ = fs::remove_dir_all(&dir);
        fs::create_dir_all(&dir).unwrap();
        let t = UnitGroupTable::build(5, 3).unwrap();
        let path = dir.join("unit_group_p5_a3.json");
        fs::write(&path, serde_json::to_string(&t.to_disk()).unwrap()).unwrap();
        let raw: TableJson = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
        assert_eq!(raw.dlog.len() as u64, euler_phi(5, 3));
        let back = UnitGroupTable { p: 5, a: 3, generators: raw.generators, dlog: raw.dlog.into_iter().collect() };
        assert_eq!(back, t);
        let _ = fs::remove_dir_all(&dir);
    }

    proptest! {
        #[test]
        fn psi_is_additive(p in prop::sample::select(vec![2u64, 3, 5, 7]),
                           a in -2000i128..2000, ka in 0u32..4,
                           b in -2000i128..2000, kb in 0u32..4) {
            let x = QpRational::new(p, a, ka);
            let y = QpRational::new(p, b, kb);
            let lhs = x.add(&y).psi();
            prop_assert!((lhs - x.psi() * y.psi()).norm() < 1e-12);
            if !x.is_zero() && !y.is_zero() {
                let px = x.to_padic(6).unwrap();
                prop_assert!((psi_value(&px).unwrap() - x.psi()).norm() < 1e-12);
            }
        }
    }
}
