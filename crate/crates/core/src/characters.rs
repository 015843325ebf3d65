//! Quasi-characters of `Q_p^x`.
//!
//! A quasi-character is split as `chi(p^m u) = t^m * omega(u)` where `omega` is a
//! character of `Z_p^x` factoring through `(Z/p^a)^x` with exact conductor `a`
//! ([`UnitChar`]) and `t = chi(p)`. The complex variable `s` never appears here:
//! `|x|^s` is carried by the rational functions in `X = q^{-s}`.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::numerics::{powi, root_of_unity, Scalar};
use crate::padic::{check_prime, ipow, unit_group, unit_residues, PAdicElt};

/// A character of `Z_p^x` of exact conductor `cond`, written as an exponent
/// vector against the generators of `unit_group(p, cond)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct UnitChar {
    p: u64,
    cond: u32,
    exps: Vec<u64>,
}

/// `sum_i e_i d_i (E / ord_i) mod E` for the table at `level`.
fn angle_at_level(p: u64, level: u32, exps: &[u64], u: u64) -> (i128, u128) {
    if level == 0 {
        return (0, 1);
    }
    let table = unit_group(p, level);
    let e_big = table.exponent();
    let d = table.dlog(u).expect("argument is a unit");
    let mut k: u128 = 0;
    for ((&(_, ord), &ei), &di) in table.generators.iter().zip(exps).zip(d) {
        k += (ei as u128) * (di as u128) * ((e_big / ord) as u128);
    }
    ((k % e_big as u128) as i128, e_big as u128)
}

fn exact_conductor(p: u64, level: u32, exps: &[u64]) -> u32 {
    let modulus = if level == 0 { 1 } else { ipow(p, level) as u64 };
    for a in 0..level {
        let sub = ipow(p, a) as u64;
        let trivial_on_kernel = unit_residues(p, level)
            .into_iter()
            .filter(|u| a == 0 || u % sub == 1 % sub)
            .all(|u| angle_at_level(p, level, exps, u % modulus).0 == 0);
        if trivial_on_kernel {
            return a;
        }
    }
    level
}

/// Exponent vector at `target` of the character given by `exps` at `level`;
/// the character must factor through `(Z/p^target)^x`.
fn exps_at(p: u64, level: u32, exps: &[u64], target: u32) -> Vec<u64> {
    if target == 0 {
        return Vec::new();
    }
    let t = unit_group(p, target);
    let modulus_level = if level == 0 { 1 } else { ipow(p, level) as u64 };
    t.generators
        .iter()
        .map(|&(g, ord)| {
            let (k, e_big) = angle_at_level(p, level, exps, g % modulus_level);
            let scaled = k as u128 * ord as u128;
            debug_assert_eq!(scaled % e_big, 0, "character does not factor through the target level");
            ((scaled / e_big) % ord as u128) as u64
        })
        .collect()
}

impl UnitChar {
    pub fn trivial(p: u64) -> Self {
        UnitChar { p, cond: 0, exps: Vec::new() }
    }

    /// Validates `exps` and requires `cond` to be the exact conductor.
    pub fn new(p: u64, cond: u32, exps: Vec<u64>) -> Result<Self> {
        check_prime(p)?;
        let table = unit_group(p, cond);
        if exps.len() != table.generators.len() {
            return Err(Error::InvalidCharacter(format!(
                "expected {} exponents at conductor {cond}, got {}",
                table.generators.len(),
                exps.len()
            )));
        }
        if let Some((&e, &(_, o))) = exps.iter().zip(&table.generators).find(|(e, g)| **e >= g.1) {
            return Err(Error::InvalidCharacter(format!("exponent {e} out of range for order {o}")));
        }
        let exact = exact_conductor(p, cond, &exps);
        if exact != cond {
            return Err(Error::InvalidCharacter(format!(
                "conductor {cond} is not exact (character factors through level {exact})"
            )));
        }
        Ok(UnitChar { p, cond, exps })
    }

    /// Builds from an exponent vector at any `level`, reducing to the exact conductor.
    pub fn from_level(p: u64, level: u32, exps: &[u64]) -> Result<Self> {
        check_prime(p)?;
        let table = unit_group(p, level);
        if exps.len() != table.generators.len() {
            return Err(Error::InvalidCharacter(format!("expected {} exponents", table.generators.len())));
        }
        let exps: Vec<u64> = exps.iter().zip(&table.generators).map(|(&e, &(_, o))| e % o).collect();
        let cond = exact_conductor(p, level, &exps);
        Ok(UnitChar { p, cond, exps: exps_at(p, level, &exps, cond) })
    }

    /// Every character of `(Z/p^level)^x`, sorted by `(cond, exps)`.
    pub fn all_at_level(p: u64, level: u32) -> Vec<Self> {
        let table = unit_group(p, level);
        let orders: Vec<u64> = table.generators.iter().map(|g| g.1).collect();
        let total: u64 = orders.iter().product();
        let mut out: Vec<Self> = (0..total)
            .map(|mut idx| {
                let exps: Vec<u64> = orders
                    .iter()
                    .map(|&o| {
                        let e = idx % o;
                        idx /= o;
                        e
                    })
                    .collect();
                Self::from_level(p, level, &exps).expect("valid exponents")
            })
            .collect();
        out.sort();
        out
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn cond(&self) -> u32 {
        self.cond
    }

    pub fn exps(&self) -> &[u64] {
        &self.exps
    }

    pub fn is_trivial(&self) -> bool {
        self.cond == 0
    }

    /// `omega(u) = exp(2 pi i k / E)` as the exact pair `(k, E)`.
    pub fn angle(&self, residue: u64) -> (i128, u128) {
        let modulus = if self.cond == 0 { 1 } else { ipow(self.p, self.cond) as u64 };
        angle_at_level(self.p, self.cond, &self.exps, residue % modulus)
    }

    /// Value on a unit residue taken modulo any `p^a` with `a >= cond`.
    pub fn eval_residue(&self, residue: u64) -> Scalar {
        let (k, e) = self.angle(residue);
        root_of_unity(k, e)
    }

    /// Value on the unit part of `x`.
    pub fn eval(&self, x: &PAdicElt) -> Result<Scalar> {
        Ok(self.eval_residue(x.unit_mod(self.cond)?))
    }

    pub fn inverse(&self) -> Self {
        let table = unit_group(self.p, self.cond);
        let exps = self.exps.iter().zip(&table.generators).map(|(&e, &(_, o))| (o - e) % o).collect();
        UnitChar { p: self.p, cond: self.cond, exps }
    }

    /// Exponent vector of this character at a level `>= cond`.
    pub fn exps_at_level(&self, level: u32) -> Vec<u64> {
        assert!(level >= self.cond);
        exps_at(self.p, self.cond, &self.exps, level)
    }

    pub fn product(&self, other: &Self) -> Result<Self> {
        if self.p != other.p {
            return Err(Error::PrimeMismatch(self.p, other.p));
        }
        let level = self.cond.max(other.cond);
        let table = unit_group(self.p, level);
        let a = self.exps_at_level(level);
        let b = other.exps_at_level(level);
        let exps: Vec<u64> =
            a.iter().zip(&b).zip(&table.generators).map(|((x, y), &(_, o))| (x + y) % o).collect();
        Self::from_level(self.p, level, &exps)
    }
}

/// A quasi-character `chi(p^m u) = t^m * omega(u)` of `Q_p^x`.
#[derive(Clone, Debug, PartialEq)]
pub struct MultChar {
    unit: UnitChar,
    t: Scalar,
}

impl MultChar {
    pub fn new(unit: UnitChar, t: Scalar) -> Result<Self> {
        if !(t.re.is_finite() && t.im.is_finite()) || t.norm() == 0.0 {
            return Err(Error::InvalidCharacter("t must be a finite nonzero scalar".into()));
        }
        Ok(MultChar { unit, t })
    }

    pub fn trivial(p: u64) -> Self {
        MultChar { unit: UnitChar::trivial(p), t: Scalar::new(1.0, 0.0) }
    }

    pub fn unramified(p: u64, t: Scalar) -> Result<Self> {
        check_prime(p)?;
        Self::new(UnitChar::trivial(p), t)
    }

    /// The unitary character `omega` with `t = 1`.
    pub fn from_unit(unit: UnitChar) -> Self {
        MultChar { unit, t: Scalar::new(1.0, 0.0) }
    }

    pub fn p(&self) -> u64 {
        self.unit.p
    }

    pub fn cond(&self) -> u32 {
        self.unit.cond
    }

    pub fn t(&self) -> Scalar {
        self.t
    }

    pub fn unit(&self) -> &UnitChar {
        &self.unit
    }

    pub fn is_unramified(&self) -> bool {
        self.unit.cond == 0
    }

    pub fn eval(&self, x: &PAdicElt) -> Result<Scalar> {
        if x.p() != self.p() {
            return Err(Error::PrimeMismatch(x.p(), self.p()));
        }
        Ok(powi(self.t, x.val() as i64) * self.unit.eval(x)?)
    }

    pub fn inverse(&self) -> Self {
        MultChar { unit: self.unit.inverse(), t: self.t.inv() }
    }

    pub fn product(&self, other: &Self) -> Result<Self> {
        Ok(MultChar { unit: self.unit.product(&other.unit)?, t: self.t * other.t })
    }

    /// Same unit part with `t` replaced.
    pub fn with_t(&self, t: Scalar) -> Result<Self> {
        Self::new(self.unit.clone(), t)
    }
}

/// All characters of `(Z/p^c_max)^x` with `t = 1`, each at its exact conductor.
pub fn unitary_components(p: u64, c_max: u32) -> Vec<MultChar> {
    UnitChar::all_at_level(p, c_max).into_iter().map(MultChar::from_unit).collect()
}

#[derive(Serialize, Deserialize)]
struct MultCharJson {
    p: u64,
    cond: u32,
    unit_char: Vec<u64>,
    t: [f64; 2],
}

impl Serialize for MultChar {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MultCharJson { p: self.p(), cond: self.cond(), unit_char: self.unit.exps.clone(), t: [self.t.re, self.t.im] }
            .serialize(s)
    }
}

impl<'de> Deserialize<'de> for MultChar {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = MultCharJson::deserialize(d)?;
        let unit = UnitChar::new(raw.p, raw.cond, raw.unit_char).map_err(serde::de::Error::custom)?;
        MultChar::new(unit, Scalar::new(raw.t[0], raw.t[1])).map_err(serde::de::Error::custom)
    }
}

impl Serialize for UnitChar {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MultCharJson { p: self.p, cond: self.cond, unit_char: self.exps.clone(), t: [1.0, 0.0] }.serialize(s)
    }
}
