//! Complex scalars, Laurent polynomials and rational functions in the formal
//! variable `X = q^{-s}`.
//!
//! Every local factor in this crate (zeta integrals, L-factors, epsilon and
//! gamma factors) is a [`RationalFunc`] in `X`. The substitution `s -> 1 - s`
//! becomes `X -> q^{-1} X^{-1}` ([`RationalFunc::dual_subst`]) and the Mellin
//! variable flip `s -> -s` becomes `X -> X^{-1}` ([`RationalFunc::invert_x`]).
//!
//! Canonical form: the denominator has lowest exponent 0 and constant term 1;
//! any monomial factor is pushed into the numerator and common polynomial
//! factors are cancelled when the cancellation can be verified numerically.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type Scalar = Complex64;

/// Default absolute tolerance on canonical-form coefficients.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Coefficients below this fraction of the largest coefficient are dropped.
const PRUNE_REL: f64 = 1e-15;

/// Relative tolerance used when deciding whether a numeric gcd is genuine.
/// Relative residual allowed when accepting a cancelled form.
const VERIFY_TOL: f64 = 1e-13;

const GCD_TOL: f64 = 1e-9;

pub fn c(re: f64, im: f64) -> Scalar {
    Complex64::new(re, im)
}

pub fn real(re: f64) -> Scalar {
    Complex64::new(re, 0.0)
}

/// `e^{2 pi i num / den}`, computed from the reduced fraction.
pub fn root_of_unity(num: i128, den: u128) -> Scalar {
    debug_assert!(den > 0);
    let d = den as i128;
    let r = num.rem_euclid(d);
    let theta = 2.0 * std::f64::consts::PI * (r as f64) / (den as f64);
    Complex64::from_polar(1.0, theta)
}

/// Integer power of a complex scalar, exact for negative exponents as well.
pub fn powi(z: Scalar, e: i64) -> Scalar {
    if e >= 0 {
        pow_u(z, e as u64)
    } else {
        pow_u(z.inv(), e.unsigned_abs())
    }
}

fn pow_u(mut z: Scalar, mut e: u64) -> Scalar {
    let mut acc = real(1.0);
    while e > 0 {
        if e & 1 == 1 {
            acc *= z;
        }
        z *= z;
        e >>= 1;
    }
    acc
}

fn check_finite(z: Scalar, op: &'static str) -> Result<Scalar> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(Error::NonFinite(op))
    }
}

/// A Laurent polynomial `sum_e c_e X^e` with `X = q^{-s}`.
#[derive(Clone, Debug, PartialEq)]
pub struct LaurentPoly {
    q: u64,
    coeffs: BTreeMap<i32, Scalar>,
}

impl LaurentPoly {
    pub fn new(q: u64, terms: impl IntoIterator<Item = (i32, Scalar)>) -> Self {
        assert!(q > 1, "q must exceed 1");
        let mut coeffs = BTreeMap::new();
        for (e, v) in terms {
            *coeffs.entry(e).or_insert(Scalar::new(0.0, 0.0)) += v;
        }
        let mut p = LaurentPoly { q, coeffs };
        p.prune();
        p
    }

    pub fn zero(q: u64) -> Self {
        Self::new(q, [])
    }

    pub fn constant(q: u64, v: Scalar) -> Self {
        Self::new(q, [(0, v)])
    }

    pub fn monomial(q: u64, v: Scalar, e: i32) -> Self {
        Self::new(q, [(e, v)])
    }

    fn prune(&mut self) {
        let max = self.max_abs();
        self.coeffs.retain(|_, v| {
            let a = v.norm();
            a != 0.0 && a > PRUNE_REL * max
        });
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, e: i32) -> Scalar {
        self.coeffs.get(&e).copied().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (i32, Scalar)> + '_ {
        self.coeffs.iter().map(|(&e, &v)| (e, v))
    }

    pub fn min_exp(&self) -> Option<i32> {
        self.coeffs.keys().next().copied()
    }

    pub fn max_exp(&self) -> Option<i32> {
        self.coeffs.keys().next_back().copied()
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.values().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.values().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    pub fn scale(&self, k: Scalar) -> Self {
        Self::new(self.q, self.terms().map(|(e, v)| (e, v * k)))
    }

    /// Multiplies by `X^k`.
    pub fn shift(&self, k: i32) -> Self {
        Self::new(self.q, self.terms().map(|(e, v)| (e + k, v)))
    }

    /// Substitutes `X -> a X`.
    pub fn scale_x(&self, a: Scalar) -> Self {
        Self::new(self.q, self.terms().map(|(e, v)| (e, v * powi(a, e as i64))))
    }

    /// Substitutes `X -> X^{-1}`.
    pub fn invert_x(&self) -> Self {
        Self::new(self.q, self.terms().map(|(e, v)| (-e, v)))
    }

    /// Substitutes `X -> q^{-1} X^{-1}`, i.e. `s -> 1 - s`.
    pub fn dual_subst(&self) -> Self {
        let qinv = 1.0 / self.q as f64;
        Self::new(
            self.q,
            self.terms().map(|(e, v)| (-e, v * qinv.powi(e))),
        )
    }

    pub fn eval(&self, x: Scalar) -> Scalar {
        self.terms().map(|(e, v)| v * powi(x, e as i64)).sum()
    }

    fn assert_same_q(&self, other: &Self) {
        assert_eq!(self.q, other.q, "Laurent polynomials over different q");
    }

    /// Dense ascending coefficient vector starting at `min_exp`.
    fn dense(&self) -> (i32, Vec<Scalar>) {
        match (self.min_exp(), self.max_exp()) {
            (Some(lo), Some(hi)) => {
                let mut v = vec![Scalar::default(); (hi - lo + 1) as usize];
                for (e, c) in self.terms() {
                    v[(e - lo) as usize] = c;
                }
                (lo, v)
            }
            _ => (0, Vec::new()),
        }
    }

    fn from_dense(q: u64, lo: i32, v: &[Scalar]) -> Self {
        Self::new(q, v.iter().enumerate().map(|(i, &c)| (lo + i as i32, c)))
    }
}

impl Add for &LaurentPoly {
    type Output = LaurentPoly;
    fn add(self, rhs: &LaurentPoly) -> LaurentPoly {
        self.assert_same_q(rhs);
        LaurentPoly::new(self.q, self.terms().chain(rhs.terms()))
    }
}

impl Sub for &LaurentPoly {
    type Output = LaurentPoly;
    fn sub(self, rhs: &LaurentPoly) -> LaurentPoly {
        self.assert_same_q(rhs);
        LaurentPoly::new(self.q, self.terms().chain(rhs.terms().map(|(e, v)| (e, -v))))
    }
}

impl Mul for &LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, rhs: &LaurentPoly) -> LaurentPoly {
        self.assert_same_q(rhs);
        let mut out: BTreeMap<i32, Scalar> = BTreeMap::new();
        for (ea, va) in self.terms() {
            for (eb, vb) in rhs.terms() {
                *out.entry(ea + eb).or_default() += va * vb;
            }
        }
        LaurentPoly::new(self.q, out)
    }
}

impl Neg for &LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        self.scale(real(-1.0))
    }
}

// Dense polynomial helpers for the gcd. Coefficients are ascending.

fn trim(v: &mut Vec<Scalar>, tol: f64) {
    while let Some(last) = v.last() {
        if last.norm() <= tol {
            v.pop();
        } else {
            break;
        }
    }
}

fn divrem(a: &[Scalar], b: &[Scalar], tol: f64) -> (Vec<Scalar>, Vec<Scalar>) {
    let mut r = a.to_vec();
    trim(&mut r, 0.0);
    let db = b.len() - 1;
    let lead = b[db];
    if r.len() < b.len() {
        return (Vec::new(), r);
    }
    let mut quo = vec![Scalar::default(); r.len() - db];
    for k in (0..quo.len()).rev() {
        let coef = r[k + db] / lead;
        quo[k] = coef;
        for (j, &bj) in b.iter().enumerate() {
            r[k + j] -= coef * bj;
        }
        r[k + db] = Scalar::default();
    }
    r.truncate(db);
    trim(&mut r, tol);
    (quo, r)
}

fn max_norm(v: &[Scalar]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Numeric gcd of two polynomials; `None` when the gcd is a constant.
fn poly_gcd(a: &[Scalar], b: &[Scalar]) -> Option<Vec<Scalar>> {
    let scale = max_norm(a).max(max_norm(b));
    let tol = GCD_TOL * scale.max(1.0);
    let (mut x, mut y) = if a.len() >= b.len() {
        (a.to_vec(), b.to_vec())
    } else {
        (b.to_vec(), a.to_vec())
    };
    trim(&mut x, 0.0);
    trim(&mut y, tol);
    while !y.is_empty() {
        // normalise to keep the remainder sequence well scaled
        let ny = max_norm(&y);
        for z in y.iter_mut() {
            *z /= ny;
        }
        let (_, r) = divrem(&x, &y, GCD_TOL);
        x = y;
        y = r;
    }
    if x.len() <= 1 {
        return None;
    }
    let lead = *x.last().unwrap();
    Some(x.iter().map(|z| z / lead).collect())
}

/// A ratio of Laurent polynomials in `X = q^{-s}`, kept in canonical form.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalFunc {
    num: LaurentPoly,
    den: LaurentPoly,
}

impl RationalFunc {
    pub fn new(num: LaurentPoly, den: LaurentPoly) -> Result<Self> {
        if num.q != den.q {
            return Err(Error::QMismatch(num.q, den.q));
        }
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if !num.is_finite() || !den.is_finite() {
            return Err(Error::NonFinite("rational function construction"));
        }
        Ok(Self::canonical(num, den))
    }

    pub fn from_poly(p: LaurentPoly) -> Self {
        let q = p.q;
        RationalFunc { num: p, den: LaurentPoly::constant(q, real(1.0)) }
    }

    pub fn zero(q: u64) -> Self {
        Self::from_poly(LaurentPoly::zero(q))
    }

    pub fn one(q: u64) -> Self {
        Self::constant(q, real(1.0))
    }

    pub fn constant(q: u64, v: Scalar) -> Self {
        Self::from_poly(LaurentPoly::constant(q, v))
    }

    pub fn monomial(q: u64, v: Scalar, e: i32) -> Self {
        Self::from_poly(LaurentPoly::monomial(q, v, e))
    }

    /// `1 / (1 - a X)`.
    pub fn geometric(q: u64, a: Scalar) -> Self {
        Self::new(
            LaurentPoly::constant(q, real(1.0)),
            LaurentPoly::new(q, [(0, real(1.0)), (1, -a)]),
        )
        .expect("nonzero denominator")
    }

    fn canonical(num: LaurentPoly, den: LaurentPoly) -> Self {
        let q = num.q;
        if num.is_zero() {
            return Self::zero(q);
        }
        let shift = -den.min_exp().unwrap();
        let c0 = den.coeff(-shift);
        let inv = c0.inv();
        let num = num.shift(shift).scale(inv);
        let den = den.shift(shift).scale(inv);
        let rf = RationalFunc { num, den };
        rf.cancel_common()
    }

    fn cancel_common(self) -> Self {
        let dmax = self.den.max_exp().unwrap();
        let nspan = self.num.max_exp().unwrap() - self.num.min_exp().unwrap();
        if dmax == 0 || nspan == 0 || dmax > 64 || nspan > 256 {
            return self;
        }
        let (nlo, nd) = self.num.dense();
        let (_, dd) = self.den.dense();
        let g = match poly_gcd(&nd, &dd) {
            Some(g) => g,
            None => return self,
        };
        let (qn, rn) = divrem(&nd, &g, GCD_TOL * max_norm(&nd).max(1.0));
        let (qd, rd) = divrem(&dd, &g, GCD_TOL * max_norm(&dd).max(1.0));
        if !rn.is_empty() || !rd.is_empty() || qd.is_empty() {
            return self;
        }
        let q = self.num.q;
        let num = LaurentPoly::from_dense(q, nlo, &qn);
        let den = LaurentPoly::from_dense(q, 0, &qd);
        if den.is_zero() || num.is_zero() {
            return self;
        }
        // the reduced denominator still has nonzero constant term
        let shift = -den.min_exp().unwrap();
        let inv = den.coeff(-shift).inv();
        let reduced = RationalFunc { num: num.shift(shift).scale(inv), den: den.shift(shift).scale(inv) };
        let scale = self.num.max_abs().max(self.den.max_abs()) * reduced.num.max_abs().max(reduced.den.max_abs());
        if reduced.cross_diff(&self) > VERIFY_TOL * scale.max(1.0) {
            return self;
        }
        reduced
    }

    pub fn q(&self) -> u64 {
        self.num.q
    }

    pub fn num(&self) -> &LaurentPoly {
        &self.num
    }

    pub fn den(&self) -> &LaurentPoly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// True when the denominator is the constant 1.
    pub fn is_laurent_poly(&self) -> bool {
        self.den.max_exp() == Some(0)
    }

    pub fn scale(&self, k: Scalar) -> Self {
        if k == Scalar::default() {
            return Self::zero(self.q());
        }
        RationalFunc { num: self.num.scale(k), den: self.den.clone() }
    }

    pub fn inv(&self) -> Result<Self> {
        Self::new(self.den.clone(), self.num.clone())
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        if other.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Self::new(&self.num * &other.den, &self.den * &other.num)
    }

    /// `X -> a X`.
    pub fn scale_x(&self, a: Scalar) -> Self {
        Self::canonical(self.num.scale_x(a), self.den.scale_x(a))
    }

    /// `X -> X^{-1}` (the Mellin flip `s -> -s`).
    pub fn invert_x(&self) -> Self {
        Self::canonical(self.num.invert_x(), self.den.invert_x())
    }

    /// `X -> q^{-1} X^{-1}` (the substitution `s -> 1 - s`).
    pub fn dual_subst(&self) -> Self {
        Self::canonical(self.num.dual_subst(), self.den.dual_subst())
    }

    /// `X -> q^{-1/2} X`, i.e. evaluation at `s + 1/2`.
    pub fn shift_half(&self) -> Self {
        self.scale_x(real((self.q() as f64).powf(-0.5)))
    }

    pub fn eval(&self, x: Scalar) -> Scalar {
        self.num.eval(x) / self.den.eval(x)
    }

    /// Evaluates at the complex parameter `s` through `X = q^{-s}`.
    pub fn eval_s(&self, s: Scalar) -> Scalar {
        let x = (-s * (self.q() as f64).ln()).exp();
        self.eval(x)
    }

    /// Coefficients of `X^m` for `m` in `[m_lo, m_hi]` of the Laurent expansion
    /// around `X = 0`, via the linear recurrence of the denominator.
    pub fn series_coeffs(&self, m_lo: i32, m_hi: i32) -> Result<Vec<Scalar>> {
        if m_hi < m_lo {
            return Ok(Vec::new());
        }
        let d0 = self.den.coeff(0);
        if self.den.min_exp() != Some(0) || d0.norm() == 0.0 {
            return Err(Error::NotExpandable("denominator vanishes at X = 0".into()));
        }
        let (dlo, dd) = self.den.dense();
        debug_assert_eq!(dlo, 0);
        let nlo = match self.num.min_exp() {
            Some(e) => e,
            None => return Ok(vec![Scalar::default(); (m_hi - m_lo + 1) as usize]),
        };
        // inverse series of the denominator up to the largest needed index
        let need = (m_hi - nlo).max(0) as usize;
        let mut inv = vec![Scalar::default(); need + 1];
        inv[0] = d0.inv();
        for k in 1..=need {
            let mut acc = Scalar::default();
            for j in 1..dd.len().min(k + 1) {
                acc += dd[j] * inv[k - j];
            }
            inv[k] = -acc * inv[0];
        }
        let mut out = Vec::with_capacity((m_hi - m_lo + 1) as usize);
        for m in m_lo..=m_hi {
            let mut acc = Scalar::default();
            for (e, v) in self.num.terms() {
                let k = m - e;
                if k >= 0 && (k as usize) <= need {
                    acc += v * inv[k as usize];
                }
            }
            out.push(check_finite(acc, "series expansion")?);
        }
        Ok(out)
    }

    /// Largest coefficient modulus of `a.num * b.den - b.num * a.den`.
    pub fn cross_diff(&self, other: &Self) -> f64 {
        let lhs = &self.num * &other.den;
        let rhs = &other.num * &self.den;
        let mut all: BTreeMap<i32, Scalar> = BTreeMap::new();
        for (e, v) in lhs.terms() {
            *all.entry(e).or_default() += v;
        }
        for (e, v) in rhs.terms() {
            *all.entry(e).or_default() -= v;
        }
        all.values().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `cross_diff` divided by the largest coefficient of either cross product.
    pub fn rel_cross_diff(&self, other: &Self) -> f64 {
        let scale = (&self.num * &other.den).max_abs().max((&other.num * &self.den).max_abs()).max(1.0);
        self.cross_diff(other) / scale
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.q() == other.q() && self.cross_diff(other) <= tol
    }
}

impl Add for &RationalFunc {
    type Output = RationalFunc;
    fn add(self, rhs: &RationalFunc) -> RationalFunc {
        if self.den == rhs.den {
            return RationalFunc::canonical(&self.num + &rhs.num, self.den.clone());
        }
        let num = &(&self.num * &rhs.den) + &(&rhs.num * &self.den);
        RationalFunc::canonical(num, &self.den * &rhs.den)
    }
}

impl Sub for &RationalFunc {
    type Output = RationalFunc;
    fn sub(self, rhs: &RationalFunc) -> RationalFunc {
        self + &(-rhs)
    }
}

impl Mul for &RationalFunc {
    type Output = RationalFunc;
    fn mul(self, rhs: &RationalFunc) -> RationalFunc {
        RationalFunc::canonical(&self.num * &rhs.num, &self.den * &rhs.den)
    }
}

impl Neg for &RationalFunc {
    type Output = RationalFunc;
    fn neg(self) -> RationalFunc {
        self.scale(real(-1.0))
    }
}

impl std::iter::Sum for RationalFunc {
    fn sum<I: Iterator<Item = RationalFunc>>(mut iter: I) -> Self {
        let first = iter.next().expect("sum of an empty rational function iterator");
        iter.fold(first, |acc, x| &acc + &x)
    }
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms()
            .map(|(e, v)| format!("({:.6}{:+.6}i)X^{}", v.re, v.im, e))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl fmt::Display for RationalFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] / [{}]", self.num, self.den)
    }
}

#[derive(Serialize, Deserialize)]
struct RfJson {
    q: u64,
    num: Vec<(i32, f64, f64)>,
    den: Vec<(i32, f64, f64)>,
}

fn poly_json(p: &LaurentPoly) -> Vec<(i32, f64, f64)> {
    p.terms().map(|(e, v)| (e, v.re, v.im)).collect()
}

impl Serialize for RationalFunc {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        RfJson { q: self.q(), num: poly_json(&self.num), den: poly_json(&self.den) }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for RationalFunc {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RfJson::deserialize(d)?;
        if raw.q < 2 {
            return Err(serde::de::Error::custom("q must exceed 1"));
        }
        let mk = |v: &[(i32, f64, f64)]| LaurentPoly::new(raw.q, v.iter().map(|&(e, re, im)| (e, c(re, im))));
        RationalFunc::new(mk(&raw.num), mk(&raw.den)).map_err(serde::de::Error::custom)
    }
}
