//! Test functions on `Q_p` and `Q_p^x`, and their Mellin data.
//!
//! [`StepFunction`] is a finite sum of `psi`-twisted ball indicators
//! `c * psi(a x) * 1_{b + p^n Z_p}(x)`; the class is closed under the Fourier
//! transform `F_psi f(y) = int f(x) psi(x y) dx` with `vol(Z_p) = 1`.
//!
//! [`MultStepFunction`] is a locally constant compactly supported function on
//! `Q_p^x`, stored as values on the cosets `p^m u (1 + p^K Z_p)` of a single
//! level `K` (at `K = 0` the cosets are the shells `p^m Z_p^x`).

use std::collections::BTreeMap;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::characters::{unitary_components, UnitChar};
use crate::error::{Error, Result};
use crate::numerics::{c, LaurentPoly, RationalFunc, Scalar};
use crate::padic::{check_prime, coset_volume, ipow, unit_residues, PAdicElt, QpRational};

/// Largest grid used for pointwise comparisons of step functions.
pub const MAX_GRID: u128 = 1 << 22;

/// Unit representatives of the cosets of `1 + p^k Z_p` in `Z_p^x` (just `1` for `k = 0`).
pub fn coset_units(p: u64, k: u32) -> Vec<u64> {
    if k == 0 {
        vec![1]
    } else {
        unit_residues(p, k)
    }
}

fn modulus(p: u64, k: u32) -> u64 {
    ipow(p, k) as u64
}

fn p_pow_f(p: u64, e: i32) -> f64 {
    (p as f64).powi(e)
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepTerm {
    pub coeff: Scalar,
    pub twist: QpRational,
    pub center: QpRational,
    pub rad: i32,
}

impl StepTerm {
    fn eval(&self, x: &QpRational) -> Scalar {
        if !x.in_ball(&self.center, self.rad) {
            return Scalar::default();
        }
        self.coeff * self.twist.mul(x).psi()
    }

    /// Reduced form: center mod `p^rad`, twist mod `p^{-rad}`.
    fn normalized(&self) -> StepTerm {
        let center = self.center.reduce_mod(self.rad);
        let twist = self.twist.reduce_mod(-self.rad);
        // psi(delta x) is the constant psi(delta * center) on the ball
        let delta = self.twist.sub(&twist);
        StepTerm { coeff: self.coeff * delta.mul(&center).psi(), twist, center, rad: self.rad }
    }

    fn key(&self) -> (i32, i128, u32, i128, u32) {
        (self.rad, self.center.num(), self.center.den_exp(), self.twist.num(), self.twist.den_exp())
    }
}

/// A Schwartz-Bruhat function on `Q_p` given by twisted ball indicators.
#[derive(Clone, Debug, PartialEq)]
pub struct StepFunction {
    p: u64,
    terms: Vec<StepTerm>,
}

impl StepFunction {
    pub fn new(p: u64, terms: Vec<StepTerm>) -> Result<Self> {
        check_prime(p)?;
        for t in &terms {
            if t.twist.p() != p || t.center.p() != p {
                return Err(Error::PrimeMismatch(t.twist.p(), p));
            }
            if !(t.coeff.re.is_finite() && t.coeff.im.is_finite()) {
                return Err(Error::NonFinite("step function coefficient"));
            }
        }
        Ok(Self::normalize(p, terms))
    }

    fn normalize(p: u64, terms: Vec<StepTerm>) -> Self {
        let mut merged: BTreeMap<(i32, i128, u32, i128, u32), StepTerm> = BTreeMap::new();
        for t in terms {
            let t = t.normalized();
            merged
                .entry(t.key())
                .and_modify(|e| e.coeff += t.coeff)
                .or_insert(t);
        }
        let terms = merged.into_values().filter(|t| t.coeff.norm() > 0.0).collect();
        StepFunction { p, terms }
    }

    pub fn zero(p: u64) -> Self {
        StepFunction { p, terms: Vec::new() }
    }

    /// `coeff * psi(twist x) * 1_{center + p^rad Z_p}`.
    pub fn term(p: u64, coeff: Scalar, twist: QpRational, center: QpRational, rad: i32) -> Result<Self> {
        Self::new(p, vec![StepTerm { coeff, twist, center, rad }])
    }

    /// `1_{p^n Z_p}`.
    pub fn ball_indicator(p: u64, n: i32) -> Self {
        Self::term(p, c(1.0, 0.0), QpRational::zero(p), QpRational::zero(p), n).expect("valid term")
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn terms(&self) -> &[StepTerm] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, x: &QpRational) -> Scalar {
        self.terms.iter().map(|t| t.eval(x)).sum()
    }

    pub fn scale(&self, k: Scalar) -> Self {
        let terms = self.terms.iter().map(|t| StepTerm { coeff: t.coeff * k, ..t.clone() }).collect();
        Self::normalize(self.p, terms)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.p != other.p {
            return Err(Error::PrimeMismatch(self.p, other.p));
        }
        Ok(Self::normalize(self.p, self.terms.iter().chain(&other.terms).cloned().collect()))
    }

    /// `F_psi f(y) = int f(x) psi(xy) dx`, or the `psi^{-1}` transform when `inverse_psi`.
    pub fn fourier_transform(&self, inverse_psi: bool) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let phase = t.twist.mul(&t.center).psi();
                let coeff = t.coeff * p_pow_f(self.p, -t.rad) * phase;
                if inverse_psi {
                    StepTerm { coeff, twist: t.center.neg(), center: t.twist, rad: -t.rad }
                } else {
                    StepTerm { coeff, twist: t.center, center: t.twist.neg(), rad: -t.rad }
                }
            })
            .collect();
        Self::normalize(self.p, terms)
    }

    /// `(lo, hi)`: support in `p^lo Z_p`, constant on cosets of `p^hi Z_p`.
    pub fn grid_bounds(&self) -> (i32, i32) {
        if self.terms.is_empty() {
            return (0, 0);
        }
        let lo = self
            .terms
            .iter()
            .map(|t| t.center.valuation().map_or(t.rad, |v| v.min(t.rad)))
            .min()
            .unwrap();
        let hi = self
            .terms
            .iter()
            .map(|t| t.twist.valuation().map_or(t.rad, |v| t.rad.max(-v)))
            .max()
            .unwrap();
        (lo, hi)
    }

    /// Values at `p^lo j` for `0 <= j < p^{hi - lo}`.
    pub fn grid_values(&self, lo: i32, hi: i32) -> Result<Vec<Scalar>> {
        let n = ipow(self.p, (hi - lo).max(0) as u32);
        if n > MAX_GRID {
            return Err(Error::TooLarge(n));
        }
        Ok((0..n as i128).map(|j| self.eval(&QpRational::from_parts(self.p, j, lo))).collect())
    }

    /// `int |f|^2 dx`, summed exactly on the grid.
    pub fn l2_norm_sq(&self) -> Result<f64> {
        let (lo, hi) = self.grid_bounds();
        let vals = self.grid_values(lo, hi)?;
        Ok(vals.iter().map(|v| v.norm_sqr()).sum::<f64>() * p_pow_f(self.p, -hi))
    }

    /// Largest pointwise difference, checked on a common grid.
    pub fn max_diff(&self, other: &Self) -> Result<f64> {
        if self.p != other.p {
            return Err(Error::PrimeMismatch(self.p, other.p));
        }
        let (a_lo, a_hi) = self.grid_bounds();
        let (b_lo, b_hi) = other.grid_bounds();
        let (lo, hi) = (a_lo.min(b_lo), a_hi.max(b_hi));
        let a = self.grid_values(lo, hi)?;
        let b = other.grid_values(lo, hi)?;
        Ok(a.iter().zip(&b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max))
    }
}

#[derive(Serialize, Deserialize)]
struct StepTermJson {
    coeff: [f64; 2],
    twist: (i64, u32),
    center: (i64, u32),
    rad: i32,
}

#[derive(Serialize, Deserialize)]
struct StepJson {
    p: u64,
    terms: Vec<StepTermJson>,
}

impl Serialize for StepFunction {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let terms = self
            .terms
            .iter()
            .map(|t| StepTermJson {
                coeff: [t.coeff.re, t.coeff.im],
                twist: (t.twist.num() as i64, t.twist.den_exp()),
                center: (t.center.num() as i64, t.center.den_exp()),
                rad: t.rad,
            })
            .collect();
        StepJson { p: self.p, terms }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for StepFunction {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = StepJson::deserialize(d)?;
        let p = raw.p;
        let terms = raw
            .terms
            .into_iter()
            .map(|t| StepTerm {
                coeff: c(t.coeff[0], t.coeff[1]),
                twist: QpRational::new(p, t.twist.0 as i128, t.twist.1),
                center: QpRational::new(p, t.center.0 as i128, t.center.1),
                rad: t.rad,
            })
            .collect();
        StepFunction::new(p, terms).map_err(serde::de::Error::custom)
    }
}

/// A locally constant compactly supported function on `Q_p^x`.
#[derive(Clone, Debug, PartialEq)]
pub struct MultStepFunction {
    p: u64,
    level: u32,
    values: BTreeMap<(i32, u64), Scalar>,
}

impl MultStepFunction {
    pub fn zero(p: u64, level: u32) -> Self {
        MultStepFunction { p, level, values: BTreeMap::new() }
    }

    /// `sum coeff * 1_{rep (1 + p^k Z_p)}`, disjointified at the largest `k`.
    pub fn from_terms(p: u64, terms: &[(Scalar, PAdicElt, u32)]) -> Result<Self> {
        check_prime(p)?;
        let level = terms.iter().map(|t| t.2).max().unwrap_or(0);
        let mut f = Self::zero(p, level);
        for (coeff, rep, k) in terms {
            if rep.p() != p {
                return Err(Error::PrimeMismatch(rep.p(), p));
            }
            if *k > 0 && rep.prec() < *k {
                return Err(Error::InsufficientPrecision { need: *k as i64, have: rep.prec() as i64 });
            }
            let sub = Self::indicator(p, rep.val(), rep.unit(), *k).refine(level);
            f = f.add(&sub.scale(*coeff))?;
        }
        Ok(f)
    }

    /// `1_{p^m u (1 + p^k Z_p)}`.
    pub fn indicator(p: u64, m: i32, u: u64, k: u32) -> Self {
        let mut values = BTreeMap::new();
        let key_u = if k == 0 { 1 } else { u % modulus(p, k) };
        values.insert((m, key_u), c(1.0, 0.0));
        MultStepFunction { p, level: k, values }
    }

    /// From explicit coset values at `level`; zero values are dropped.
    pub fn from_values(p: u64, level: u32, values: BTreeMap<(i32, u64), Scalar>) -> Result<Self> {
        check_prime(p)?;
        let md = modulus(p, level);
        let mut out = BTreeMap::new();
        for ((m, u), v) in values {
            if level > 0 && (u % p == 0 || u >= md) {
                return Err(Error::InvalidFunction(format!("{u} is not a unit residue mod p^{level}")));
            }
            if v.norm() > 0.0 {
                out.insert((m, if level == 0 { 1 } else { u }), v);
            }
        }
        Ok(MultStepFunction { p, level, values: out })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn values(&self) -> &BTreeMap<(i32, u64), Scalar> {
        &self.values
    }

    pub fn is_zero(&self) -> bool {
        self.values.is_empty()
    }

    pub fn shell_range(&self) -> Option<(i32, i32)> {
        let lo = self.values.keys().map(|k| k.0).min()?;
        let hi = self.values.keys().map(|k| k.0).max()?;
        Some((lo, hi))
    }

    /// The same function on the finer cosets of level `k >= level`.
    pub fn refine(&self, k: u32) -> Self {
        if k <= self.level {
            return self.clone();
        }
        let md_old = modulus(self.p, self.level);
        let mut values = BTreeMap::new();
        for w in coset_units(self.p, k) {
            let parent = if self.level == 0 { 1 } else { w % md_old };
            for (&(m, u), &v) in self.values.range((i32::MIN, 0)..) {
                if u == parent {
                    values.insert((m, w), v);
                }
            }
        }
        MultStepFunction { p: self.p, level: k, values }
    }

    pub fn eval(&self, x: &PAdicElt) -> Result<Scalar> {
        let u = if self.level == 0 { 1 } else { x.unit_mod(self.level)? };
        Ok(self.values.get(&(x.val(), u)).copied().unwrap_or_default())
    }

    pub fn scale(&self, k: Scalar) -> Self {
        let values = self.values.iter().map(|(&key, &v)| (key, v * k)).filter(|(_, v)| v.norm() > 0.0).collect();
        MultStepFunction { p: self.p, level: self.level, values }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.p != other.p {
            return Err(Error::PrimeMismatch(self.p, other.p));
        }
        let k = self.level.max(other.level);
        let (a, b) = (self.refine(k), other.refine(k));
        let mut values = a.values;
        for (key, v) in b.values {
            *values.entry(key).or_default() += v;
        }
        values.retain(|_, v| v.norm() > 0.0);
        Ok(MultStepFunction { p: self.p, level: k, values })
    }

    /// `x -> f(a^{-1} x)`.
    pub fn translate(&self, a: &PAdicElt) -> Result<Self> {
        let ua = if self.level == 0 { 1 } else { a.unit_mod(self.level)? };
        let md = modulus(self.p, self.level);
        let values = self
            .values
            .iter()
            .map(|(&(m, u), &v)| {
                let nu = if self.level == 0 { 1 } else { ((u as u128 * ua as u128) % md as u128) as u64 };
                ((m + a.val(), nu), v)
            })
            .collect();
        Ok(MultStepFunction { p: self.p, level: self.level, values })
    }

    /// Largest pointwise difference at a common level.
    pub fn max_diff(&self, other: &Self) -> Result<f64> {
        let neg = other.scale(c(-1.0, 0.0));
        let d = self.add(&neg)?;
        Ok(d.values.values().map(|v| v.norm()).fold(0.0, f64::max))
    }

    /// The same function as a ball-indicator step function on `Q_p`.
    pub fn to_step_function(&self) -> StepFunction {
        let f = self.refine(self.level.max(1));
        let k = f.level as i32;
        let terms = f
            .values
            .iter()
            .map(|(&(m, u), &v)| StepTerm {
                coeff: v,
                twist: QpRational::zero(self.p),
                center: QpRational::from_parts(self.p, u as i128, m),
                rad: m + k,
            })
            .collect();
        StepFunction::normalize(self.p, terms)
    }

    /// `(f * g)(x) = int f(y) g(y^{-1} x) d^x y`.
    pub fn mult_convolve(&self, other: &Self) -> Result<Self> {
        if self.p != other.p {
            return Err(Error::PrimeMismatch(self.p, other.p));
        }
        let k = self.level.max(other.level);
        let (a, b) = (self.refine(k), other.refine(k));
        let vol = coset_volume(self.p, k);
        let md = modulus(self.p, k) as u128;
        let mut values: BTreeMap<(i32, u64), Scalar> = BTreeMap::new();
        for (&(m1, u1), &v1) in &a.values {
            for (&(m2, u2), &v2) in &b.values {
                let u = if k == 0 { 1 } else { ((u1 as u128 * u2 as u128) % md) as u64 };
                *values.entry((m1 + m2, u)).or_default() += v1 * v2 * vol;
            }
        }
        values.retain(|_, v| v.norm() > 0.0);
        Ok(MultStepFunction { p: self.p, level: k, values })
    }

    /// `M(f)(omega)(X) = int f(x) omega(x) |x|^s d^x x` for every `omega` of conductor `<= level`.
    pub fn mellin(&self) -> MellinData {
        let vol = coset_volume(self.p, self.level);
        let total: f64 = self.values.values().map(|v| v.norm()).sum::<f64>() * vol;
        let mut out = MellinData::new(self.p);
        for omega in unitary_components(self.p, self.level) {
            let unit = omega.unit();
            let mut shells: BTreeMap<i32, Scalar> = BTreeMap::new();
            for (&(m, u), &v) in &self.values {
                *shells.entry(m).or_default() += v * unit.eval_residue(u) * vol;
            }
            let poly = LaurentPoly::new(self.p, shells);
            if poly.max_abs() > MELLIN_ZERO_REL * total {
                out.insert(unit.clone(), RationalFunc::from_poly(poly));
            }
        }
        out
    }

    /// Values on shells `m_lo..=m_hi` at level `c_max` recovered from Mellin data by
    /// character orthogonality.
    pub fn mellin_invert(d: &MellinData, m_lo: i32, m_hi: i32, c_max: u32) -> Result<Self> {
        let p = d.p;
        if let Some(bad) = d.comps.keys().find(|w| w.cond() > c_max) {
            return Err(Error::ConductorTooLarge { cond: bad.cond(), c_max });
        }
        let norm = 1.0 / (1.0 - 1.0 / p as f64);
        let mut values = BTreeMap::new();
        let series: Vec<(&UnitChar, Vec<Scalar>)> =
            d.comps.iter().map(|(w, rf)| rf.series_coeffs(m_lo, m_hi).map(|s| (w, s))).collect::<Result<_>>()?;
        for u in coset_units(p, c_max) {
            for m in m_lo..=m_hi {
                let mut acc = Scalar::default();
                for (w, s) in &series {
                    acc += w.eval_residue(u).conj() * s[(m - m_lo) as usize];
                }
                values.insert((m, u), acc * norm);
            }
        }
        Self::from_values(p, c_max, values)
    }
}

/// Components whose coefficients are below this fraction of `int |f| d^x x` are
/// treated as vanishing by orthogonality.
const MELLIN_ZERO_REL: f64 = 1e-13;

#[derive(Serialize, Deserialize)]
struct MultTermJson {
    coeff: [f64; 2],
    val: i32,
    unit: u64,
    k: u32,
}

#[derive(Serialize, Deserialize)]
struct MultJson {
    p: u64,
    terms: Vec<MultTermJson>,
}

impl Serialize for MultStepFunction {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let terms = self
            .values
            .iter()
            .map(|(&(m, u), &v)| MultTermJson { coeff: [v.re, v.im], val: m, unit: u, k: self.level })
            .collect();
        MultJson { p: self.p, terms }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for MultStepFunction {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = MultJson::deserialize(d)?;
        let terms = raw
            .terms
            .iter()
            .map(|t| {
                let prec = t.k.max(1);
                PAdicElt::new(raw.p, t.val, t.unit, prec).map(|rep| (c(t.coeff[0], t.coeff[1]), rep, t.k))
            })
            .collect::<Result<Vec<_>>>()
            .map_err(serde::de::Error::custom)?;
        MultStepFunction::from_terms(raw.p, &terms).map_err(serde::de::Error::custom)
    }
}

/// Mellin components `omega -> RationalFunc` indexed by unitary characters of `Z_p^x`.
#[derive(Clone, Debug, PartialEq)]
pub struct MellinData {
    pub p: u64,
    pub comps: BTreeMap<UnitChar, RationalFunc>,
}

impl MellinData {
    pub fn new(p: u64) -> Self {
        MellinData { p, comps: BTreeMap::new() }
    }

    pub fn insert(&mut self, omega: UnitChar, rf: RationalFunc) {
        if rf.is_zero() {
            self.comps.remove(&omega);
        } else {
            self.comps.insert(omega, rf);
        }
    }

    pub fn component(&self, omega: &UnitChar) -> RationalFunc {
        self.comps.get(omega).cloned().unwrap_or_else(|| RationalFunc::zero(self.p))
    }

    pub fn max_cond(&self) -> u32 {
        self.comps.keys().map(|w| w.cond()).max().unwrap_or(0)
    }

    pub fn scale(&self, k: Scalar) -> Self {
        let mut out = MellinData::new(self.p);
        for (w, rf) in &self.comps {
            out.insert(w.clone(), rf.scale(k));
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (w, rf) in &other.comps {
            let sum = &out.component(w) + rf;
            out.insert(w.clone(), sum);
        }
        out
    }

    /// Largest cross-multiplied coefficient discrepancy over all components.
    pub fn max_diff(&self, other: &Self) -> f64 {
        self.comps
            .keys()
            .chain(other.comps.keys())
            .map(|w| self.component(w).cross_diff(&other.component(w)))
            .fold(0.0, f64::max)
    }
}

#[derive(Serialize, Deserialize)]
struct MellinCompJson {
    cond: u32,
    unit_char: Vec<u64>,
    rf: RationalFunc,
}

#[derive(Serialize, Deserialize)]
struct MellinJson {
    p: u64,
    components: Vec<MellinCompJson>,
}

impl Serialize for MellinData {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let components = self
            .comps
            .iter()
            .map(|(w, rf)| MellinCompJson { cond: w.cond(), unit_char: w.exps().to_vec(), rf: rf.clone() })
            .collect();
        MellinJson { p: self.p, components }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for MellinData {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = MellinJson::deserialize(d)?;
        let mut out = MellinData::new(raw.p);
        for comp in raw.components {
            let w = UnitChar::new(raw.p, comp.cond, comp.unit_char).map_err(serde::de::Error::custom)?;
            out.insert(w, comp.rf);
        }
        Ok(out)
    }
}
