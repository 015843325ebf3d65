//! GL(1) kernel functions, truncation stability, gamma symbols and the Hankel
//! transform `F_pi phi = k * phi^v` by direct coset sums and through Mellin data.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::characters::{MultChar, UnitChar};
use crate::error::{Error, Result};
use crate::functions::{coset_units, MellinData, MultStepFunction};
use crate::numerics::{c, powi, RationalFunc, Scalar};
use crate::padic::{ipow, psi_value, unit_residues, PAdicElt, QpRational};
use crate::zeta::{gamma_closed, schwartz_datum, zeta_mult, zeta_step};

/// Parameters of an unramified representation (Satake list) or of a product of
/// GL(1) characters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PiParams {
    Satake { p: u64, alpha: Vec<Scalar> },
    Characters { chars: Vec<MultChar> },
}

impl PiParams {
    pub fn p(&self) -> Option<u64> {
        match self {
            PiParams::Satake { p, .. } => Some(*p),
            PiParams::Characters { chars } => chars.first().map(|c| c.p()),
        }
    }

    /// The GL(1) constituents.
    pub fn constituents(&self) -> Result<Vec<MultChar>> {
        match self {
            PiParams::Satake { p, alpha } => alpha.iter().map(|&a| MultChar::unramified(*p, a)).collect(),
            PiParams::Characters { chars } => {
                if let Some(first) = chars.first() {
                    if let Some(bad) = chars.iter().find(|c| c.p() != first.p()) {
                        return Err(Error::PrimeMismatch(bad.p(), first.p()));
                    }
                }
                Ok(chars.clone())
            }
        }
    }
}

/// The kernel `k(x) = psi(x) chi^{-1}(x) |x|^{1/2}` of the GL(1) representation `chi`.
#[derive(Clone, Debug, PartialEq)]
pub struct Gl1Kernel {
    pub chi: MultChar,
}

impl Gl1Kernel {
    pub fn new(chi: MultChar) -> Self {
        Gl1Kernel { chi }
    }

    pub fn eval(&self, x: &PAdicElt) -> Result<Scalar> {
        let q = self.chi.p() as f64;
        Ok(psi_value(x)? * self.chi.inverse().eval(x)? * q.powf(-(x.val() as f64) / 2.0))
    }

    /// `int_{p^v u (1 + p^k Z_p)} k(y) d^x y`, with `u` a unit residue mod `p^k`.
    pub fn coset_integral(&self, v: i32, u: u64, k: u32) -> Scalar {
        let p = self.chi.p();
        let inv = self.chi.inverse();
        let big_m = k.max((-v).max(0) as u32).max(inv.cond()).max(1);
        let step = ipow(p, k) as u64;
        let count = ipow(p, big_m - k) as u64;
        let start = if k == 0 { 0 } else { u };
        let mut acc = Scalar::default();
        for j in 0..count {
            let w = if k == 0 { j } else { start + step * j };
            if w % p == 0 {
                continue;
            }
            acc += QpRational::from_parts(p, w as i128, v).psi() * inv.unit().eval_residue(w);
        }
        let q = p as f64;
        acc * q.powi(-(big_m as i32)) * powi(inv.t(), v as i64) * q.powf(-(v as f64) / 2.0)
    }
}

/// `k_ell(x) = k(x) 1_{v(x) >= -ell}(x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedKernel {
    pub base: Gl1Kernel,
    pub ell: u32,
}

impl TruncatedKernel {
    pub fn eval(&self, x: &PAdicElt) -> Result<Scalar> {
        if x.val() < -(self.ell as i32) {
            return Ok(Scalar::default());
        }
        self.base.eval(x)
    }
}

/// `(psi * c_ell^v)(p^m u)`: the average of `psi` over `p^m u (1 + p^ell Z_p)`.
pub fn smoothed_psi(p: u64, m: i32, u: u64, ell: u32) -> Scalar {
    let depth = (-m - ell as i32).max(0) as u32;
    let count = ipow(p, depth) as i128;
    let step = ipow(p, ell) as i128;
    let mut acc = Scalar::default();
    for z in 0..count {
        let y = u as i128 * (1 + step * z);
        acc += QpRational::from_parts(p, y, m).psi();
    }
    acc / count as f64
}

/// Shell-`S_m` Mellin coefficient `int_{S_m} (psi * c_ell^v)(x) mu^{-1}(x) |x|^{1/2} d^x x`
/// with `mu = chi * twist`, for each `ell` in the list.
pub fn truncation_stability(k: &Gl1Kernel, m: i32, ells: &[u32], twist: &MultChar) -> Result<Vec<Scalar>> {
    let mu = k.chi.product(twist)?;
    let p = mu.p();
    let inv = mu.inverse();
    let big_m = ((-m).max(0) as u32).max(mu.cond()).max(1);
    let q = p as f64;
    let scale = q.powi(-(big_m as i32)) * q.powf(-(m as f64) / 2.0);
    let units = unit_residues(p, big_m);
    Ok(ells
        .iter()
        .map(|&ell| {
            let s: Scalar =
                units.iter().map(|&u| smoothed_psi(p, m, u, ell) * inv.unit().eval_residue(u)).sum();
            s * scale * powi(inv.t(), m as i64)
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub m: i32,
    pub ells: Vec<u32>,
    /// Smallest listed `ell` from which every twisted coefficient is constant.
    pub threshold: Option<u32>,
    pub max_change_after_threshold: f64,
}

/// Stability of the shell-`m` coefficients over every unitary twist of conductor
/// `<= c_max`. A single twist can have a vanishing coefficient and hide the jump,
/// so all of them are tracked together.
pub fn stability_threshold(k: &Gl1Kernel, m: i32, ells: &[u32], c_max: u32, tol: f64) -> Result<StabilityReport> {
    let mut ells = ells.to_vec();
    ells.sort_unstable();
    ells.dedup();
    let p = k.chi.p();
    let rows: Vec<Vec<Scalar>> = UnitChar::all_at_level(p, c_max)
        .into_par_iter()
        .map(|w| truncation_stability(k, m, &ells, &MultChar::from_unit(w)))
        .collect::<Result<_>>()?;
    let last = ells.len().saturating_sub(1);
    let stable_from = |i: usize| {
        rows.iter()
            .flat_map(|r| r[i..].iter().map(move |v| (v - r[last]).norm()))
            .fold(0.0, f64::max)
    };
    let idx = (0..ells.len()).find(|&i| stable_from(i) <= tol);
    Ok(StabilityReport {
        m,
        threshold: idx.map(|i| ells[i]),
        max_change_after_threshold: idx.map_or(f64::INFINITY, stable_from),
        ells,
    })
}

/// Mellin avatar of the kernel: `omega -> gamma(s + 1/2, pi x omega, psi)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaSymbol {
    pub components: MellinData,
    pub c_max: u32,
    pub params: PiParams,
}

pub fn gamma_symbol(params: &PiParams, c_max: u32) -> Result<GammaSymbol> {
    let chars = params.constituents()?;
    let p = params.p().ok_or_else(|| Error::InvalidCharacter("empty parameter list".into()))?;
    let mut components = MellinData::new(p);
    for w in UnitChar::all_at_level(p, c_max) {
        let omega = MultChar::from_unit(w.clone());
        let mut g = RationalFunc::one(p);
        for chi in &chars {
            g = &g * &gamma_closed(&chi.product(&omega)?).shift_half();
        }
        components.insert(w, g);
    }
    Ok(GammaSymbol { components, c_max, params: params.clone() })
}

/// Mellin data of `F_pi phi`: `M(F phi)(omega^{-1})(X^{-1}) = gamma_omega(X) M(phi)(omega)(X)`.
pub fn hankel_mellin(phi: &MultStepFunction, sym: &GammaSymbol) -> Result<MellinData> {
    let m_phi = phi.mellin();
    let mut out = MellinData::new(phi.p());
    for (w, rf) in &m_phi.comps {
        if w.cond() > sym.c_max {
            return Err(Error::MissingComponent { cond: w.cond(), c_max: sym.c_max });
        }
        let g = sym.components.comps.get(w).ok_or(Error::MissingComponent { cond: w.cond(), c_max: sym.c_max })?;
        out.insert(w.inverse(), (g * rf).invert_x());
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShellRow {
    pub m: i32,
    pub u: u64,
    pub re: f64,
    pub im: f64,
}

impl ShellRow {
    pub fn value(&self) -> Scalar {
        c(self.re, self.im)
    }
}

/// `F_pi phi(x) = int k(y) phi(x^{-1} y) d^x y` at the coset representatives of
/// `phi`'s level on shells `m_lo..=m_hi`, as exact coset sums of the kernel.
pub fn hankel_convolve(phi: &MultStepFunction, k: &Gl1Kernel, m_lo: i32, m_hi: i32) -> Result<Vec<ShellRow>> {
    let p = phi.p();
    if p != k.chi.p() {
        return Err(Error::PrimeMismatch(p, k.chi.p()));
    }
    let level = phi.level();
    let md = ipow(p, level) as u64;
    let keys: Vec<(i32, u64)> =
        (m_lo..=m_hi).flat_map(|m| coset_units(p, level).into_iter().map(move |u| (m, u))).collect();
    // distinct coset integrals, computed once
    let mut needed: Vec<(i32, u64)> = Vec::new();
    for &(m, u) in &keys {
        for &(m2, u2) in phi.values().keys() {
            let b = if level == 0 { 0 } else { ((u as u128 * u2 as u128) % md as u128) as u64 };
            needed.push((m + m2, b));
        }
    }
    needed.sort_unstable();
    needed.dedup();
    let table: HashMap<(i32, u64), Scalar> =
        needed.par_iter().map(|&(v, b)| ((v, b), k.coset_integral(v, b, level))).collect();
    Ok(keys
        .iter()
        .map(|&(m, u)| {
            let mut acc = Scalar::default();
            for (&(m2, u2), &val) in phi.values() {
                let b = if level == 0 { 0 } else { ((u as u128 * u2 as u128) % md as u128) as u64 };
                acc += val * table[&(m + m2, b)];
            }
            ShellRow { m, u, re: acc.re, im: acc.im }
        })
        .collect())
}

/// Pointwise values of the Mellin route on the same table layout.
pub fn hankel_mellin_table(phi: &MultStepFunction, sym: &GammaSymbol, m_lo: i32, m_hi: i32) -> Result<Vec<ShellRow>> {
    let d = hankel_mellin(phi, sym)?;
    let f = MultStepFunction::mellin_invert(&d, m_lo, m_hi, phi.level())?;
    let mut rows = Vec::new();
    for m in m_lo..=m_hi {
        for u in coset_units(phi.p(), phi.level()) {
            let v = f.values().get(&(m, u)).copied().unwrap_or_default();
            rows.push(ShellRow { m, u, re: v.re, im: v.im });
        }
    }
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HankelReport {
    pub shells: (i32, i32),
    pub convolve: Vec<ShellRow>,
    pub mellin: Vec<ShellRow>,
    pub max_abs_diff: f64,
}

/// Both Hankel routes for the GL(1) representation `chi_pi`.
pub fn hankel_both(phi: &MultStepFunction, chi_pi: &MultChar, m_lo: i32, m_hi: i32) -> Result<HankelReport> {
    let sym = gamma_symbol(&PiParams::Characters { chars: vec![chi_pi.clone()] }, phi.level())?;
    let convolve = hankel_convolve(phi, &Gl1Kernel::new(chi_pi.clone()), m_lo, m_hi)?;
    let mellin = hankel_mellin_table(phi, &sym, m_lo, m_hi)?;
    let max_abs_diff = convolve.iter().zip(&mellin).map(|(a, b)| (a.value() - b.value()).norm()).fold(0.0, f64::max);
    Ok(HankelReport { shells: (m_lo, m_hi), convolve, mellin, max_abs_diff })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HomogeneousReport {
    pub lhs: RationalFunc,
    pub rhs: RationalFunc,
    pub max_coeff_diff: f64,
}

/// `(chi_s^{-1}, F_pi phi0)` against `gamma(s + 1/2, pi x chi, psi) (chi_s, phi0)`.
///
/// The left pairing is computed from the Fourier transform of the Schwartz datum of
/// `phi0`, never through the gamma factor.
pub fn homogeneous_identity_check(chi: &MultChar, chi_pi: &MultChar, phi0: &MultStepFunction) -> Result<HomogeneousReport> {
    let mu = chi_pi.product(chi)?;
    let f = schwartz_datum(phi0, chi_pi)?;
    let lhs = zeta_step(&f.fourier_transform(false), &mu.inverse())?.dual_subst();
    let rhs = (&gamma_closed(&mu) * &zeta_mult(phi0, chi)?).shift_half();
    let max_coeff_diff = lhs.cross_diff(&rhs);
    Ok(HomogeneousReport { lhs, rhs, max_coeff_diff })
}

/// Reshapes table rows into a map keyed by `(m, u)`.
pub fn rows_to_map(rows: &[ShellRow]) -> BTreeMap<(i32, u64), Scalar> {
    rows.iter().map(|r| ((r.m, r.u), r.value())).collect()
}
