//! Zeta integrals, L-, epsilon- and gamma-factors over `Q_p` as rational functions
//! of `X = q^{-s}`.
//!
//! Conventions: `Z(s, phi, chi) = int phi(x) chi(x) |x|^{s - 1/2} d^x x`, so the shell
//! `S_m` enters with the monomial `(q^{1/2} X)^m`. Gamma factors are returned as
//! functions of `s` (unshifted); the kernel identity pairs `gamma_pv` with
//! `gamma_closed` directly.

use serde::{Deserialize, Serialize};

use crate::characters::{MultChar, UnitChar};
use crate::error::{Error, Result};
use crate::functions::{MultStepFunction, StepFunction};
use crate::numerics::{c, powi, root_of_unity, LaurentPoly, RationalFunc, Scalar};
use crate::padic::{coset_volume, ipow, unit_residues, QpRational};

/// Shell integrals below this modulus are exact zeros up to rounding.
const SHELL_ZERO: f64 = 1e-13;

/// A test function for the functional equation.
///
/// `Schwartz(f)` stands for `phi = |x|^{1/2} chi_pi(x) f(x)` with `f` Schwartz-Bruhat;
/// `Compact(phi)` is `phi` itself, compactly supported in `Q_p^x`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "function", rename_all = "snake_case")]
pub enum TestFunction {
    Schwartz(StepFunction),
    Compact(MultStepFunction),
}

fn sqrt_q(q: u64) -> f64 {
    (q as f64).sqrt()
}

fn snap(z: Scalar) -> Scalar {
    if z.norm() < SHELL_ZERO {
        Scalar::default()
    } else {
        z
    }
}

/// `int_{S_0} f(p^m u) omega(u) d^x u`, summed over units mod `p^M`.
fn step_shell_integral(f: &StepFunction, omega: &UnitChar, m: i32, hi: i32) -> Scalar {
    let p = f.p();
    let big_m = ((hi - m).max(0) as u32).max(omega.cond()).max(1);
    let w = (p as f64).powi(-(big_m as i32));
    unit_residues(p, big_m)
        .into_iter()
        .map(|u| f.eval(&QpRational::from_parts(p, u as i128, m)) * omega.eval_residue(u))
        .sum::<Scalar>()
        * w
}

/// `Z(s, f, chi)` for a Schwartz-Bruhat step function. Shells below the constancy
/// radius are summed directly; the rest is the geometric tail of the germ `f(0)`.
pub fn zeta_step(f: &StepFunction, chi: &MultChar) -> Result<RationalFunc> {
    let p = f.p();
    if p != chi.p() {
        return Err(Error::PrimeMismatch(p, chi.p()));
    }
    let (lo, hi) = f.grid_bounds();
    let a = chi.t() * sqrt_q(p);
    let mut shells = Vec::new();
    for m in lo..hi {
        let v = step_shell_integral(f, chi.unit(), m, hi);
        shells.push((m, v * powi(a, m as i64)));
    }
    let head = RationalFunc::from_poly(LaurentPoly::new(p, shells));
    if !chi.is_unramified() {
        return Ok(head);
    }
    let f0 = f.eval(&QpRational::zero(p));
    if f0.norm() == 0.0 {
        return Ok(head);
    }
    let tail = &RationalFunc::monomial(p, f0 * (1.0 - 1.0 / p as f64) * powi(a, hi as i64), hi)
        * &RationalFunc::geometric(p, a);
    Ok(&head + &tail)
}

/// `Z(s, phi, chi)` for `phi` compactly supported in `Q_p^x`: a Laurent polynomial.
pub fn zeta_mult(phi: &MultStepFunction, chi: &MultChar) -> Result<RationalFunc> {
    let p = phi.p();
    if p != chi.p() {
        return Err(Error::PrimeMismatch(p, chi.p()));
    }
    let k = phi.level().max(chi.cond());
    let f = phi.refine(k);
    let vol = coset_volume(p, k);
    let a = chi.t() * sqrt_q(p);
    let terms = f
        .values()
        .iter()
        .map(|(&(m, u), &v)| (m, v * chi.unit().eval_residue(u) * powi(a, m as i64) * vol));
    Ok(RationalFunc::from_poly(LaurentPoly::new(p, terms)))
}

pub fn zeta(phi: &TestFunction, chi: &MultChar) -> Result<RationalFunc> {
    match phi {
        TestFunction::Schwartz(f) => zeta_step(f, chi),
        TestFunction::Compact(g) => zeta_mult(g, chi),
    }
}

/// `1/(1 - chi(p) X)` for unramified `chi`, otherwise 1.
pub fn l_factor(chi: &MultChar) -> RationalFunc {
    if chi.is_unramified() {
        RationalFunc::geometric(chi.p(), chi.t())
    } else {
        RationalFunc::one(chi.p())
    }
}

/// `prod_i 1/(1 - alpha_i X)`.
pub fn l_factor_satake(q: u64, alpha: &[Scalar]) -> RationalFunc {
    let mut den = LaurentPoly::constant(q, c(1.0, 0.0));
    for &a in alpha {
        den = &den * &LaurentPoly::new(q, [(0, c(1.0, 0.0)), (1, -a)]);
    }
    RationalFunc::new(LaurentPoly::constant(q, c(1.0, 0.0)), den).expect("nonzero denominator")
}

/// `sum_{u in (Z/p^a)^x} omega(u) exp(sign * 2 pi i u / p^a)`.
pub fn gauss_sum(omega: &UnitChar, sign: i32) -> Scalar {
    let p = omega.p();
    let a = omega.cond();
    let md = ipow(p, a);
    unit_residues(p, a)
        .into_iter()
        .map(|u| omega.eval_residue(u) * root_of_unity(sign as i128 * u as i128, md))
        .sum()
}

/// The monomial `t^a g(omega^{-1}) X^a` for `chi = t^{v} omega` of conductor `a >= 1`
/// (level-0 `psi`, or `psi^{-1}` when `inverse_psi`); 1 when unramified.
pub fn epsilon_factor_with(chi: &MultChar, inverse_psi: bool) -> RationalFunc {
    let a = chi.cond();
    if a == 0 {
        return RationalFunc::one(chi.p());
    }
    let sign = if inverse_psi { -1 } else { 1 };
    let g = gauss_sum(&chi.unit().inverse(), sign);
    RationalFunc::monomial(chi.p(), powi(chi.t(), a as i64) * g, a as i32)
}

pub fn epsilon_factor(chi: &MultChar) -> RationalFunc {
    epsilon_factor_with(chi, false)
}

/// `eps(s, chi, psi) L(1 - s, chi^{-1}) / L(s, chi)`.
pub fn gamma_closed_with(chi: &MultChar, inverse_psi: bool) -> RationalFunc {
    let num = l_factor(&chi.inverse()).dual_subst();
    let ratio = num.div(&l_factor(chi)).expect("L-factors are nonzero");
    &epsilon_factor_with(chi, inverse_psi) * &ratio
}

pub fn gamma_closed(chi: &MultChar) -> RationalFunc {
    gamma_closed_with(chi, false)
}

/// `G_m = int_{S_m} psi(x) mu^{-1}(x) d^x x` by brute-force coset summation.
pub fn pv_shell_integral(mu: &MultChar, m: i32) -> Scalar {
    let p = mu.p();
    let big_m = ((-m).max(0) as u32).max(mu.cond()).max(1);
    let w = (p as f64).powi(-(big_m as i32));
    let inv = mu.unit().inverse();
    let s: Scalar = unit_residues(p, big_m)
        .into_iter()
        .map(|u| QpRational::from_parts(p, u as i128, m).psi() * inv.eval_residue(u))
        .sum();
    s * w * powi(mu.t(), -(m as i64))
}

/// Agreement record between the closed-form gamma factor and the principal-value
/// shell sum of the kernel.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaReport {
    pub gamma_closed: RationalFunc,
    pub gamma_pv: RationalFunc,
    pub max_coeff_diff: f64,
    pub shells: (i32, i32),
}

/// The principal-value sum `sum_m q^{-m} G_m X^{-m}` over shells `-ell..=-1`, with the
/// `m >= 0` tail `G_0 / (1 - t^{-1} q^{-1} X^{-1})` summed formally.
pub fn gamma_pv_truncated(mu: &MultChar, ell: u32) -> RationalFunc {
    let p = mu.p();
    let q = p as f64;
    let head: Vec<(i32, Scalar)> =
        (-(ell as i32)..=-1).map(|m| (-m, snap(pv_shell_integral(mu, m)) * q.powi(-m))).collect();
    let head = RationalFunc::from_poly(LaurentPoly::new(p, head));
    let g0 = snap(pv_shell_integral(mu, 0));
    if g0.norm() == 0.0 {
        return head;
    }
    let den = LaurentPoly::new(p, [(0, c(1.0, 0.0)), (-1, -mu.t().inv() / q)]);
    let tail = RationalFunc::new(LaurentPoly::constant(p, g0), den).expect("nonzero denominator");
    &head + &tail
}

/// Both gamma routes for `mu = chi_pi * twist`. Shells `-(a+2)..=-1` (with `a` the
/// conductor of `mu`, at least 1) are summed by brute force; the two below the
/// window must vanish.
pub fn gamma_pv(chi_pi: &MultChar, twist: &MultChar) -> Result<GammaReport> {
    let mu = chi_pi.product(twist)?;
    let a = mu.cond().max(1) as i32;
    for m in [-a - 1, -a - 2] {
        let g = pv_shell_integral(&mu, m);
        if g.norm() >= SHELL_ZERO {
            return Err(Error::PrecisionGuard(format!("shell {m} does not vanish: |G| = {:e}", g.norm())));
        }
    }
    let gamma_pv = gamma_pv_truncated(&mu, a as u32);
    let gamma_closed = gamma_closed(&mu);
    let max_coeff_diff = gamma_closed.cross_diff(&gamma_pv);
    Ok(GammaReport { gamma_closed, gamma_pv, max_coeff_diff, shells: (-a - 2, 0) })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeReport {
    pub lhs: RationalFunc,
    pub rhs: RationalFunc,
    pub max_coeff_diff: f64,
}

/// `f = |x|^{-1/2} chi_pi^{-1}(x) phi(x)` as a step function on `Q_p`.
pub fn schwartz_datum(phi: &MultStepFunction, chi_pi: &MultChar) -> Result<StepFunction> {
    let p = phi.p();
    if p != chi_pi.p() {
        return Err(Error::PrimeMismatch(p, chi_pi.p()));
    }
    let k = phi.level().max(chi_pi.cond());
    let f = phi.refine(k);
    let inv = chi_pi.inverse();
    let values = f
        .values()
        .iter()
        .map(|(&(m, u), &v)| ((m, u), v * (p as f64).powf(m as f64 / 2.0) * powi(inv.t(), m as i64) * inv.unit().eval_residue(u)))
        .collect();
    Ok(MultStepFunction::from_values(p, k, values)?.to_step_function())
}

/// Both sides of `Z(1 - s, F_pi phi, chi^{-1}) = gamma(s, pi x chi, psi) Z(s, phi, chi)`
/// for the GL(1) representation `pi = chi_pi`.
///
/// The left side goes through the Fourier transform of the Schwartz datum of `phi`,
/// the right side through the closed-form gamma factor.
pub fn verify_fe(phi: &TestFunction, chi: &MultChar, chi_pi: &MultChar) -> Result<FeReport> {
    let mu = chi_pi.product(chi)?;
    let (f, rhs_zeta) = match phi {
        TestFunction::Schwartz(f) => (f.clone(), zeta_step(f, &mu)?.shift_half()),
        TestFunction::Compact(g) => (schwartz_datum(g, chi_pi)?, zeta_mult(g, chi)?),
    };
    let rhs = &gamma_closed(&mu) * &rhs_zeta;
    let fhat = f.fourier_transform(false);
    let lhs = zeta_step(&fhat, &mu.inverse())?.shift_half().dual_subst();
    let max_coeff_diff = lhs.cross_diff(&rhs);
    Ok(FeReport { lhs, rhs, max_coeff_diff })
}

/// `chi(-1)`, used to pass between `psi` and `psi^{-1}`.
pub fn sign_value(chi: &MultChar) -> Scalar {
    let a = chi.cond();
    if a == 0 {
        return c(1.0, 0.0);
    }
    let md = ipow(chi.p(), a) as u64;
    chi.unit().eval_residue(md - 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characters::{unitary_components, UnitChar};
    use crate::padic::PAdicElt;
    use proptest::prelude::*;

    #[test]
    fn zeta_of_unit_shell() {
        let phi = MultStepFunction::indicator(5, 0, 1, 0);
        let z = zeta_mult(&phi, &MultChar::trivial(5)).unwrap();
        assert!(z.approx_eq(&RationalFunc::constant(5, c(0.8, 0.0)), 1e-15));
        let z2 = zeta_step(&phi.to_step_function(), &MultChar::trivial(5)).unwrap();
        assert!(z2.approx_eq(&z, 1e-15));
    }

    #[test]
    fn zeta_of_zp() {
        let q = 3u64;
        let z = zeta_step(&StepFunction::ball_indicator(q, 0), &MultChar::trivial(q)).unwrap();
        let expect = RationalFunc::geometric(q, c(3f64.sqrt(), 0.0)).scale(c(2.0 / 3.0, 0.0));
        assert!(z.approx_eq(&expect, 1e-14), "{z}");
    }

    #[test]
    fn zeta_of_principal_units() {
        let q = 5u64;
        let phi = MultStepFunction::indicator(q, 0, 1, 1);
        for w in unitary_components(q, 1) {
            let z = zeta_mult(&phi, &w).unwrap();
            assert!(z.approx_eq(&RationalFunc::constant(q, c(0.2, 0.0)), 1e-15));
        }
    }

    #[test]
    fn l_factors() {
        assert_eq!(l_factor(&MultChar::trivial(3)), RationalFunc::geometric(3, c(1.0, 0.0)));
        let ram = MultChar::from_unit(UnitChar::new(5, 1, vec![1]).unwrap());
        assert_eq!(l_factor(&ram), RationalFunc::one(5));
        let (a, b) = (c(0.5, 0.1), c(-0.2, 0.9));
        let expect = &RationalFunc::geometric(7, a) * &RationalFunc::geometric(7, b);
        assert!(l_factor_satake(7, &[a, b]).approx_eq(&expect, 1e-15));
    }

    #[test]
    fn gamma_of_trivial_character() {
        let q = 5u64;
        let g = gamma_closed(&MultChar::trivial(q));
        let num = RationalFunc::from_poly(LaurentPoly::new(q, [(0, c(1.0, 0.0)), (1, c(-1.0, 0.0))]));
        let den = RationalFunc::from_poly(LaurentPoly::new(q, [(0, c(1.0, 0.0)), (-1, c(-0.2, 0.0))]));
        assert!(g.approx_eq(&num.div(&den).unwrap(), 1e-14));
    }

    #[test]
    fn quadratic_gauss_sum_modulus() {
        for p in [3u64, 5, 7, 11] {
            let quad = UnitChar::new(p, 1, vec![(p - 1) / 2]).unwrap();
            // brute force over residues with the Legendre symbol
            let mut g = Scalar::default();
            for u in 1..p {
                let leg = if (1..p).any(|y| y * y % p == u) { 1.0 } else { -1.0 };
                g += root_of_unity(u as i128, p as u128) * leg;
            }
            assert!((gauss_sum(&quad, 1) - g).norm() < 1e-12);
            let eps = epsilon_factor(&MultChar::from_unit(quad));
            assert!((eps.eval_s(c(0.5, 1.3)).norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn epsilon_exponent_is_conductor() {
        let w = UnitChar::all_at_level(3, 2).into_iter().find(|w| w.cond() == 2).unwrap();
        let eps = epsilon_factor(&MultChar::from_unit(w));
        assert!(eps.is_laurent_poly());
        assert_eq!(eps.num().min_exp(), Some(2));
        assert_eq!(eps.num().max_exp(), Some(2));
    }

    #[test]
    fn pv_of_trivial_character() {
        let r = gamma_pv(&MultChar::trivial(3), &MultChar::trivial(3)).unwrap();
        assert!(r.max_coeff_diff < 1e-12, "{r:?}");
    }

    #[test]
    fn ramified_pv_has_single_shell() {
        for p in [3u64, 5] {
            for w in UnitChar::all_at_level(p, 2).into_iter().filter(|w| w.cond() >= 1) {
                let mu = MultChar::from_unit(w.clone());
                let a = w.cond() as i32;
                for m in -a - 2..=2 {
                    let g = pv_shell_integral(&mu, m);
                    if m == -a {
                        assert!(g.norm() > 1e-3);
                    } else {
                        assert!(g.norm() < 1e-13, "p={p} m={m} {w:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn fe_for_zp() {
        let phi = TestFunction::Schwartz(StepFunction::ball_indicator(5, 0));
        let r = verify_fe(&phi, &MultChar::trivial(5), &MultChar::trivial(5)).unwrap();
        assert!(r.max_coeff_diff < 1e-10);
    }

    #[test]
    fn fe_compact_ramified() {
        let p = 5;
        let w = UnitChar::new(p, 1, vec![1]).unwrap();
        let chi = MultChar::new(w, c(0.6, 0.8)).unwrap();
        let phi = MultStepFunction::from_terms(
            p,
            &[
                (c(1.0, 0.0), PAdicElt::new(p, 0, 2, 1).unwrap(), 1),
                (c(0.0, -2.0), PAdicElt::new(p, -1, 3, 1).unwrap(), 1),
            ],
        )
        .unwrap();
        let r = verify_fe(&TestFunction::Compact(phi), &chi, &MultChar::trivial(p)).unwrap();
        assert!(r.max_coeff_diff < 1e-10, "{r:?}");
        assert!(r.rhs.is_laurent_poly());
    }

    #[test]
    fn fe_schwartz_with_ramified_pi() {
        let p = 3;
        let chi_pi = MultChar::new(UnitChar::new(p, 1, vec![1]).unwrap(), c(0.0, 1.0)).unwrap();
        let f = StepFunction::new(
            p,
            vec![
                crate::functions::StepTerm {
                    coeff: c(1.0, 0.5),
                    twist: QpRational::new(p, 1, 1),
                    center: QpRational::new(p, 2, 0),
                    rad: 1,
                },
                crate::functions::StepTerm {
                    coeff: c(0.3, 0.0),
                    twist: QpRational::zero(p),
                    center: QpRational::zero(p),
                    rad: -1,
                },
            ],
        )
        .unwrap();
        for chi in unitary_components(p, 2) {
            let r = verify_fe(&TestFunction::Schwartz(f.clone()), &chi, &chi_pi).unwrap();
            assert!(r.max_coeff_diff < 1e-10, "{r:?}");
        }
    }

    proptest! {
        #[test]
        fn two_routes_agree(p in prop::sample::select(vec![2u64, 3, 5, 7]), idx in 0usize..50, theta in 0.0..std::f64::consts::TAU) {
            let level = if p == 2 { 3 } else { 2 };
            let all = UnitChar::all_at_level(p, level);
            let chi = MultChar::new(all[idx % all.len()].clone(), Scalar::from_polar(1.0, theta)).unwrap();
            let r = gamma_pv(&chi, &MultChar::trivial(p)).unwrap();
            prop_assert!(r.max_coeff_diff < 1e-10);
        }

        #[test]
        fn duality(p in prop::sample::select(vec![2u64, 3, 5, 7]), idx in 0usize..50, theta in 0.0..std::f64::consts::TAU) {
            let all = UnitChar::all_at_level(p, 2);
            let chi = MultChar::new(all[idx % all.len()].clone(), Scalar::from_polar(1.0, theta)).unwrap();
            let g = gamma_closed(&chi);
            let h = gamma_closed_with(&chi.inverse(), true).dual_subst();
            let prod = &g * &h;
            prop_assert!(prod.approx_eq(&RationalFunc::one(p), 1e-10));
            // psi^{-1} differs by chi(-1)
            let flip = gamma_closed_with(&chi, true);
            prop_assert!(flip.approx_eq(&g.scale(sign_value(&chi)), 1e-10));
        }

        #[test]
        fn schedule_invariance(p in prop::sample::select(vec![3u64, 5]), idx in 0usize..30, extra in 0u32..3) {
            let all = UnitChar::all_at_level(p, 2);
            let mu = MultChar::from_unit(all[idx % all.len()].clone());
            let a = mu.cond().max(1);
            let base = gamma_pv_truncated(&mu, a);
            let longer = gamma_pv_truncated(&mu, a + extra);
            prop_assert!(base.cross_diff(&longer) < 1e-13);
        }
    }
}
