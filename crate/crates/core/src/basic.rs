//! The unramified basic function attached to Satake parameters.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::characters::{MultChar, UnitChar};
use crate::error::{Error, Result};
use crate::functions::MultStepFunction;
use crate::kernel::{gamma_symbol, PiParams};
use crate::numerics::{LaurentPoly, RationalFunc, Scalar};
use crate::zeta::{gamma_closed, l_factor_satake, zeta_mult};

/// `h_m(alpha)` for `m` in `0..count`, read off the expansion of `prod (1 - alpha_i X)^{-1}`.
pub fn complete_homogeneous_list(count: usize, alpha: &[Scalar]) -> Vec<Scalar> {
    if count == 0 {
        return Vec::new();
    }
    l_factor_satake(2, alpha).series_coeffs(0, count as i32 - 1).expect("denominator is 1 at X = 0")
}

pub fn complete_homogeneous(m: u32, alpha: &[Scalar]) -> Scalar {
    complete_homogeneous_list(m as usize + 1, alpha)[m as usize]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasicFunction {
    pub p: u64,
    pub alpha: Vec<Scalar>,
}

impl BasicFunction {
    pub fn new(p: u64, alpha: Vec<Scalar>) -> Result<Self> {
        crate::padic::check_prime(p)?;
        if alpha.iter().any(|a| a.norm() == 0.0 || !a.is_finite()) {
            return Err(Error::InvalidCharacter("Satake parameters must be finite and nonzero".into()));
        }
        Ok(BasicFunction { p, alpha })
    }

    pub fn dual(&self) -> Self {
        BasicFunction { p: self.p, alpha: self.alpha.iter().map(|a| a.inv()).collect() }
    }

    /// Values on `S_0, ..., S_{count-1}`; zero on negative shells.
    pub fn shell_values(&self, count: usize) -> Vec<Scalar> {
        let q = self.p as f64;
        complete_homogeneous_list(count, &self.alpha)
            .into_iter()
            .enumerate()
            .map(|(m, h)| h * q.powf(-(m as f64) / 2.0) / (1.0 - 1.0 / q))
            .collect()
    }

    /// Restriction to shells `0..window`.
    pub fn truncated(&self, window: usize) -> MultStepFunction {
        let values: BTreeMap<(i32, u64), Scalar> =
            self.shell_values(window).into_iter().enumerate().map(|(m, v)| ((m as i32, 1u64), v)).collect();
        MultStepFunction::from_values(self.p, 0, values).expect("level-0 values")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasicReport {
    pub computed: RationalFunc,
    pub expected: RationalFunc,
    pub max_coeff_diff: f64,
    /// Largest coefficient left over when the truncated series is multiplied by the
    /// denominator, above the numerator degree.
    pub recurrence_residual: f64,
}

/// Closes a truncated power series `s` with known denominator `den` of degree `n`.
fn close_series(s: &LaurentPoly, den: &LaurentPoly, n: i32, window: i32) -> Result<(RationalFunc, f64)> {
    let prod = s * den;
    let num = LaurentPoly::new(s.q(), prod.terms().filter(|&(e, _)| e < n));
    let residual = prod.terms().filter(|&(e, _)| e >= n && e < window).map(|(_, v)| v.norm()).fold(0.0, f64::max);
    Ok((RationalFunc::new(num, den.clone())?, residual))
}

/// `Z(s, L_pi, chi)` from shell values on `0..window`, closed with the rank-`n`
/// recurrence, against `L(s, pi x chi)`.
pub fn basic_zeta_check(b: &BasicFunction, chi: &MultChar, window: usize) -> Result<BasicReport> {
    if !chi.is_unramified() {
        return Err(Error::InvalidCharacter("the basic function pairs with unramified characters only".into()));
    }
    let n = b.alpha.len();
    if window < 2 * n + 1 {
        return Err(Error::PrecisionGuard(format!("window {window} too short for rank {n}")));
    }
    let partial = zeta_mult(&b.truncated(window), chi)?;
    let twisted: Vec<Scalar> = b.alpha.iter().map(|a| a * chi.t()).collect();
    let expected = l_factor_satake(b.p, &twisted);
    let (computed, recurrence_residual) = close_series(partial.num(), expected.den(), n as i32, window as i32)?;
    let computed = computed.scale(partial.den().coeff(0).inv());
    let max_coeff_diff = computed.cross_diff(&expected);
    Ok(BasicReport { computed, expected, max_coeff_diff, recurrence_residual })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasicFourierReport {
    /// `gamma(s, pi) L(s, pi)` against `L(1 - s, dual)`, relative to the size of
    /// the cross products (their coefficients grow like `q^n`).
    pub l_ratio_diff: f64,
    /// Mellin-domain check of `F(L_pi) = L_dual` over every twist of conductor `<= c_max`.
    pub mellin_diff: f64,
    pub max_coeff_diff: f64,
}

pub fn basic_fourier_check(b: &BasicFunction, c_max: u32, window: usize) -> Result<BasicFourierReport> {
    let p = b.p;
    let dual = b.dual();
    let mut gamma = RationalFunc::one(p);
    for &a in &b.alpha {
        gamma = &gamma * &gamma_closed(&MultChar::unramified(p, a)?);
    }
    let lhs = &gamma * &l_factor_satake(p, &b.alpha);
    let rhs = l_factor_satake(p, &dual.alpha).dual_subst();
    let l_ratio_diff = lhs.rel_cross_diff(&rhs);

    // Mellin components of both basic functions, closed from their shell values
    let n = b.alpha.len() as i32;
    let mellin_of = |f: &BasicFunction| -> Result<BTreeMap<UnitChar, RationalFunc>> {
        let trunc = f.truncated(window).refine(c_max).mellin();
        let den = l_factor_satake(p, &f.alpha).shift_half();
        let mut out = BTreeMap::new();
        for w in UnitChar::all_at_level(p, c_max) {
            let comp = trunc.component(&w);
            let closed = close_series(comp.num(), den.den(), n, window as i32)?.0.scale(comp.den().coeff(0).inv());
            out.insert(w, closed);
        }
        Ok(out)
    };
    let m_pi = mellin_of(b)?;
    let m_dual = mellin_of(&dual)?;
    let sym = gamma_symbol(&PiParams::Satake { p, alpha: b.alpha.clone() }, c_max)?;
    let mut mellin_diff: f64 = 0.0;
    for (w, comp) in &m_pi {
        let left = (&sym.components.component(w) * comp).invert_x();
        let right = &m_dual[&w.inverse()];
        mellin_diff = mellin_diff.max(left.cross_diff(right));
    }
    Ok(BasicFourierReport { l_ratio_diff, mellin_diff, max_coeff_diff: l_ratio_diff.max(mellin_diff) })
}

/// Shell table rows `(m, value)` on `0..window`.
pub fn shell_table(b: &BasicFunction, window: usize) -> Vec<(i32, Scalar)> {
    b.shell_values(window).into_iter().enumerate().map(|(m, v)| (m as i32, v)).collect()
}

pub fn unit(theta: f64) -> Scalar {
    Scalar::from_polar(1.0, theta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::c;
    use proptest::prelude::*;

    /// Sum over multisets of size `m` by direct enumeration.
    fn brute_h(m: u32, alpha: &[Scalar]) -> Scalar {
        fn rec(m: u32, alpha: &[Scalar]) -> Scalar {
            if m == 0 {
                return c(1.0, 0.0);
            }
            if alpha.is_empty() {
                return Scalar::default();
            }
            // multisets either avoid alpha[0] or use it at least once
            rec(m, &alpha[1..]) + alpha[0] * rec(m - 1, alpha)
        }
        rec(m, alpha)
    }

    #[test]
    fn h_examples() {
        let a = c(0.3, 0.4);
        let b = c(-1.2, 0.1);
        assert_eq!(complete_homogeneous(0, &[a, b]), c(1.0, 0.0));
        assert!((complete_homogeneous(2, &[a, b]) - (a * a + a * b + b * b)).norm() < 1e-14);
        for m in 0..8 {
            assert!((complete_homogeneous(m, &[c(1.0, 0.0)]) - c(1.0, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn h_against_multisets() {
        let alpha = [unit(0.4), unit(2.0), c(0.5, -0.7)];
        for n in 1..=3 {
            for m in 0..=6 {
                let r = complete_homogeneous(m, &alpha[..n]);
                assert!((r - brute_h(m, &alpha[..n])).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn rank_one_trivial_zeta() {
        let b = BasicFunction::new(3, vec![c(1.0, 0.0)]).unwrap();
        let r = basic_zeta_check(&b, &MultChar::trivial(3), 8).unwrap();
        assert!(r.max_coeff_diff < 1e-12);
        assert!(r.computed.approx_eq(&RationalFunc::geometric(3, c(1.0, 0.0)), 1e-12));
    }

    #[test]
    fn rank_two_zeta_and_twist() {
        let a = unit(0.8);
        let b = BasicFunction::new(5, vec![a, a.inv()]).unwrap();
        let r = basic_zeta_check(&b, &MultChar::trivial(5), 10).unwrap();
        assert!(r.max_coeff_diff < 1e-12 && r.recurrence_residual < 1e-12);
        let t = unit(1.3);
        let r = basic_zeta_check(&b, &MultChar::unramified(5, t).unwrap(), 10).unwrap();
        let expect = l_factor_satake(5, &[a * t, a.inv() * t]);
        assert!(r.computed.approx_eq(&expect, 1e-12));
    }

    #[test]
    fn ramified_twist_rejected() {
        let b = BasicFunction::new(5, vec![c(1.0, 0.0)]).unwrap();
        let chi = MultChar::from_unit(UnitChar::new(5, 1, vec![1]).unwrap());
        assert!(basic_zeta_check(&b, &chi, 8).is_err());
    }

    #[test]
    fn rank_one_fourier() {
        let b = BasicFunction::new(2, vec![c(1.0, 0.0)]).unwrap();
        let r = basic_fourier_check(&b, 1, 8).unwrap();
        assert!(r.max_coeff_diff < 1e-12, "{r:?}");
        let g = gamma_closed(&MultChar::trivial(2));
        let lhs = &g * &RationalFunc::geometric(2, c(1.0, 0.0));
        let expect = RationalFunc::new(
            LaurentPoly::constant(2, c(1.0, 0.0)),
            LaurentPoly::new(2, [(0, c(1.0, 0.0)), (-1, c(-0.5, 0.0))]),
        )
        .unwrap();
        assert!(lhs.cross_diff(&expect) < 1e-14);
    }

    #[test]
    fn self_dual_fourier() {
        let a = unit(2.2);
        let b = BasicFunction::new(3, vec![a, a.inv()]).unwrap();
        let r = basic_fourier_check(&b, 2, 10).unwrap();
        assert!(r.max_coeff_diff < 1e-11, "{r:?}");
    }

    proptest! {
        #[test]
        fn unitary_corpus(thetas in proptest::collection::vec(0.0..std::f64::consts::TAU, 1..5), p in prop::sample::select(vec![2u64, 3, 5, 7])) {
            let alpha: Vec<Scalar> = thetas.iter().map(|&t| unit(t)).collect();
            let b = BasicFunction::new(p, alpha.clone()).unwrap();
            let r = basic_zeta_check(&b, &MultChar::trivial(p), 12).unwrap();
            prop_assert!(r.max_coeff_diff < 1e-10);
            let f = basic_fourier_check(&b, 1, 12).unwrap();
            prop_assert!(f.max_coeff_diff < 1e-10);
            let mut rev = alpha;
            rev.reverse();
            let r2 = basic_zeta_check(&BasicFunction::new(p, rev).unwrap(), &MultChar::trivial(p), 12).unwrap();
            prop_assert!(r.computed.cross_diff(&r2.computed) < 1e-10);
        }
    }
}
