use std::f64::consts::TAU;

use localgamma::characters::UnitChar;
use localgamma::corpus;
use localgamma::functions::{MultStepFunction, StepFunction};
use localgamma::numerics::c;
use localgamma::padic::QpRational;
use localgamma::Scalar;
use proptest::prelude::*;
use rand::Rng;

/// `exp(2 pi i frac_p(x))` computed from the numerator and denominator.
fn psi(x: &QpRational) -> Scalar {
    let m = (x.p() as i128).pow(x.den_exp());
    Scalar::from_polar(1.0, TAU * x.num().rem_euclid(m) as f64 / m as f64)
}

/// `int f(x) psi(x y) dx` as a sum over cosets of `p^hi` inside `p^lo Z_p`.
fn fourier_oracle(f: &StepFunction, y: &QpRational) -> Scalar {
    let p = f.p();
    let (lo, hi) = f.grid_bounds();
    if y.valuation().is_some_and(|v| v < -hi) {
        return Scalar::default();
    }
    let n = (p as i128).pow((hi - lo) as u32);
    (0..n)
        .map(|j| {
            let x = QpRational::from_parts(p, j, lo);
            f.eval(&x) * psi(&x.mul(y))
        })
        .sum::<Scalar>()
        * (p as f64).powi(-hi)
}

#[test]
fn ball_indicators_transform_to_balls() {
    for p in [2u64, 3, 5] {
        for n in -2..=2 {
            let f = StepFunction::ball_indicator(p, n).fourier_transform(false);
            let want = StepFunction::ball_indicator(p, -n).scale(c((p as f64).powi(-n), 0.0));
            assert!(f.max_diff(&want).unwrap() < 1e-14);
        }
    }
}

#[test]
fn characters_are_orthogonal() {
    for (p, a) in [(2u64, 3u32), (3, 2), (5, 2), (7, 1)] {
        let chars = UnitChar::all_at_level(p, a);
        let modulus = p.pow(a);
        let units: Vec<u64> = (1..modulus).filter(|u| u % p != 0).collect();
        assert_eq!(chars.len(), units.len());
        for (i, x) in chars.iter().enumerate() {
            for y in &chars[i..] {
                let s: Scalar = units.iter().map(|&u| x.eval_residue(u) * y.eval_residue(u).conj()).sum();
                let want = if x == y { units.len() as f64 } else { 0.0 };
                assert!((s - want).norm() < 1e-10);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn fourier_matches_direct_sum(seed in any::<u64>(), p in prop::sample::select(vec![2u64, 3, 5]), yn in -40i128..40, ye in 0u32..4) {
        let mut r = corpus::rng(seed);
        let f = corpus::step_function(&mut r, p);
        let y = QpRational::new(p, yn, ye);
        let got = f.fourier_transform(false).eval(&y);
        prop_assert!((got - fourier_oracle(&f, &y)).norm() < 1e-12);
    }

    #[test]
    fn involution_and_plancherel(seed in any::<u64>(), p in prop::sample::select(vec![2u64, 3, 5, 7])) {
        let mut r = corpus::rng(seed);
        let f = corpus::step_function(&mut r, p);
        let fhat = f.fourier_transform(false);
        prop_assert!(fhat.fourier_transform(true).max_diff(&f).unwrap() < 1e-12);
        let (a, b) = (f.l2_norm_sq().unwrap(), fhat.l2_norm_sq().unwrap());
        prop_assert!((a - b).abs() < 1e-12 * a.max(1.0));
    }

    #[test]
    fn mellin_inversion_round_trip(seed in any::<u64>(), p in prop::sample::select(vec![2u64, 3, 5])) {
        let mut r = corpus::rng(seed);
        let level = r.gen_range(0..=2);
        let f = corpus::mult_function(&mut r, p, level);
        let back = MultStepFunction::mellin_invert(&f.mellin(), -3, 3, level).unwrap();
        prop_assert!(back.max_diff(&f).unwrap() < 1e-12);
    }
}
