use std::f64::consts::TAU;

use localgamma::characters::{MultChar, UnitChar};
use localgamma::corpus;
use localgamma::functions::MultStepFunction;
use localgamma::kernel::{hankel_both, hankel_convolve, homogeneous_identity_check, Gl1Kernel};
use localgamma::numerics::c;
use localgamma::Scalar;
use proptest::prelude::*;
use rand::Rng;

fn value(rows: &[localgamma::kernel::ShellRow], m: i32) -> Scalar {
    rows.iter().find(|r| r.m == m && r.u == 1).unwrap().value()
}

#[test]
fn unit_indicator_under_an_unramified_kernel() {
    for p in [2u64, 3, 5, 7] {
        let t = Scalar::from_polar(1.0, 1.1);
        let k = Gl1Kernel::new(MultChar::unramified(p, t).unwrap());
        let phi = MultStepFunction::indicator(p, 0, 1, 0);
        let rows = hankel_convolve(&phi, &k, -4, 4).unwrap();
        let q = p as f64;
        for m in -4..=4 {
            // |x|^{1/2} t^{-m} (1_{Z_p} - q^{-1} 1_{p^{-1} Z_p})
            let ind = if m >= 0 { 1.0 - 1.0 / q } else if m == -1 { -1.0 / q } else { 0.0 };
            let want = q.powf(-m as f64 / 2.0) * t.powi(-m) * ind;
            assert!((value(&rows, m) - want).norm() < 1e-13, "p={p} m={m}");
        }
    }
}

#[test]
fn unit_indicator_under_a_ramified_kernel() {
    for p in [3u64, 5, 7] {
        let w = UnitChar::all_at_level(p, 1).into_iter().find(|w| !w.is_trivial()).unwrap();
        let t = c(0.6, -0.8);
        let k = Gl1Kernel::new(MultChar::new(w.clone(), t).unwrap());
        let phi = MultStepFunction::indicator(p, 0, 1, 0);
        let rows = hankel_convolve(&phi, &k, -3, 3).unwrap();
        let q = p as f64;
        // only S_{-1} survives: q^{1/2} t q^{-1} sum_u e(u/p) omega^{-1}(u)
        let gauss: Scalar = (1..p).map(|u| Scalar::from_polar(1.0, TAU * u as f64 / q) * w.eval_residue(u).conj()).sum();
        for m in -3..=3 {
            let want = if m == -1 { q.sqrt() * t / q * gauss } else { Scalar::default() };
            assert!((value(&rows, m) - want).norm() < 1e-13, "p={p} m={m}");
        }
    }
}

#[test]
fn routes_agree_with_ramified_representations() {
    let mut r = corpus::rng(77);
    for p in [3u64, 5] {
        for _ in 0..6 {
            let level = r.gen_range(0..=2);
            let phi = corpus::mult_function(&mut r, p, level);
            let chi_pi = corpus::mult_char(&mut r, p, 2);
            let rep = hankel_both(&phi, &chi_pi, -5, 5).unwrap();
            assert!(rep.max_abs_diff < 1e-9, "{}", rep.max_abs_diff);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn convolution_is_linear(seed in any::<u64>(), p in prop::sample::select(vec![2u64, 3, 5])) {
        let mut r = corpus::rng(seed);
        let level = r.gen_range(0..=1);
        let f = corpus::mult_function(&mut r, p, level);
        let g = corpus::mult_function(&mut r, p, level);
        let k = Gl1Kernel::new(corpus::mult_char(&mut r, p, 1));
        let a = c(0.3, -1.2);
        let lhs = hankel_convolve(&f.scale(a).add(&g).unwrap(), &k, -3, 3).unwrap();
        let fr = hankel_convolve(&f, &k, -3, 3).unwrap();
        let gr = hankel_convolve(&g, &k, -3, 3).unwrap();
        for ((x, y), z) in lhs.iter().zip(&fr).zip(&gr) {
            prop_assert!((x.value() - (a * y.value() + z.value())).norm() < 1e-11);
        }
    }

    #[test]
    fn routes_agree(seed in any::<u64>(), p in prop::sample::select(vec![2u64, 3, 5, 7])) {
        let mut r = corpus::rng(seed);
        let level = r.gen_range(0..=1);
        let phi = corpus::mult_function(&mut r, p, level);
        let chi_pi = corpus::mult_char(&mut r, p, 1);
        prop_assert!(hankel_both(&phi, &chi_pi, -4, 4).unwrap().max_abs_diff < 1e-9);
    }

    #[test]
    fn homogeneous_identity(seed in any::<u64>(), p in prop::sample::select(vec![2u64, 3, 5, 7])) {
        let mut r = corpus::rng(seed);
        let chi = corpus::mult_char(&mut r, p, 2);
        let chi_pi = corpus::mult_char(&mut r, p, 1);
        let phi0 = corpus::mult_function(&mut r, p, 1);
        prop_assert!(homogeneous_identity_check(&chi, &chi_pi, &phi0).unwrap().max_coeff_diff < 1e-9);
    }
}
