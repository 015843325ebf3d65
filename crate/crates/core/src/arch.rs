//! Archimedean gamma factors, Tate integrals of polynomial-times-Gaussian seeds by
//! quadrature, and functional-equation checks over `R` and `C`.
//!
//! Additive characters: `psi(x) = e^{2 pi i x}` on `R`, `psi(z) = e^{2 pi i 2Re(z)}` on `C`,
//! with self-dual measures `dx` and `2 dx dy`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{c, Scalar};

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Complex Gamma function (Lanczos approximation, reflection on the left half-plane).
pub fn gamma(z: Scalar) -> Scalar {
    if z.re < 0.5 {
        return c(PI, 0.0) / ((z * PI).sin() * gamma(1.0 - z));
    }
    let z = z - 1.0;
    let mut x = c(LANCZOS[0], 0.0);
    for (i, &coef) in LANCZOS.iter().enumerate().skip(1) {
        x += coef / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * t.powc(z + 0.5) * (-t).exp() * x
}

/// `Gamma_R(s) = pi^{-s/2} Gamma(s/2)`.
pub fn gamma_r(s: Scalar) -> Scalar {
    c(PI, 0.0).powc(-s / 2.0) * gamma(s / 2.0)
}

/// `Gamma_C(s) = 2 (2 pi)^{-s} Gamma(s)`.
pub fn gamma_c(s: Scalar) -> Scalar {
    2.0 * c(2.0 * PI, 0.0).powc(-s) * gamma(s)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Place {
    Real,
    Complex,
}

/// `sgn(x)^eps |x|^{it}` on `R^x`, or `(z/|z|)^eps |z|_C^{it}` on `C^x`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArchChar {
    pub place: Place,
    #[serde(default)]
    pub eps: i64,
    #[serde(default)]
    pub t: f64,
}

impl ArchChar {
    pub fn new(place: Place, eps: i64, t: f64) -> Result<Self> {
        if !t.is_finite() {
            return Err(Error::NonFinite("character exponent"));
        }
        let eps = match place {
            Place::Real => eps.rem_euclid(2),
            Place::Complex => eps,
        };
        Ok(ArchChar { place, eps, t })
    }

    pub fn trivial(place: Place) -> Self {
        ArchChar { place, eps: 0, t: 0.0 }
    }

    pub fn inverse(&self) -> Self {
        let eps = match self.place {
            Place::Real => self.eps,
            Place::Complex => -self.eps,
        };
        ArchChar { place: self.place, eps, t: -self.t }
    }

    /// `chi(-1)`.
    pub fn sign(&self) -> f64 {
        if self.eps.rem_euclid(2) == 0 {
            1.0
        } else {
            -1.0
        }
    }
}

fn near_pole(z: Scalar, tol: f64) -> bool {
    // poles of Gamma at 0, -1, -2, ...
    z.re < tol && (z.re - z.re.round()).abs() < tol && z.im.abs() < tol
}

/// `gamma(s, chi, psi) = eps(s, chi, psi) L(1 - s, chi^{-1}) / L(s, chi)`.
pub fn arch_gamma(chi: &ArchChar, s: Scalar, pole_tol: f64) -> Result<Scalar> {
    arch_gamma_with(chi, s, false, pole_tol)
}

/// As `arch_gamma`, for `psi^{-1}` when `inverse_psi` is set.
pub fn arch_gamma_with(chi: &ArchChar, s: Scalar, inverse_psi: bool, pole_tol: f64) -> Result<Scalar> {
    let it = c(0.0, chi.t);
    let (num_arg, den_arg, eps, half) = match chi.place {
        Place::Real => {
            let e = chi.eps as f64;
            (1.0 - s - it + e, s + it + e, c(0.0, 1.0).powi(chi.eps as i32), 2.0)
        }
        Place::Complex => {
            let n = chi.eps.abs() as f64 / 2.0;
            (1.0 - s - it + n, s + it + n, c(0.0, 1.0).powi(chi.eps.unsigned_abs() as i32), 1.0)
        }
    };
    if near_pole(num_arg / half, pole_tol) {
        return Err(Error::PoleProximity(format!("L(1 - s) at s = {s}"), pole_tol));
    }
    if near_pole(den_arg / half, pole_tol) {
        return Ok(Scalar::default());
    }
    let ratio = match chi.place {
        Place::Real => gamma_r(num_arg) / gamma_r(den_arg),
        Place::Complex => gamma_c(num_arg) / gamma_c(den_arg),
    };
    let sign = if inverse_psi { chi.sign() } else { 1.0 };
    Ok(eps * ratio * sign)
}

/// Polynomial times Gaussian: `P(x) e^{-pi x^2}` on `R`, or
/// `sum c_jk z^j zbar^k e^{-2 pi |z|^2}` on `C`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "place", rename_all = "snake_case")]
pub enum Seed {
    Real { poly: Vec<Scalar> },
    Complex { terms: Vec<(u32, u32, Scalar)> },
}

impl Seed {
    pub fn gaussian(place: Place) -> Self {
        match place {
            Place::Real => Seed::Real { poly: vec![c(1.0, 0.0)] },
            Place::Complex => Seed::Complex { terms: vec![(0, 0, c(1.0, 0.0))] },
        }
    }

    /// `x e^{-pi x^2}`.
    pub fn hermite1() -> Self {
        Seed::Real { poly: vec![c(0.0, 0.0), c(1.0, 0.0)] }
    }

    pub fn place(&self) -> Place {
        match self {
            Seed::Real { .. } => Place::Real,
            Seed::Complex { .. } => Place::Complex,
        }
    }

    pub fn eval(&self, x: Scalar) -> Scalar {
        match self {
            Seed::Real { poly } => {
                let p = poly.iter().rev().fold(Scalar::default(), |acc, &a| acc * x.re + a);
                p * (-PI * x.re * x.re).exp()
            }
            Seed::Complex { terms } => {
                let s: Scalar = terms.iter().map(|&(j, k, a)| a * x.powi(j as i32) * x.conj().powi(k as i32)).sum();
                s * (-2.0 * PI * x.norm_sqr()).exp()
            }
        }
    }

    /// Fourier transform against `psi(xy)` with the self-dual measure.
    pub fn fourier(&self) -> Seed {
        match self {
            Seed::Real { poly } => {
                // F(x^k G) = (2 pi i)^{-k} d^k/dy^k G, G = e^{-pi y^2}
                let mut out: Vec<Scalar> = Vec::new();
                let mut d: Vec<Scalar> = vec![c(1.0, 0.0)];
                let mut factor = c(1.0, 0.0);
                for &a in poly {
                    if out.len() < d.len() {
                        out.resize(d.len(), Scalar::default());
                    }
                    for (i, &v) in d.iter().enumerate() {
                        out[i] += a * factor * v;
                    }
                    d = real_d(&d);
                    factor /= c(0.0, 2.0 * PI);
                }
                Seed::Real { poly: out }
            }
            Seed::Complex { terms } => {
                let mut out: BTreeMap<(u32, u32), Scalar> = BTreeMap::new();
                for &(j, k, a) in terms {
                    let mut pw: BTreeMap<(u32, u32), Scalar> = BTreeMap::from([((0, 0), c(1.0, 0.0))]);
                    for _ in 0..j {
                        pw = complex_d(&pw, false);
                    }
                    for _ in 0..k {
                        pw = complex_d(&pw, true);
                    }
                    let factor = c(0.0, 2.0 * PI).powi(-((j + k) as i32));
                    for (key, v) in pw {
                        *out.entry(key).or_default() += a * factor * v;
                    }
                }
                Seed::Complex { terms: out.into_iter().filter(|(_, v)| v.norm() > 0.0).map(|((j, k), v)| (j, k, v)).collect() }
            }
        }
    }
}

/// `P -> P' - 2 pi x P`: the derivative of `P(x) e^{-pi x^2}`.
fn real_d(p: &[Scalar]) -> Vec<Scalar> {
    let mut out = vec![Scalar::default(); p.len() + 1];
    for (k, &a) in p.iter().enumerate() {
        if k > 0 {
            out[k - 1] += a * k as f64;
        }
        out[k + 1] -= a * 2.0 * PI;
    }
    out
}

/// Derivative of `P(w, wbar) e^{-2 pi w wbar}` in `w` (or in `wbar`).
fn complex_d(p: &BTreeMap<(u32, u32), Scalar>, bar: bool) -> BTreeMap<(u32, u32), Scalar> {
    let mut out: BTreeMap<(u32, u32), Scalar> = BTreeMap::new();
    for (&(j, k), &a) in p {
        let own = if bar { k } else { j };
        if own > 0 {
            let key = if bar { (j, k - 1) } else { (j - 1, k) };
            *out.entry(key).or_default() += a * own as f64;
        }
        let key = if bar { (j + 1, k) } else { (j, k + 1) };
        *out.entry(key).or_default() -= a * 2.0 * PI;
    }
    out
}

/// `int_0^infty r^{a-1} e^{-beta r^2} dr` by double-exponential quadrature.
fn radial_integral(a: Scalar, beta: f64, tol: f64) -> Result<Scalar> {
    if a.re <= 0.0 {
        return Err(Error::NonConvergent(format!("radial exponent {a} has nonpositive real part")));
    }
    let f = |r: f64| -> Scalar {
        if r <= 0.0 {
            return Scalar::default();
        }
        (c(r.ln(), 0.0) * (a - 1.0)).exp() * (-beta * r * r).exp()
    };
    let upper = ((60.0 + 2.0 * a.re.max(0.0) * (1.0 + a.re.max(1.0).ln())) / beta).sqrt();
    // on [0, 1] subtract the singular part: int_0^1 r^{a-1} dr = 1/a
    let near = |r: f64| -> Scalar {
        if r <= 0.0 {
            return Scalar::default();
        }
        (c(r.ln(), 0.0) * (a - 1.0)).exp() * (-beta * r * r).exp_m1()
    };
    let mut total = a.inv();
    let mut err = 0.0;
    for (lo, hi, part) in [(0.0, 1.0, 0), (1.0, upper, 1)] {
        let re = quadrature::integrate(|x| if part == 0 { near(x).re } else { f(x).re }, lo, hi, tol / 4.0);
        let im = quadrature::integrate(|x| if part == 0 { near(x).im } else { f(x).im }, lo, hi, tol / 4.0);
        total += c(re.integral, im.integral);
        err += re.error_estimate + im.error_estimate;
    }
    if err.is_nan() || err > tol || !total.is_finite() {
        return Err(Error::QuadratureFailure(err));
    }
    Ok(total)
}

/// `Z(s, |x|^{1/2} g, chi) = int g(x) chi(x) |x|^s d^x x` for a seed `g`.
pub fn arch_zeta(seed: &Seed, chi: &ArchChar, s: Scalar, tol: f64) -> Result<Scalar> {
    if seed.place() != chi.place {
        return Err(Error::InvalidFunction("seed and character live on different places".into()));
    }
    let s1 = s + c(0.0, chi.t);
    match seed {
        Seed::Real { poly } => {
            // x and -x together: (1 + (-1)^{k + eps}) int_0^infty x^{k + s - 1} e^{-pi x^2} dx
            let mut acc = Scalar::default();
            for (k, &a) in poly.iter().enumerate() {
                if a.norm() == 0.0 || (k as i64 + chi.eps) % 2 != 0 {
                    continue;
                }
                acc += 2.0 * a * radial_integral(s1 + k as f64, PI, tol / poly.len() as f64)?;
            }
            Ok(acc)
        }
        Seed::Complex { terms } => {
            // polar coordinates: the angular integral keeps j - k = -eps
            let mut acc = Scalar::default();
            for &(j, k, a) in terms {
                if a.norm() == 0.0 || j as i64 - k as i64 != -chi.eps {
                    continue;
                }
                let r = radial_integral(2.0 * s1 + (j + k) as f64, 2.0 * PI, tol / (4.0 * PI * terms.len() as f64))?;
                acc += 4.0 * PI * a * r;
            }
            Ok(acc)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArchFeRow {
    pub s: Scalar,
    pub lhs: Scalar,
    pub rhs: Scalar,
    pub abs_diff: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArchFeReport {
    pub rows: Vec<ArchFeRow>,
    pub max_abs_diff: f64,
}

/// `Z(1 - s, F f, chi^{-1})` against `gamma(s, chi, psi) Z(s, f, chi)` at each sample.
pub fn arch_fe_check(seed: &Seed, chi: &ArchChar, samples: &[Scalar], quad_tol: f64, pole_tol: f64) -> Result<ArchFeReport> {
    let dual = seed.fourier();
    let rows = samples
        .iter()
        .map(|&s| {
            let lhs = arch_zeta(&dual, &chi.inverse(), 1.0 - s, quad_tol)?;
            let rhs = arch_gamma(chi, s, pole_tol)? * arch_zeta(seed, chi, s, quad_tol)?;
            Ok(ArchFeRow { s, lhs, rhs, abs_diff: (lhs - rhs).norm() })
        })
        .collect::<Result<Vec<_>>>()?;
    let max_abs_diff = rows.iter().map(|r| r.abs_diff).fold(0.0, f64::max);
    Ok(ArchFeReport { rows, max_abs_diff })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const TOL: f64 = 1e-10;

    #[test]
    fn gamma_values() {
        assert!((gamma(c(5.0, 0.0)) - c(24.0, 0.0)).norm() < 1e-12);
        assert!((gamma(c(0.5, 0.0)) - c(PI.sqrt(), 0.0)).norm() < 1e-14);
        assert!((gamma(c(-0.5, 0.0)) - c(-2.0 * PI.sqrt(), 0.0)).norm() < 1e-13);
        // |Gamma(1/2 + iy)|^2 = pi / cosh(pi y)
        let y = 1.3;
        assert!((gamma(c(0.5, y)).norm_sqr() - PI / (PI * y).cosh()).abs() < 1e-14);
        assert!((gamma_r(c(1.0, 0.0)) - c(1.0, 0.0)).norm() < 1e-14);
        assert!((gamma_c(c(1.0, 0.0)) - c(1.0 / PI, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn gamma_functional_relation() {
        for z in [c(0.3, 0.4), c(2.7, -1.1), c(-1.6, 0.2)] {
            assert!((gamma(z + 1.0) - z * gamma(z)).norm() < 1e-12 * gamma(z + 1.0).norm().max(1.0));
        }
    }

    #[test]
    fn real_trivial_center() {
        let g = arch_gamma(&ArchChar::trivial(Place::Real), c(0.5, 0.0), 1e-8).unwrap();
        assert!((g - c(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn complex_trivial_formula() {
        let s = c(0.3, 0.9);
        let g = arch_gamma(&ArchChar::trivial(Place::Complex), s, 1e-8).unwrap();
        assert!((g - gamma_c(1.0 - s) / gamma_c(s)).norm() < 1e-14);
    }

    #[test]
    fn unitarity_samples() {
        for chi in [
            ArchChar::new(Place::Real, 0, 0.0).unwrap(),
            ArchChar::new(Place::Real, 1, 0.7).unwrap(),
            ArchChar::new(Place::Complex, -2, 0.4).unwrap(),
        ] {
            for t in [0.3, 1.7, 5.0] {
                let g = arch_gamma(&chi, c(0.5, t), 1e-8).unwrap();
                assert!((g.norm() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn pole_is_flagged() {
        // L(1 - s) for trivial real chi has a pole at 1 - s = 0
        let r = arch_gamma(&ArchChar::trivial(Place::Real), c(1.0 + 1e-10, 0.0), 1e-8);
        assert!(matches!(r, Err(Error::PoleProximity(_, _))));
        let z = arch_gamma(&ArchChar::trivial(Place::Real), c(-2.0, 0.0), 1e-8).unwrap();
        assert_eq!(z, Scalar::default());
    }

    #[test]
    fn gaussian_zeta_is_gamma_r() {
        let chi = ArchChar::trivial(Place::Real);
        for s in [c(0.5, 0.0), c(1.0, 0.0), c(1.5, 0.7), c(0.2, -2.0)] {
            let z = arch_zeta(&Seed::gaussian(Place::Real), &chi, s, 1e-10).unwrap();
            assert!((z - gamma_r(s)).norm() < 1e-9, "{s} {z}");
        }
        let z = arch_zeta(&Seed::gaussian(Place::Real), &chi, c(1.0, 0.0), 1e-10).unwrap();
        assert!((z - c(1.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn hermite_zeta_with_sign() {
        let chi = ArchChar::new(Place::Real, 1, 0.0).unwrap();
        let s = c(0.8, 0.3);
        let z = arch_zeta(&Seed::hermite1(), &chi, s, 1e-10).unwrap();
        assert!((z - gamma_r(s + 1.0)).norm() < 1e-9);
        // odd seed against the trivial character vanishes
        let z0 = arch_zeta(&Seed::hermite1(), &ArchChar::trivial(Place::Real), s, 1e-10).unwrap();
        assert_eq!(z0, Scalar::default());
    }

    #[test]
    fn complex_gaussian_zeta() {
        let s = c(0.7, 0.2);
        let z = arch_zeta(&Seed::gaussian(Place::Complex), &ArchChar::trivial(Place::Complex), s, 1e-10).unwrap();
        assert!((z - PI * gamma_c(s)).norm() < 1e-9);
    }

    #[test]
    fn nonconvergent_region() {
        let r = arch_zeta(&Seed::gaussian(Place::Real), &ArchChar::trivial(Place::Real), c(-0.5, 0.0), 1e-8);
        assert!(matches!(r, Err(Error::NonConvergent(_))));
    }

    #[test]
    fn fourier_of_seeds() {
        assert_eq!(Seed::gaussian(Place::Real).fourier(), Seed::gaussian(Place::Real));
        match Seed::hermite1().fourier() {
            Seed::Real { poly } => {
                assert!(poly[0].norm() < 1e-15);
                assert!((poly[1] - c(0.0, 1.0)).norm() < 1e-15);
            }
            _ => unreachable!(),
        }
        match (Seed::Complex { terms: vec![(1, 0, c(1.0, 0.0))] }).fourier() {
            Seed::Complex { terms } => {
                assert_eq!(terms.len(), 1);
                assert_eq!((terms[0].0, terms[0].1), (0, 1));
                assert!((terms[0].2 - c(0.0, 1.0)).norm() < 1e-15);
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn fourier_by_direct_integration() {
        // F f(y) = int f(x) e^{2 pi i x y} dx on a fine grid
        let seed = Seed::Real { poly: vec![c(0.5, 0.0), c(-1.0, 0.3), c(0.2, 0.0), c(0.0, 0.7)] };
        let dual = seed.fourier();
        for y in [-0.7, 0.0, 0.4, 1.3] {
            let h = 1e-3;
            let mut acc = Scalar::default();
            let mut x = -8.0;
            while x <= 8.0 {
                acc += seed.eval(c(x, 0.0)) * Scalar::from_polar(1.0, 2.0 * PI * x * y) * h;
                x += h;
            }
            assert!((acc - dual.eval(c(y, 0.0))).norm() < 1e-9, "{y}");
        }
    }

    #[test]
    fn fe_examples() {
        let samples = [c(0.3, 0.0), c(0.5, 0.0), c(0.8, 0.0)];
        let r = arch_fe_check(&Seed::gaussian(Place::Real), &ArchChar::trivial(Place::Real), &samples, TOL, 1e-8).unwrap();
        assert!(r.max_abs_diff < 1e-8, "{r:?}");
        let sign = ArchChar::new(Place::Real, 1, 0.0).unwrap();
        let r = arch_fe_check(&Seed::hermite1(), &sign, &samples, TOL, 1e-8).unwrap();
        assert!(r.max_abs_diff < 1e-8, "{r:?}");
        let r = arch_fe_check(&Seed::gaussian(Place::Complex), &ArchChar::trivial(Place::Complex), &samples, TOL, 1e-8).unwrap();
        assert!(r.max_abs_diff < 1e-8, "{r:?}");
    }

    #[test]
    fn fe_complex_frequency() {
        let chi = ArchChar::new(Place::Complex, 2, 0.3).unwrap();
        let seed = Seed::Complex { terms: vec![(0, 2, c(1.0, 0.0)), (1, 3, c(0.4, -0.2))] };
        let r = arch_fe_check(&seed, &chi, &[c(0.4, 0.1), c(0.6, -0.5)], TOL, 1e-8).unwrap();
        assert!(r.max_abs_diff < 1e-8, "{r:?}");
    }

    proptest! {
        #[test]
        fn duality(re in 0.1f64..0.9, im in -3.0f64..3.0, eps in 0i64..2, t in -2.0f64..2.0, complex in any::<bool>()) {
            let place = if complex { Place::Complex } else { Place::Real };
            let eps = if complex { eps * 3 - 1 } else { eps };
            let chi = ArchChar::new(place, eps, t).unwrap();
            let s = c(re, im);
            let g1 = arch_gamma(&chi, s, 1e-8).unwrap();
            let g2 = arch_gamma_with(&chi.inverse(), 1.0 - s, true, 1e-8).unwrap();
            prop_assert!((g1 * g2 - c(1.0, 0.0)).norm() < 1e-9);
        }

        #[test]
        fn unitary_on_critical_line(t in -20.0f64..20.0, eps in 0i64..4, tc in -3.0f64..3.0) {
            for place in [Place::Real, Place::Complex] {
                let chi = ArchChar::new(place, eps, tc).unwrap();
                let g = arch_gamma(&chi, c(0.5, t), 1e-8).unwrap();
                prop_assert!((g.norm() - 1.0).abs() < 1e-9);
            }
        }

        #[test]
        fn fourier_is_order_four(coeffs in proptest::collection::vec(-1.0f64..1.0, 1..5)) {
            // F^2 f(x) = f(-x)
            let seed = Seed::Real { poly: coeffs.iter().map(|&a| c(a, 0.0)).collect() };
            let twice = seed.fourier().fourier();
            for x in [-0.9, 0.2, 1.1] {
                prop_assert!((twice.eval(c(x, 0.0)) - seed.eval(c(-x, 0.0))).norm() < 1e-10);
            }
        }
    }
}
