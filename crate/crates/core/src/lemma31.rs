//! Exact averages of `psi(tr(g h))` over the congruence subgroup
//! `H = {h in SL_n(Z_p) : h = 1 mod p^l0}`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{root_of_unity, Scalar};
use crate::padic::{check_prime, ipow, QpRational};

/// Largest number of group elements enumerated by default.
pub const MAX_ENUMERATION: u128 = 1 << 24;

pub type Matrix = Vec<Vec<QpRational>>;

fn check_square(g: &Matrix) -> Result<usize> {
    let n = g.len();
    if n < 2 || g.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidElement(format!("expected a square matrix of size >= 2, got {n} rows")));
    }
    Ok(n)
}

/// Exact determinant by cofactor expansion.
pub fn det(g: &Matrix) -> QpRational {
    let n = g.len();
    let p = g[0][0].p();
    if n == 1 {
        return g[0][0];
    }
    let mut acc = QpRational::zero(p);
    for j in 0..n {
        if g[0][j].is_zero() {
            continue;
        }
        let minor: Matrix = g[1..].iter().map(|r| r.iter().enumerate().filter(|&(c, _)| c != j).map(|(_, x)| *x).collect()).collect();
        let term = g[0][j].mul(&det(&minor));
        acc = if j % 2 == 0 { acc.add(&term) } else { acc.sub(&term) };
    }
    acc
}

pub fn mat_mul(a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.len();
    let p = a[0][0].p();
    (0..n)
        .map(|i| (0..n).map(|j| (0..n).fold(QpRational::zero(p), |s, k| s.add(&a[i][k].mul(&b[k][j])))).collect())
        .collect()
}

pub fn diag(p: u64, d: &[QpRational]) -> Matrix {
    let n = d.len();
    (0..n).map(|i| (0..n).map(|j| if i == j { d[i] } else { QpRational::zero(p) }).collect()).collect()
}

/// Permutation matrix `k` with `k[sigma(i)][i] = 1`.
pub fn permutation(p: u64, sigma: &[usize]) -> Matrix {
    let n = sigma.len();
    let mut k = vec![vec![QpRational::zero(p); n]; n];
    for (i, &s) in sigma.iter().enumerate() {
        k[s][i] = QpRational::from_int(p, 1);
    }
    k
}

/// Unipotent upper triangular matrix with every entry above the diagonal equal to
/// `a`, and its inverse.
fn unipotent(p: u64, n: usize, a: i128) -> (Matrix, Matrix) {
    let mut u = diag(p, &vec![QpRational::from_int(p, 1); n]);
    for (i, row) in u.iter_mut().enumerate() {
        for x in &mut row[i + 1..] {
            *x = QpRational::from_int(p, a);
        }
    }
    // inverse of I + N is the finite series sum (-N)^k
    let mut neg_n = u.clone();
    for (i, row) in neg_n.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            *x = if i == j { QpRational::zero(p) } else { x.neg() };
        }
    }
    let mut inv = diag(p, &vec![QpRational::from_int(p, 1); n]);
    let mut pow = neg_n.clone();
    for _ in 1..n {
        for i in 0..n {
            for j in 0..n {
                inv[i][j] = inv[i][j].add(&pow[i][j]);
            }
        }
        pow = mat_mul(&pow, &neg_n);
    }
    (u, inv)
}

fn transpose(a: &Matrix) -> Matrix {
    let n = a.len();
    (0..n).map(|i| (0..n).map(|j| a[j][i]).collect()).collect()
}

/// Valuations of the extreme elementary divisors: `(v(t_1), v(t_n))`.
pub fn extreme_divisors(g: &Matrix) -> Result<(i32, i32)> {
    let n = check_square(g)?;
    let v_det = det(g).valuation().ok_or(Error::NotInvertible)?;
    let v1 = g.iter().flatten().filter_map(|x| x.valuation()).min().ok_or(Error::NotInvertible)?;
    let mut vm = i32::MAX;
    for r in 0..n {
        for c in 0..n {
            let minor: Matrix = g
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != r)
                .map(|(_, row)| row.iter().enumerate().filter(|&(j, _)| j != c).map(|(_, x)| *x).collect())
                .collect();
            if let Some(v) = det(&minor).valuation() {
                vm = vm.min(v);
            }
        }
    }
    Ok((v1, v_det - vm))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceAverage {
    pub n: usize,
    pub p: u64,
    pub l0: u32,
    pub big_l: u32,
    /// Exponent of the common denominator of `g`.
    pub d: u32,
    pub group_size: u128,
    pub value: Scalar,
}

fn mod_det(h: &[Vec<i128>], m: i128) -> i128 {
    let n = h.len();
    match n {
        1 => h[0][0].rem_euclid(m),
        2 => (h[0][0] * h[1][1] - h[0][1] * h[1][0]).rem_euclid(m),
        _ => {
            let mut acc = 0i128;
            for j in 0..n {
                if h[0][j] == 0 {
                    continue;
                }
                let minor: Vec<Vec<i128>> = h[1..].iter().map(|r| r.iter().enumerate().filter(|&(c, _)| c != j).map(|(_, x)| *x).collect()).collect();
                let t = h[0][j] * mod_det(&minor, m) % m;
                acc = if j % 2 == 0 { acc + t } else { acc - t };
            }
            acc.rem_euclid(m)
        }
    }
}

fn inv_mod(a: i128, m: i128) -> Option<i128> {
    let (mut r0, mut r1, mut s0, mut s1) = (a.rem_euclid(m), m, 1i128, 0i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    (r0 == 1).then(|| s0.rem_euclid(m))
}

/// `int_H psi(tr(g h)) dh` for `H` the principal congruence subgroup of level `l0`
/// in `SL_n(Z_p)`, enumerated modulo `p^big_l`.
///
/// The integrand factors through `h mod p^d`, so `big_l >= l0 + d` makes the
/// finite average exact.
pub fn trace_average(p: u64, g: &Matrix, l0: u32, big_l: u32) -> Result<TraceAverage> {
    trace_average_capped(p, g, l0, big_l, MAX_ENUMERATION)
}

pub fn trace_average_capped(p: u64, g: &Matrix, l0: u32, big_l: u32, cap: u128) -> Result<TraceAverage> {
    check_prime(p)?;
    let n = check_square(g)?;
    if let Some(x) = g.iter().flatten().find(|x| x.p() != p) {
        return Err(Error::PrimeMismatch(x.p(), p));
    }
    if l0 == 0 {
        return Err(Error::PrecisionGuard("level l0 must be at least 1".into()));
    }
    if det(g).is_zero() {
        return Err(Error::NotInvertible);
    }
    let d = g.iter().flatten().map(|x| x.den_exp()).max().unwrap_or(0);
    if big_l < l0 + d {
        return Err(Error::PrecisionGuard(format!("L = {big_l} is below l0 + d = {}", l0 + d)));
    }
    let free = n * n - 1;
    let radix = ipow(p, big_l - l0);
    let total = radix.checked_pow(free as u32).filter(|&t| t <= cap).ok_or(Error::TooLarge(
        radix.saturating_pow(free as u32),
    ))?;
    let modulus = ipow(p, big_l) as i128;
    let step = ipow(p, l0) as i128;
    let pd = ipow(p, d) as i128;
    // g_ij * p^d as an integer mod p^d
    let gi: Vec<Vec<i128>> = g
        .iter()
        .map(|r| r.iter().map(|x| (x.num() * ipow(p, d - x.den_exp()) as i128).rem_euclid(pd)).collect())
        .collect();
    let radix = radix as i128;
    let chunk = 4096u128;
    let hist = (0..total.div_ceil(chunk))
        .into_par_iter()
        .map(|c| {
            let mut hist = vec![0u64; pd as usize];
            let mut h = vec![vec![0i128; n]; n];
            for idx in c * chunk..((c + 1) * chunk).min(total) {
                let mut rest = idx as i128;
                for pos in 0..free {
                    let (i, j) = (pos / n, pos % n);
                    let a = rest % radix;
                    rest /= radix;
                    h[i][j] = (if i == j { 1 } else { 0 }) + step * a;
                }
                h[n - 1][n - 1] = 0;
                let r0 = mod_det(&h, modulus);
                let minor: Vec<Vec<i128>> = h[..n - 1].iter().map(|r| r[..n - 1].to_vec()).collect();
                let cof = inv_mod(mod_det(&minor, modulus), modulus).expect("cofactor is a unit");
                h[n - 1][n - 1] = (1 - r0).rem_euclid(modulus) * cof % modulus;
                let mut tr = 0i128;
                for i in 0..n {
                    for j in 0..n {
                        tr = (tr + gi[i][j] * (h[j][i] % pd)) % pd;
                    }
                }
                hist[tr as usize] += 1;
            }
            hist
        })
        .reduce(
            || vec![0u64; pd as usize],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    let value: Scalar = hist
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(r, &c)| root_of_unity(r as i128, pd as u128) * (c as f64))
        .sum::<Scalar>()
        / total as f64;
    Ok(TraceAverage { n, p, l0, big_l, d, group_size: total, value })
}

/// One grid entry `g = k1 t k2` with `k = k2 k1` a permutation matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma31Case {
    pub label: String,
    pub p: u64,
    pub l0: u32,
    pub g: Matrix,
    /// `true` when the hypotheses predict a vanishing average.
    pub expect_zero: bool,
}

impl Lemma31Case {
    /// The smallest admissible enumeration modulus.
    pub fn big_l(&self) -> u32 {
        let d = self.g.iter().flatten().map(|x| x.den_exp()).max().unwrap_or(0);
        self.l0 + d.max(1)
    }
}

fn branch_of(sigma: &[usize]) -> &'static str {
    let n = sigma.len();
    if sigma[0] == 0 && sigma[n - 1] == n - 1 {
        "fixes-ends"
    } else if sigma[0] == n - 1 {
        "first-to-last"
    } else {
        "first-to-middle"
    }
}

fn build_case(p: u64, l0: u32, t_vals: &[(i128, i32)], sigma: &[usize], conj: i128, lower: bool) -> Lemma31Case {
    let n = sigma.len();
    let t = diag(p, &t_vals.iter().map(|&(u, e)| QpRational::from_parts(p, u, e)).collect::<Vec<_>>());
    let (mut u, mut u_inv) = unipotent(p, n, conj);
    if lower {
        u = transpose(&u);
        u_inv = transpose(&u_inv);
    }
    let k = permutation(p, sigma);
    // k1 = u, k2 = k u^{-1}, so k2 k1 = k
    let g = mat_mul(&mat_mul(&u, &t), &mat_mul(&k, &u_inv));
    let v1 = t_vals[0].1;
    let vn = t_vals[n - 1].1;
    Lemma31Case {
        label: format!("n={n} p={p} l0={l0} {} v(t1)={v1} v(tn)={vn} conj={conj}{}", branch_of(sigma), if lower { " lower" } else { "" }),
        p,
        l0,
        g,
        expect_zero: v1 < -(l0 as i32) && vn >= 0,
    }
}

/// The default grid: `n = 2` over `p in {2, 3}`, `l0 in {1, 2}` and both Weyl
/// elements, `n = 3` at `p = 2` covering all three permutation branches, and
/// boundary controls where the average does not vanish.
pub fn default_grid() -> Vec<Lemma31Case> {
    let mut out = Vec::new();
    for p in [2u64, 3] {
        for l0 in [1u32, 2] {
            let e = -(l0 as i32) - 1;
            for sigma in [[0usize, 1], [1, 0]] {
                out.push(build_case(p, l0, &[(1, e), (1, 0)], &sigma, 1, false));
                out.push(build_case(p, l0, &[(p as i128 - 1, e), (1, 1)], &sigma, 1, true));
            }
        }
    }
    for sigma in [[0usize, 1], [1, 0]] {
        out.push(build_case(3, 1, &[(2, -3), (1, 0)], &sigma, 2, false));
    }
    for sigma in [[0usize, 1, 2], [2, 1, 0], [1, 0, 2], [1, 2, 0]] {
        out.push(build_case(2, 1, &[(1, -2), (1, -1), (1, 0)], &sigma, 1, false));
    }
    // boundary: v(t1) = -l0 leaves a nonzero average
    out.push(build_case(3, 1, &[(1, -1), (1, 0)], &[0, 1], 1, false));
    out.push(build_case(2, 2, &[(1, -2), (1, 0)], &[1, 0], 1, false));
    out
}

/// The identity control: the average is exactly 1.
pub fn identity_case(p: u64, n: usize, l0: u32) -> Lemma31Case {
    Lemma31Case {
        label: format!("identity n={n} p={p} l0={l0}"),
        p,
        l0,
        g: diag(p, &vec![QpRational::from_int(p, 1); n]),
        expect_zero: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(p: u64, u: i128, e: i32) -> QpRational {
        QpRational::from_parts(p, u, e)
    }

    #[test]
    fn determinant() {
        let p = 5;
        let g = vec![vec![q(p, 1, -1), q(p, 2, 0)], vec![q(p, 3, 0), q(p, 4, 0)]];
        assert_eq!(det(&g), q(p, 4, -1).sub(&q(p, 6, 0)));
    }

    #[test]
    fn unipotent_inverse() {
        for n in 2..5 {
            let (u, ui) = unipotent(7, n, 3);
            assert_eq!(mat_mul(&u, &ui), diag(7, &vec![QpRational::from_int(7, 1); n]));
        }
    }

    #[test]
    fn identity_gives_one() {
        let c = identity_case(3, 2, 1);
        let r = trace_average(3, &c.g, 1, 2).unwrap();
        assert!((r.value - Scalar::new(1.0, 0.0)).norm() < 1e-14);
        assert_eq!(r.group_size, 3u128.pow(3));
    }

    #[test]
    fn group_size_counts_congruence_subgroup() {
        // [SL_2(Z/p^2) : ker] structure: |ker(SL_2(Z/p^3) -> SL_2(Z/p))| = p^{3 * 2}
        let c = identity_case(2, 2, 1);
        let r = trace_average(2, &c.g, 1, 3).unwrap();
        assert_eq!(r.group_size, 64);
    }

    #[test]
    fn diagonal_by_hand() {
        // psi(p^{-2} h11 + h22) over h11 = 1 mod p: vanishes
        let p = 3;
        let g = diag(p, &[q(p, 1, -2), q(p, 1, 0)]);
        let r = trace_average(p, &g, 1, 3).unwrap();
        assert!(r.value.norm() < 1e-12);
        // p^{-1}: h11 = 1 mod p gives psi(1/p)
        let g = diag(p, &[q(p, 1, -1), q(p, 1, 0)]);
        let r = trace_average(p, &g, 1, 2).unwrap();
        assert!((r.value - q(p, 1, -1).psi()).norm() < 1e-12);
    }

    #[test]
    fn guards() {
        let p = 3;
        let g = diag(p, &[q(p, 1, -3), q(p, 1, 0)]);
        assert!(matches!(trace_average(p, &g, 1, 3), Err(Error::PrecisionGuard(_))));
        let sing = vec![vec![q(p, 1, 0), q(p, 1, 0)], vec![q(p, 1, 0), q(p, 1, 0)]];
        assert!(matches!(trace_average(p, &sing, 1, 2), Err(Error::NotInvertible)));
        assert!(matches!(trace_average_capped(p, &g, 1, 6, 1000), Err(Error::TooLarge(_))));
        assert!(matches!(trace_average(p, &g, 0, 6), Err(Error::PrecisionGuard(_))));
    }

    #[test]
    fn divisors_of_grid_cases() {
        for c in default_grid() {
            let (v1, vn) = extreme_divisors(&c.g).unwrap();
            assert_eq!(c.expect_zero, v1 < -(c.l0 as i32) && vn >= 0, "{}", c.label);
        }
    }

    #[test]
    fn grid_matches_prediction() {
        let grid = default_grid();
        assert!(grid.len() >= 12);
        for c in grid {
            let r = trace_average(c.p, &c.g, c.l0, c.big_l()).unwrap();
            if c.expect_zero {
                assert!(r.value.norm() < 1e-10, "{} {}", c.label, r.value);
            } else {
                assert!(r.value.norm() > 1e-3, "{} {}", c.label, r.value);
            }
        }
    }

    proptest! {
        #[test]
        fn independent_of_modulus(a in 1i128..9, b in 0i128..9, c0 in 0i128..9) {
            // exact averages do not depend on how far past the guard we enumerate
            let p = 2;
            let g = vec![vec![q(p, a, -2), q(p, b, -1)], vec![q(p, c0, 0), q(p, 1, 0)]];
            prop_assume!(!det(&g).is_zero());
            let r1 = trace_average(p, &g, 1, 3).unwrap();
            let r2 = trace_average(p, &g, 1, 4).unwrap();
            prop_assert!((r1.value - r2.value).norm() < 1e-12);
        }

        #[test]
        fn conjugation_invariant(b in 0i128..4) {
            // H is normal in SL_2(Z_p), so conjugating g by an integral unipotent keeps the average
            let p = 2;
            let g = diag(p, &[q(p, 1, -1), q(p, 3, 0)]);
            let (u, ui) = unipotent(p, 2, b);
            let g2 = mat_mul(&mat_mul(&u, &g), &ui);
            let r1 = trace_average(p, &g, 1, 3).unwrap();
            let r2 = trace_average(p, &g2, 1, 3).unwrap();
            prop_assert!((r1.value - r2.value).norm() < 1e-12);
        }
    }
}
