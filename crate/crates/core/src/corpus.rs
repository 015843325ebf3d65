//! Reproducible pseudo-random corpora of characters, test functions and Satake lists.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::characters::{MultChar, UnitChar};
use crate::functions::{MultStepFunction, StepFunction, StepTerm};
use crate::numerics::{c, Scalar};
use crate::padic::{PAdicElt, QpRational};
use crate::zeta::TestFunction;

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_PRIMES: [u64; 4] = [2, 3, 5, 7];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn unitary<R: Rng>(rng: &mut R) -> Scalar {
    Scalar::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU))
}

fn coeff<R: Rng>(rng: &mut R) -> Scalar {
    c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0))
}

/// A uniformly chosen unit character of conductor at most `cond_max`.
pub fn unit_char<R: Rng>(rng: &mut R, p: u64, cond_max: u32) -> UnitChar {
    let all = UnitChar::all_at_level(p, cond_max);
    all[rng.gen_range(0..all.len())].clone()
}

/// A unitary character of conductor at most `cond_max`.
pub fn mult_char<R: Rng>(rng: &mut R, p: u64, cond_max: u32) -> MultChar {
    MultChar::new(unit_char(rng, p, cond_max), unitary(rng)).expect("unitary t")
}

pub fn step_function<R: Rng>(rng: &mut R, p: u64) -> StepFunction {
    let n = rng.gen_range(1..=4);
    let terms = (0..n)
        .map(|_| StepTerm {
            coeff: coeff(rng),
            twist: QpRational::new(p, rng.gen_range(-30..30), rng.gen_range(0..3)),
            center: QpRational::new(p, rng.gen_range(-30..30), rng.gen_range(0..2)),
            rad: rng.gen_range(-1..3),
        })
        .collect();
    StepFunction::new(p, terms).expect("same prime")
}

/// A function constant on `(1 + p^level)`-cosets of shells in `[-2, 2]`.
pub fn mult_function<R: Rng>(rng: &mut R, p: u64, level: u32) -> MultStepFunction {
    let n = rng.gen_range(1..=4);
    let modulus = p.pow(level.max(1));
    let terms: Vec<_> = (0..n)
        .map(|_| {
            let mut u = rng.gen_range(1..modulus.max(2));
            while u % p == 0 {
                u = rng.gen_range(1..modulus.max(2));
            }
            (coeff(rng), PAdicElt::new(p, rng.gen_range(-2..=2), u, level + 2).expect("unit"), level)
        })
        .collect();
    MultStepFunction::from_terms(p, &terms).expect("same prime")
}

pub fn satake<R: Rng>(rng: &mut R, n: usize) -> Vec<Scalar> {
    (0..n).map(|_| unitary(rng)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeEntry {
    pub phi: TestFunction,
    pub chi: MultChar,
    pub chi_pi: MultChar,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SatakeEntry {
    pub p: u64,
    pub alpha: Vec<Scalar>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct CorpusSizes {
    pub characters: usize,
    pub fe: usize,
    pub step_functions: usize,
    pub mult_functions: usize,
    pub satake: usize,
}

impl Default for CorpusSizes {
    fn default() -> Self {
        CorpusSizes { characters: 40, fe: 50, step_functions: 100, mult_functions: 20, satake: 20 }
    }
}

impl CorpusSizes {
    pub fn scaled(k: usize) -> Self {
        let d = Self::default();
        CorpusSizes {
            characters: d.characters * k,
            fe: d.fe * k,
            step_functions: d.step_functions * k,
            mult_functions: d.mult_functions * k,
            satake: d.satake * k,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    pub seed: u64,
    pub sizes: CorpusSizes,
    pub characters: Vec<MultChar>,
    pub fe: Vec<FeEntry>,
    pub step_functions: Vec<StepFunction>,
    pub mult_functions: Vec<MultStepFunction>,
    pub satake: Vec<SatakeEntry>,
}

/// Entries cycle through `DEFAULT_PRIMES`; each section draws from its own stream so
/// resizing one section leaves the others unchanged.
pub fn generate(seed: u64, sizes: CorpusSizes) -> Corpus {
    let pick = |i: usize| DEFAULT_PRIMES[i % DEFAULT_PRIMES.len()];
    let mut r = rng(seed);
    let characters = (0..sizes.characters).map(|i| mult_char(&mut r, pick(i), 2)).collect();
    let mut r = rng(seed.wrapping_add(1));
    let fe = (0..sizes.fe)
        .map(|i| {
            let p = pick(i);
            let phi = if i % 2 == 0 {
                TestFunction::Schwartz(step_function(&mut r, p))
            } else {
                let level = r.gen_range(0..=2);
                TestFunction::Compact(mult_function(&mut r, p, level))
            };
            let chi = mult_char(&mut r, p, 2);
            let chi_pi = mult_char(&mut r, p, 1);
            FeEntry { phi, chi, chi_pi }
        })
        .collect();
    let mut r = rng(seed.wrapping_add(2));
    let step_functions = (0..sizes.step_functions).map(|i| step_function(&mut r, pick(i))).collect();
    let mut r = rng(seed.wrapping_add(3));
    let mult_functions = (0..sizes.mult_functions)
        .map(|i| {
            let level = r.gen_range(0..=2);
            mult_function(&mut r, pick(i), level)
        })
        .collect();
    let mut r = rng(seed.wrapping_add(4));
    let satake = (0..sizes.satake)
        .map(|i| {
            let n = r.gen_range(1..=4);
            SatakeEntry { p: pick(i), alpha: satake(&mut r, n) }
        })
        .collect();
    Corpus { seed, sizes, characters, fe, step_functions, mult_functions, satake }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic() {
        let a = serde_json::to_string(&generate(42, CorpusSizes::default())).unwrap();
        let b = serde_json::to_string(&generate(42, CorpusSizes::default())).unwrap();
        assert_eq!(a, b);
        let c2 = serde_json::to_string(&generate(43, CorpusSizes::default())).unwrap();
        assert_ne!(a, c2);
    }

    #[test]
    fn sizes_are_linear() {
        let one = generate(7, CorpusSizes::default());
        let two = generate(7, CorpusSizes::scaled(2));
        assert_eq!(two.fe.len(), 2 * one.fe.len());
        assert_eq!(two.step_functions.len(), 2 * one.step_functions.len());
        // prefixes agree
        assert_eq!(two.characters[..one.characters.len()], one.characters[..]);
    }

    #[test]
    fn characters_have_exact_conductor() {
        let corpus = generate(42, CorpusSizes::default());
        for chi in &corpus.characters {
            let u = chi.unit();
            // revalidation rejects a character whose conductor is not exact
            let again = UnitChar::new(u.p(), u.cond(), u.exps().to_vec()).unwrap();
            assert_eq!(&again, u);
            assert!(u.cond() <= 2);
            assert!((chi.t().norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn round_trip_json() {
        let corpus = generate(5, CorpusSizes { characters: 3, fe: 4, step_functions: 3, mult_functions: 3, satake: 3 });
        let s = serde_json::to_string(&corpus).unwrap();
        let back: Corpus = serde_json::from_str(&s).unwrap();
        assert_eq!(serde_json::to_string(&back).unwrap(), s);
    }
}
