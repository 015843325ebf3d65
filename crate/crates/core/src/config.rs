//! Verification tolerances. Every check takes its threshold from here.

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Rational-function coefficient equality.
    pub rf_coeff: f64,
    /// Two-route gamma agreement.
    pub gamma: f64,
    pub functional_equation: f64,
    pub hankel: f64,
    pub homogeneous: f64,
    pub lemma31: f64,
    pub basic: f64,
    pub fourier: f64,
    pub unitarity: f64,
    pub arch_zeta: f64,
    pub arch_fe: f64,
    /// Absolute error target of the Archimedean quadrature.
    pub quadrature: f64,
    /// Distance to a pole below which Archimedean gamma values are refused.
    pub pole: f64,
    /// Coefficient equality for truncation-stability comparisons.
    pub stability: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rf_coeff: 1e-10,
            gamma: 1e-9,
            functional_equation: 1e-9,
            hankel: 1e-9,
            homogeneous: 1e-9,
            lemma31: 1e-10,
            basic: 1e-10,
            fourier: 1e-12,
            unitarity: 1e-9,
            arch_zeta: 1e-6,
            arch_fe: 1e-5,
            quadrature: 1e-8,
            pole: 1e-8,
            stability: 1e-12,
        }
    }
}
