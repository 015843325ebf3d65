//! Local zeta integrals, gamma factors and Hankel transforms over `Q_p`, `R` and `C`.

pub mod arch;
pub mod basic;
pub mod characters;
pub mod config;
pub mod corpus;
pub mod error;
pub mod functions;
pub mod kernel;
pub mod lemma31;
pub mod numerics;
pub mod padic;
pub mod zeta;

pub use error::{Error, Result};
pub use numerics::{LaurentPoly, RationalFunc, Scalar};
