use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("division by the zero rational function")]
    DivisionByZero,

    #[error("series expansion around X = 0 does not exist: {0}")]
    NotExpandable(String),

    #[error("non-finite scalar produced by {0}")]
    NonFinite(&'static str),

    #[error("insufficient p-adic precision: need {need}, have {have}")]
    InsufficientPrecision { need: i64, have: i64 },

    #[error("{0} is not a prime")]
    NotPrime(u64),

    #[error("mismatched primes: {0} vs {1}")]
    PrimeMismatch(u64, u64),

    #[error("q mismatch between rational functions: {0} vs {1}")]
    QMismatch(u64, u64),

    #[error("invalid p-adic element: {0}")]
    InvalidElement(String),

    #[error("invalid character: {0}")]
    InvalidCharacter(String),

    #[error("invalid function data: {0}")]
    InvalidFunction(String),

    #[error("missing gamma component for unit character of conductor {cond} (c_max = {c_max})")]
    MissingComponent { cond: u32, c_max: u32 },

    #[error("Mellin component of conductor {cond} exceeds c_max = {c_max}")]
    ConductorTooLarge { cond: u32, c_max: u32 },

    #[error("matrix is not invertible over Q_p")]
    NotInvertible,

    #[error("precision guard violated: {0}")]
    PrecisionGuard(String),

    #[error("s = {0} is within {1:e} of a pole")]
    PoleProximity(String, f64),

    #[error("parameters outside the convergence region: {0}")]
    NonConvergent(String),

    #[error("quadrature failed to reach tolerance: estimated error {0:e}")]
    QuadratureFailure(f64),

    #[error("enumeration too large: {0} elements")]
    TooLarge(u128),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Stable machine-readable reason code.
    pub fn code(&self) -> &'static str {
        match self {
            Error::DivisionByZero => "division_by_zero",
            Error::NotExpandable(_) => "not_expandable",
            Error::NonFinite(_) => "non_finite",
            Error::InsufficientPrecision { .. } => "insufficient_precision",
            Error::NotPrime(_) => "not_prime",
            Error::PrimeMismatch(..) => "prime_mismatch",
            Error::QMismatch(..) => "q_mismatch",
            Error::InvalidElement(_) => "invalid_element",
            Error::InvalidCharacter(_) => "invalid_character",
            Error::InvalidFunction(_) => "invalid_function",
            Error::MissingComponent { .. } => "missing_component",
            Error::ConductorTooLarge { .. } => "conductor_too_large",
            Error::NotInvertible => "not_invertible",
            Error::PrecisionGuard(_) => "precision_guard",
            Error::PoleProximity(..) => "pole_proximity",
            Error::NonConvergent(_) => "non_convergent",
            Error::QuadratureFailure(_) => "quadrature_failure",
            Error::TooLarge(_) => "too_large",
        }
    }
}
