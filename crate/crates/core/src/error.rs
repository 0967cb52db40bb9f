use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum UvalError {
    #[error("division by a scalar that is not a single nonzero monomial in π")]
    NonMonomialDivisor,
    #[error("double factorial undefined for {0} (need m >= -1)")]
    DoubleFactorialDomain(i64),
    #[error("sign of {0} undecidable at π-enclosure width 1e-30")]
    UndecidableSign(String),
    #[error("index ({k},{q}) out of range for n = {n}")]
    IndexOutOfRange { n: usize, k: usize, q: usize },
    #[error("degree {k} out of range for n = {n}")]
    DegreeOutOfRange { n: usize, k: usize },
    #[error("ambient dimensions differ: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("iota is only defined on even degrees; found a component in degree {0}")]
    OddDegree(usize),
    #[error("Klain function requested in degree {k} > n = {n}; evaluate klain(fourier(v), {dual}) instead")]
    KlainAboveMiddle { n: usize, k: usize, dual: usize },
    #[error("valuation is not homogeneous")]
    NotHomogeneous,
    #[error("matrix is singular")]
    Singular,
    #[error("matrix shape mismatch: {0}")]
    Shape(String),
    #[error("tensor is already normalized to the CP^n probability convention")]
    AlreadyNormalized,
    #[error("independent routes disagree: {0}")]
    RouteMismatch(String),
    #[error("frame is not orthonormal (deviation {0:e})")]
    NotOrthonormal(f64),
    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T, E = UvalError> = std::result::Result<T, E>;
