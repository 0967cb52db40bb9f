//! Exact algebra of unitary-invariant convex valuations on `C^n`.
//!
//! The central type is [`Valuation`], stored in the hermitian intrinsic volume
//! basis `μ_{k,q}`. Everything is generic over the coefficient field of
//! [`PiLaurent`]; the exact instantiation uses big rationals and is exposed
//! through the aliases below.

pub mod cone;
pub mod error;
pub mod kinematic;
pub mod linalg;
pub mod numeric;
pub mod poly;
pub mod scalar;
pub mod selftest;
pub mod sl2;
pub mod valspec;
pub mod valuation;

pub use error::{Result, UvalError};
pub use kinematic::KinematicTensor;
pub use linalg::Matrix;
pub use poly::{Chart, GradedPoly};
pub use scalar::{Coefficient, PiLaurent};
pub use valuation::{KlainPolynomial, Valuation};

pub type Rational = num_rational::BigRational;
pub type Scalar = PiLaurent<Rational>;
pub type ExactPoly = GradedPoly<Rational>;
pub type ExactValuation = Valuation<Rational>;
pub type ExactMatrix = Matrix<Scalar>;
pub type ExactTensor = KinematicTensor<Rational>;

pub type FloatScalar = PiLaurent<f64>;
pub type FloatPoly = GradedPoly<f64>;
pub type FloatValuation = Valuation<f64>;
pub type FloatMatrix = Matrix<FloatScalar>;
