//! Exact computations in the quiver model of quasi-coherent sheaves on
//! projective space, plus a laboratory for finite Gorenstein rings.

pub mod cech;
pub mod functors;
pub mod lab;
pub mod linalg;
pub mod quiver;
pub mod scalar;

pub use linalg::{Complex, LinalgError, Matrix, QuotientSpace};
pub use quiver::{MultiDegree, SliceKey, TwistPresentation, Vertex};
pub use scalar::{Field, Fp};

/// Rational numbers with arbitrary-precision numerator and denominator.
pub type Rational = num_rational::BigRational;
pub type Gf2 = Fp<2>;
pub type Gf3 = Fp<3>;
pub type Gf5 = Fp<5>;
pub type Gf7 = Fp<7>;

pub type QMatrix = Matrix<Rational>;
pub type QComplex = Complex<Rational>;
pub type QPresentation = TwistPresentation<Rational>;
