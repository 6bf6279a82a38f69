//! Exact Delzant polytopes, the joint spectra of their quantizations, an
//! independent Fock-space oracle, and reconstruction of the polytope from
//! spectrum samples.
//!
//! Geometry is stored in 2π-units: a coordinate `x` means `2πx`. Spectrum
//! clouds carry absolute `f64` coordinates. The algorithms are generic over
//! [`scalar::ExactField`]; the aliases below fix the scalar to `BigRational`.

pub mod delzant;
pub mod error;
pub mod library;
pub mod linalg;
pub mod polytope;
pub mod scalar;
pub mod hausdorff;
pub mod spectrum;
pub mod oracle;
pub mod inverse;
pub mod io;

pub use error::{Error, Result};

/// Exact scalar used throughout the application layers.
pub type Rational = num_rational::BigRational;
pub type Polytope = delzant::DelzantPolytope<Rational>;
pub type Vector = linalg::RationalVector<Rational>;
pub type Deformation = spectrum::DeformationSeries<Rational>;
pub type Oracle = oracle::OracleSpectrum<Rational>;
pub type Reconstruction = inverse::ReconstructionResult<Rational>;
