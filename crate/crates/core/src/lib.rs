//! Numerical integral geometry on the 2-sphere: cosine and Funk transforms,
//! radial symmetrization, area measures of convex bodies and zonoids, and
//! diagnostics for functions with isotropic great-circle sections.
//!
//! Everything is generic over [`Real`] (`f32` or `f64`); the aliases at the
//! crate root fix the scalar to `f64`.

// `!(x > 0)` is used on purpose so NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod convex;
pub mod error;
pub mod harmonics;
pub mod linalg;
pub mod scalar;
pub mod sphere;
pub mod transforms;
pub mod zonoid;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Vector = linalg::Vec3<f64>;
pub type Grid = sphere::SphericalGrid<f64>;
pub type Circle = sphere::GreatCircle<f64>;
pub type SphereCap = sphere::Cap<f64>;
pub type Coeffs = harmonics::HarmonicCoeffs<f64>;
pub type Function = transforms::SphericalFunction<f64>;
pub type Support = convex::SupportFunction<f64>;
pub type Radii = convex::RadiiMatrix<f64>;
pub type Revolution = convex::RevolutionBody<f64>;
pub type Zonal = convex::ZonalMeasure<f64>;
pub type Zonoid = zonoid::ZonoidSpec<f64>;
