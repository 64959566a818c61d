//! Quantum mechanics of a particle constrained to a curved surface in R³.
//!
//! - [`surface`]: implicit surfaces, charts, normals, curvature and the
//!   geometric potential.
//! - [`brackets`]: Poisson and Dirac brackets on the six-dimensional phase
//!   space and the classical identities of the constrained system.
//! - [`quantize`]: discrete Laplace-Beltrami, geometric momentum and
//!   Hamiltonian operators on chart grids, spectra and the quantum identity
//!   checks.

pub mod autodiff;
pub mod constants;
pub mod error;
pub mod brackets;
pub mod quantize;
pub mod surface;

pub use constants::{conventions, PhysicalConstants};
pub use error::{BracketError, QuantizeError, SurfaceError};
pub use quantize::{DiscreteOperator, SpectrumResult, SurfaceGrid, VerificationReport};
pub use surface::{CurvatureSample, ImplicitSurface, ParametricChart};

pub type Vec3 = nalgebra::Vector3<f64>;
pub type Mat3 = nalgebra::Matrix3<f64>;

/// Version string embedded in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
