//! Gaussian analytic functions `psi(z, omega) = sum_j omega_j psi_j(z)`:
//! sampling, zero location, the first intensity `(1/2 pi) Laplacian log ||Psi||`,
//! large-deviation and hole-probability bounds for linear statistics, and
//! recovery of a curve from its reproducing kernel up to a zero-free factor
//! and a unitary map.

pub mod config;
pub mod deviations;
pub mod ensembles;
pub mod error;
pub mod intensity;
pub mod montecarlo;
pub mod poly;
pub mod quad;
pub mod rigidity;
pub mod sampling;
pub mod zeros;

pub use num_complex;

pub use ensembles::{CurveFamily, Domain, Ensemble, ExplicitCurve, Kernel, Region, TruncationPolicy};
pub use error::{GafError, Result};
pub use poly::Polynomial;
pub use sampling::{draw, CoefficientLaw, GafSample, SeedPath};
pub use zeros::{Zero, ZeroSet};
