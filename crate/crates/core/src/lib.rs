//! Parallel MRI reconstruction with coil sensitivities expanded in a
//! spherical-function basis, solved with a linearised preconditioned
//! nonlinear ADMM.

pub mod admm;
pub mod coefficients;
pub mod config;
pub mod error;
pub mod experiment;
pub mod fft;
pub mod grid;
pub mod io;
pub mod linalg;
pub mod metrics;
pub mod model;
pub mod operators;
pub mod prox;
pub mod sphfn;

use ndarray::Array2;
use num_complex::Complex64;

pub use coefficients::CoefficientVector;
pub use error::{Error, Result};

/// `N × N` complex image (proton density, coil map, or k-space plane).
pub type ComplexImage = Array2<Complex64>;
/// `N × N` real image.
pub type RealImage = Array2<f64>;
