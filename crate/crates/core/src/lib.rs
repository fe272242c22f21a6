//! Joint reconstruction of an image and its imaging operator.
//!
//! The solver minimizes a multi-penalty Tikhonov functional
//!
//! ```text
//! J(c, S) = ½‖Sc − u‖² + γ/2‖S − S_mod‖²_F + µ/2‖SQ − S_calib‖²_F + α|c|₂² + λ|c|₁
//! ```
//!
//! over a nonnegative image `c` and a (real or complex) system matrix `S`, by
//! alternating regularized Kaczmarz sweeps on the image and on the matrix.
//! `S_mod` is a high-resolution but inexact model of the operator, `S_calib`
//! a coarse calibration measurement, and `Q` the map taking a fine matrix to
//! the calibration grid.
//!
//! Module map:
//!
//! * [`model`]: shared domain types and parameter mapping.
//! * [`forward`]: forward operator, projection map and objective evaluation.
//! * [`kaczmarz`]: hyperplane projection, regularized row update, `P₊`, `T_λ`.
//! * [`image_solver`] / [`system_solver`]: the two inner solvers.
//! * [`joint`]: the alternating driver.
//! * [`testbed`]: synthetic instances (lower-triangular integral operator).
//! * [`metrics`]: ℓ²-error, 1-D SSIM, residuals, rate fitting.
//! * [`sweep`]: grid search harness and the noise-rate experiment.
//! * [`io`]: binary matrices, config files, CSV results and SVG plots.

pub mod error;
pub mod forward;
pub mod image_solver;
pub mod io;
pub mod joint;
pub mod kaczmarz;
pub mod metrics;
pub mod model;
pub mod scalar;
pub mod sweep;
pub mod system_solver;
pub mod testbed;

pub use error::{Error, Result};
pub use model::{
    map_reg_params, validate_instance, Image, KaczmarzSchedule, Matrix, Measurement,
    ProblemInstance, ProjectionMap, RegParams, ValidationReport,
};
pub use scalar::{Scalar, ScalarField};

pub use num_complex::Complex64;
