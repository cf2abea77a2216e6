//! Data-driven reduced-order surrogate modeling of periodic torque signals.
//!
//! The pipeline: a bounded 20-parameter design space feeds a deterministic
//! synthetic torque model; signals are compressed by keeping the strongest
//! DFT bins (or PCA components); regression models (polynomial chaos,
//! feedforward network, Gaussian process) map design parameters to the
//! reduced coefficients; inference inverts the reduction; and a Monte Carlo
//! engine estimates torque statistics through any evaluator.

pub mod cmaes;
pub mod dataset;
pub mod error;
pub mod fnn;
pub mod gp;
mod linalg;
pub mod param_space;
pub mod pca;
pub mod pce;
pub mod pipeline;
pub mod seeding;
pub mod signal;
pub mod spectral;
pub mod synthetic;
pub mod uq;

pub use error::{Result, RomError};
