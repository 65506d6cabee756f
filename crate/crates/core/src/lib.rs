//! Covariance structures of the stochastic heat equation driven by noise that is
//! fractional in time and white in space.
//!
//! The solution covariance is available two ways: from its defining double integral
//! ([`kernels::solution_cov_oracle`]) and from a closed leading term plus a one-dimensional
//! remainder ([`kernels::solution_cov`]). The remainder splits further into the covariances
//! of auxiliary processes whose Gram matrices can be sampled exactly ([`gp`]), and [`spde`]
//! simulates the equation itself as an independent check.

pub mod error;
pub mod gp;
pub mod kernels;
pub mod props;
pub mod quadrature;
pub mod spde;
pub mod specfun;

pub use error::{Error, Result};
pub use gp::{GramMatrix, McEstimate, PathEnsemble, TimeGrid};
pub use kernels::{Form, KernelSpec};
pub use props::VerificationReport;
pub use quadrature::{Integral2d, JacobiRule};
pub use spde::{SpdeConfig, SpdeReport};
pub use specfun::{Constants, ModelParams};
