//! Maximum likelihood estimation in Gaussian models whose covariance matrix
//! is an affine function `Σ_v = G0 + Σ v_i G_i` of the parameters.
//!
//! * [`covmodel`]: model construction and common families.
//! * [`estimate`]: likelihood, least squares, safe starting points and a
//!   line-searched Newton-Raphson solver.
//! * [`rmt`]: how likely the true covariance is to lie in the region where
//!   the likelihood is concave, via Tracy-Widom and concentration bounds.
//! * [`simulate`]: seeded samplers and Monte Carlo experiments.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod covmodel;
pub mod error;
pub mod estimate;
pub mod io;
pub mod linalg;
pub mod rmt;
pub mod simulate;

pub use covmodel::{LinearCovarianceModel, ParameterVector, TreeSpec};
pub use error::{Error, Result};
pub use estimate::{
    least_squares, log_likelihood, newton_raphson_mle, safe_init, FitResult, NewtonOptions, SampleCovariance,
};
pub use linalg::SymmetricMatrix;
