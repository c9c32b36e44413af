//! Likelihood, least squares, Newton-Raphson and loss functions.

mod likelihood;
mod loss;
mod lse;
mod newton;

pub use likelihood::{
    directional_second_derivative, gradient, hessian, log_likelihood, normalized_loglik,
};
pub use loss::{loss, LossKind};
pub use lse::{anderson_unbiased, default_anchor, in_delta_region, least_squares, safe_init, sigma_in_delta};
pub use newton::{
    newton_fixed_steps, newton_raphson_mle, Diagnostics, FitResult, IterationRecord, NewtonOptions,
    StopReason, UndampedPath,
};

use crate::error::{Error, Result};
use crate::linalg::SymmetricMatrix;

/// Relative tolerance below which a negative eigenvalue of `S` is treated as
/// round-off.
const PSD_TOLERANCE: f64 = 1e-10;

/// A sample covariance matrix `S_n` (divisor `n`) with its sample size.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleCovariance {
    s: SymmetricMatrix,
    n: usize,
    mean: Vec<f64>,
}

impl SampleCovariance {
    /// Wraps a matrix with zero stored mean.
    pub fn new(s: SymmetricMatrix, n: usize) -> Result<Self> {
        let p = s.dim();
        Self::with_mean(s, n, vec![0.0; p])
    }

    pub fn with_mean(s: SymmetricMatrix, n: usize, mean: Vec<f64>) -> Result<Self> {
        if n < 2 {
            return Err(Error::InsufficientData { needed: 2, got: n });
        }
        if mean.len() != s.dim() {
            return Err(Error::DimensionMismatch { expected: s.dim(), found: mean.len() });
        }
        let ev = s.eigenvalues();
        let hi = ev[ev.len() - 1].abs().max(ev[0].abs());
        if ev[0] < -PSD_TOLERANCE * hi {
            return Err(Error::NotPositiveDefinite);
        }
        Ok(Self { s, n, mean })
    }

    pub fn matrix(&self) -> &SymmetricMatrix {
        &self.s
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.s.dim()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn is_full_rank(&self) -> bool {
        self.s.is_positive_definite()
    }
}
