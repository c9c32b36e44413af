use nalgebra::DVector;

use super::likelihood::{derivatives, loglik_from_cholesky};
use super::lse::sigma_in_delta;
use super::SampleCovariance;
use crate::covmodel::{LinearCovarianceModel, ParameterVector};
use crate::error::{Error, Result};
use crate::linalg::SymmetricMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    pub max_iterations: usize,
    /// Sup-norm of the gradient below which the fit has converged.
    pub gradient_tol: f64,
    pub step_shrink: f64,
    /// Smallest step length tried by the line search.
    pub min_step: f64,
    /// Relative log-likelihood change treated as a stall.
    pub loglik_tol: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self { max_iterations: 100, gradient_tol: 1e-8, step_shrink: 0.5, min_step: 1e-12, loglik_tol: 1e-12 }
    }
}

impl NewtonOptions {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::InvalidOptions("max_iterations must be positive"));
        }
        if !(self.gradient_tol > 0.0 && self.min_step > 0.0 && self.loglik_tol > 0.0) {
            return Err(Error::InvalidOptions("tolerances must be positive"));
        }
        if !(self.step_shrink > 0.0 && self.step_shrink < 1.0) {
            return Err(Error::InvalidOptions("step_shrink must lie in (0, 1)"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// Gradient sup-norm fell below `gradient_tol`.
    GradientTolerance,
    /// Relative log-likelihood gain fell below `loglik_tol`.
    LoglikStall,
    /// No step length down to `min_step` increased the likelihood.
    LineSearchStall,
    MaxIterations,
}

/// State at the start of one Newton iteration and the step it took.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub v: ParameterVector,
    pub loglik: f64,
    pub gradient_norm: f64,
    pub in_delta: bool,
    pub hessian_negdef: bool,
    /// Accepted step length; `None` if the line search failed.
    pub step: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Diagnostics {
    pub sigma_pd: bool,
    pub in_delta: bool,
    pub hessian_negdef_at_solution: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub v_hat: ParameterVector,
    pub sigma_hat: SymmetricMatrix,
    pub loglik: f64,
    pub iterations: usize,
    pub converged: bool,
    pub stop_reason: StopReason,
    /// Log-likelihood at the initial point followed by one entry per
    /// accepted step.
    pub loglik_trace: Vec<f64>,
    pub path: Vec<IterationRecord>,
    pub diagnostics: Diagnostics,
}

/// Maximum likelihood by Newton-Raphson with backtracking.
///
/// The direction solves `(-H) d = g` when `-H` has a Cholesky factor and is
/// the gradient otherwise. Steps shrink until `Σ_v ≻ 0` and the
/// log-likelihood strictly increases, so the trace is monotone.
pub fn newton_raphson_mle(
    model: &LinearCovarianceModel,
    s: &SampleCovariance,
    init: &ParameterVector,
    opts: &NewtonOptions,
) -> Result<FitResult> {
    opts.validate()?;
    model.check_params(init)?;
    if s.dim() != model.dim() {
        return Err(Error::DimensionMismatch { expected: model.dim(), found: s.dim() });
    }
    if !s.is_full_rank() {
        return Err(Error::SingularSample);
    }

    let mut v = init.clone();
    let mut sigma = model.sigma(&v)?;
    let mut chol = sigma.cholesky().ok_or(Error::NotPositiveDefinite)?;
    let mut ll = loglik_from_cholesky(&chol, s);
    let mut trace = vec![ll];
    let mut path = Vec::new();

    let stop_reason = loop {
        let p_inv = chol.inverse().into_matrix();
        let (grad, hess) = derivatives(model, &p_inv, s, true);
        let hess = hess.expect("hessian requested");
        let gradient_norm = grad.amax();
        let neg_h = SymmetricMatrix::symmetrize(&(-&hess));
        let neg_h_chol = neg_h.cholesky();

        if gradient_norm < opts.gradient_tol {
            break StopReason::GradientTolerance;
        }
        if path.len() >= opts.max_iterations {
            break StopReason::MaxIterations;
        }

        let mut record = IterationRecord {
            v: v.clone(),
            loglik: ll,
            gradient_norm,
            in_delta: sigma_in_delta(&sigma, s.matrix()),
            hessian_negdef: neg_h_chol.is_some(),
            step: None,
        };
        let direction: DVector<f64> = match &neg_h_chol {
            Some(c) => c.solve_vector(&grad),
            None => grad.clone(),
        };

        let mut alpha = 1.0;
        let mut accepted = None;
        while alpha >= opts.min_step {
            let candidate = v.step(alpha, &direction);
            let cand_sigma = model.sigma(&candidate)?;
            if let Some(c) = cand_sigma.cholesky() {
                let cand_ll = loglik_from_cholesky(&c, s);
                if cand_ll > ll {
                    accepted = Some((candidate, cand_sigma, c, cand_ll));
                    break;
                }
            }
            alpha *= opts.step_shrink;
        }

        let Some((new_v, new_sigma, new_chol, new_ll)) = accepted else {
            path.push(record);
            break StopReason::LineSearchStall;
        };
        record.step = Some(alpha);
        path.push(record);

        let gain = new_ll - ll;
        v = new_v;
        sigma = new_sigma;
        chol = new_chol;
        ll = new_ll;
        trace.push(ll);
        if gain <= opts.loglik_tol * ll.abs().max(f64::MIN_POSITIVE) {
            break StopReason::LoglikStall;
        }
    };

    let p_inv = chol.inverse().into_matrix();
    let hess = derivatives(model, &p_inv, s, true).1.expect("hessian requested");
    let diagnostics = Diagnostics {
        sigma_pd: true,
        in_delta: sigma_in_delta(&sigma, s.matrix()),
        hessian_negdef_at_solution: SymmetricMatrix::symmetrize(&(-hess)).is_positive_definite(),
    };
    let iterations = trace.len() - 1;
    let converged = stop_reason != StopReason::MaxIterations;
    let result = FitResult {
        v_hat: v,
        sigma_hat: sigma,
        loglik: ll,
        iterations,
        converged,
        stop_reason,
        loglik_trace: trace,
        path,
        diagnostics,
    };
    if converged {
        Ok(result)
    } else {
        Err(Error::MaxIterationsExceeded(Box::new(result)))
    }
}

/// Iterates of the plain Newton update `v ← v - H⁻¹ ∇ℓ`, with no line
/// search and no positivity safeguard.
#[derive(Debug, Clone, PartialEq)]
pub struct UndampedPath {
    /// The starting point followed by every completed iterate.
    pub iterates: Vec<ParameterVector>,
    /// Set when `Σ_v` or the Hessian became singular, or the iterate stopped
    /// being finite, before all steps were taken.
    pub broke_down: bool,
}

impl UndampedPath {
    pub fn last(&self) -> &ParameterVector {
        self.iterates.last().expect("path holds the starting point")
    }
}

/// Runs `steps` plain Newton updates from `init`. The score and Hessian
/// formulas only need `Σ_v` to be invertible, so iterates may leave the
/// positive definite cone.
pub fn newton_fixed_steps(
    model: &LinearCovarianceModel,
    s: &SampleCovariance,
    init: &ParameterVector,
    steps: usize,
) -> Result<UndampedPath> {
    model.check_params(init)?;
    if s.dim() != model.dim() {
        return Err(Error::DimensionMismatch { expected: model.dim(), found: s.dim() });
    }
    let mut iterates = vec![init.clone()];
    for _ in 0..steps {
        let v = iterates.last().expect("non-empty");
        let sigma = model.sigma(v)?;
        let Some(p_inv) = sigma.as_matrix().clone().try_inverse() else {
            return Ok(UndampedPath { iterates, broke_down: true });
        };
        let (grad, hess) = derivatives(model, &p_inv, s, true);
        let Some(delta) = hess.expect("hessian requested").lu().solve(&grad) else {
            return Ok(UndampedPath { iterates, broke_down: true });
        };
        let next = v.step(-1.0, &delta);
        if next.as_slice().iter().any(|x| !x.is_finite()) {
            return Ok(UndampedPath { iterates, broke_down: true });
        }
        iterates.push(next);
    }
    Ok(UndampedPath { iterates, broke_down: false })
}
