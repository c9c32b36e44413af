use super::SampleCovariance;
use crate::covmodel::{LinearCovarianceModel, ParameterVector};
use crate::error::{Error, Result};
use crate::linalg::SymmetricMatrix;

/// Margin kept inside the strict inequalities of the safe initialization.
const SAFETY: f64 = 0.9;

/// Least squares estimator: coordinates of the Frobenius projection of `S`
/// onto the model space, from `gram · v = (tr(S G_j))_j`.
pub fn least_squares(model: &LinearCovarianceModel, s: &SampleCovariance) -> Result<ParameterVector> {
    model.project(s.matrix())
}

/// Unbiased estimator for `G0 = 0` models: `n/(n-1)` times least squares.
pub fn anderson_unbiased(model: &LinearCovarianceModel, s: &SampleCovariance) -> Result<ParameterVector> {
    if !model.has_zero_offset() {
        return Err(Error::UnsupportedModel("unbiased estimator requires G0 = 0"));
    }
    let n = s.n() as f64;
    Ok(least_squares(model, s)?.scale(n / (n - 1.0)))
}

/// `0 ≺ Σ ≺ 2S`, both sides decided by Cholesky.
pub fn sigma_in_delta(sigma: &SymmetricMatrix, s: &SymmetricMatrix) -> bool {
    sigma.dim() == s.dim()
        && sigma.is_positive_definite()
        && s.scale(2.0).axpy(-1.0, sigma).is_positive_definite()
}

/// Whether `Σ_v` lies in the region `0 ≺ Σ_v ≺ 2S`. A parameter vector of
/// the wrong length is reported as outside.
pub fn in_delta_region(model: &LinearCovarianceModel, v: &ParameterVector, s: &SampleCovariance) -> bool {
    model.sigma(v).map(|sigma| sigma_in_delta(&sigma, s.matrix())).unwrap_or(false)
}

/// `diag(S)` when the model contains every diagonal matrix, otherwise
/// `(tr S / p) I` when it contains the identity.
pub fn default_anchor(model: &LinearCovarianceModel, s: &SampleCovariance) -> Result<SymmetricMatrix> {
    if model.contains_diagonals() {
        Ok(SymmetricMatrix::from_diagonal(&s.matrix().diagonal()))
    } else if model.contains_identity() {
        let p = s.dim();
        Ok(SymmetricMatrix::identity(p).scale(s.matrix().trace() / p as f64))
    } else {
        Err(Error::InvalidAnchor("model contains neither the diagonal matrices nor the identity"))
    }
}

/// A starting point inside `0 ≺ Σ ≺ 2S` built from the least squares
/// estimate and a positive definite anchor `Σ0` in the model.
///
/// The estimate is first pulled towards `Σ0` until it is positive definite,
/// then scaled down until it lies below `2S`.
pub fn safe_init(
    model: &LinearCovarianceModel,
    s: &SampleCovariance,
    sigma0: &SymmetricMatrix,
) -> Result<ParameterVector> {
    if !model.has_zero_offset() {
        return Err(Error::UnsupportedModel("safe initialization requires G0 = 0"));
    }
    if sigma0.dim() != model.dim() {
        return Err(Error::DimensionMismatch { expected: model.dim(), found: sigma0.dim() });
    }
    if !sigma0.is_positive_definite() {
        return Err(Error::InvalidAnchor("anchor is not positive definite"));
    }
    let w0 = model
        .coordinates_of(sigma0)?
        .ok_or(Error::InvalidAnchor("anchor does not lie in the model"))?;
    if !s.is_full_rank() {
        return Err(Error::SingularSample);
    }

    let v_bar = least_squares(model, s)?;
    let sigma_bar = model.sigma(&v_bar)?;
    let t = if sigma_bar.is_positive_definite() {
        1.0
    } else {
        let l0 = sigma0.min_eigenvalue();
        SAFETY * l0 / (l0 - sigma_bar.min_eigenvalue())
    };
    let sigma_t = sigma0.scale(1.0 - t).axpy(t, &sigma_bar);

    let two_s = s.matrix().scale(2.0);
    let scale = if two_s.axpy(-1.0, &sigma_t).is_positive_definite() {
        1.0
    } else {
        // λ_min(S M⁻¹) through the congruent symmetric matrix L⁻¹ S L⁻ᵀ.
        let chol = sigma_t.cholesky().ok_or(Error::NotPositiveDefinite)?;
        SAFETY * 2.0 * chol.whiten(s.matrix()).min_eigenvalue()
    };

    let coords = w0
        .as_slice()
        .iter()
        .zip(v_bar.as_slice())
        .map(|(a, b)| scale * ((1.0 - t) * a + t * b))
        .collect::<Vec<_>>();
    Ok(coords.into())
}
