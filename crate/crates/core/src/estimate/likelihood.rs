use nalgebra::{DMatrix, DVector};

use super::SampleCovariance;
use crate::covmodel::{LinearCovarianceModel, ParameterVector};
use crate::error::{Error, Result};
use crate::linalg::{Cholesky, SymmetricMatrix};

/// `-(n/2) (log det Σ_v + tr(S Σ_v⁻¹))`, the Gaussian log-likelihood without
/// its constant.
pub fn log_likelihood(model: &LinearCovarianceModel, v: &ParameterVector, s: &SampleCovariance) -> Result<f64> {
    check_sample(model, s)?;
    let sigma = model.sigma(v)?;
    let chol = sigma.cholesky().ok_or(Error::NotPositiveDefinite)?;
    Ok(loglik_from_cholesky(&chol, s))
}

pub(crate) fn loglik_from_cholesky(chol: &Cholesky, s: &SampleCovariance) -> f64 {
    let trace = chol.inverse().frobenius_inner(s.matrix());
    -0.5 * s.n() as f64 * (chol.log_det() + trace)
}

/// `log det(S Σ⁻¹) - tr(S Σ⁻¹) + p`, computed as `Σ (log λ - λ + 1)` over the
/// eigenvalues of `Σ^{-1/2} S Σ^{-1/2}`. Never positive; zero iff `Σ = S`.
pub fn normalized_loglik(sigma: &SymmetricMatrix, s: &SymmetricMatrix) -> Result<f64> {
    if sigma.dim() != s.dim() {
        return Err(Error::DimensionMismatch { expected: sigma.dim(), found: s.dim() });
    }
    let chol = sigma.cholesky().ok_or(Error::NotPositiveDefinite)?;
    if !s.is_positive_definite() {
        return Err(Error::NotPositiveDefinite);
    }
    let ev = chol.whiten(s).eigenvalues();
    if ev[0] <= 0.0 {
        return Err(Error::NotPositiveDefinite);
    }
    Ok(ev.iter().map(|l| l.ln() - l + 1.0).sum())
}

/// Score vector, `(n/2) tr(G_i (Σ⁻¹SΣ⁻¹ - Σ⁻¹))` per coordinate.
pub fn gradient(model: &LinearCovarianceModel, v: &ParameterVector, s: &SampleCovariance) -> Result<DVector<f64>> {
    let (p_inv, _) = precision(model, v, s)?;
    Ok(derivatives(model, &p_inv, s, false).0)
}

/// Hessian `-(n/2) tr((2S - Σ) Σ⁻¹ G_j Σ⁻¹ G_i Σ⁻¹)`, symmetrized.
pub fn hessian(model: &LinearCovarianceModel, v: &ParameterVector, s: &SampleCovariance) -> Result<DMatrix<f64>> {
    let (p_inv, _) = precision(model, v, s)?;
    Ok(derivatives(model, &p_inv, s, true).1.expect("hessian requested"))
}

/// Second directional derivative of the log-likelihood at `Σ` in directions
/// `A` and `B`: `-(n/2) tr((2S - Σ) Σ⁻¹ B Σ⁻¹ A Σ⁻¹)`.
pub fn directional_second_derivative(
    sigma: &SymmetricMatrix,
    s: &SampleCovariance,
    a: &SymmetricMatrix,
    b: &SymmetricMatrix,
) -> Result<f64> {
    let p = sigma.dim();
    for m in [s.matrix(), a, b] {
        if m.dim() != p {
            return Err(Error::DimensionMismatch { expected: p, found: m.dim() });
        }
    }
    let p_inv = sigma.cholesky().ok_or(Error::NotPositiveDefinite)?.inverse();
    let p_inv = p_inv.as_matrix();
    let two_s_minus = s.matrix().scale(2.0).axpy(-1.0, sigma);
    let m = two_s_minus.as_matrix() * p_inv * b.as_matrix() * p_inv * a.as_matrix() * p_inv;
    Ok(-0.5 * s.n() as f64 * m.trace())
}

fn check_sample(model: &LinearCovarianceModel, s: &SampleCovariance) -> Result<()> {
    if s.dim() != model.dim() {
        return Err(Error::DimensionMismatch { expected: model.dim(), found: s.dim() });
    }
    Ok(())
}

fn precision(
    model: &LinearCovarianceModel,
    v: &ParameterVector,
    s: &SampleCovariance,
) -> Result<(DMatrix<f64>, Cholesky)> {
    check_sample(model, s)?;
    let chol = model.sigma(v)?.cholesky().ok_or(Error::NotPositiveDefinite)?;
    Ok((chol.inverse().into_matrix(), chol))
}

/// Gradient and optionally the Hessian given any inverse `Σ⁻¹`.
///
/// With `Q = Σ⁻¹SΣ⁻¹` and `R = 2Q - Σ⁻¹`, the Hessian entry is
/// `-(n/2) ⟨R G_j Σ⁻¹, G_i⟩`.
pub(crate) fn derivatives(
    model: &LinearCovarianceModel,
    p_inv: &DMatrix<f64>,
    s: &SampleCovariance,
    with_hessian: bool,
) -> (DVector<f64>, Option<DMatrix<f64>>) {
    let half_n = 0.5 * s.n() as f64;
    let q = p_inv * s.matrix().as_matrix() * p_inv;
    let q = SymmetricMatrix::symmetrize(&q).into_matrix();
    let basis = model.basis();
    let r = basis.len();

    let score = &q - p_inv;
    let grad = DVector::from_iterator(r, basis.iter().map(|g| half_n * score.dot(g.as_matrix())));
    if !with_hessian {
        return (grad, None);
    }

    let rr = 2.0 * &q - p_inv;
    let mut h = DMatrix::zeros(r, r);
    for j in 0..r {
        let m = &rr * basis[j].as_matrix() * p_inv;
        for i in 0..r {
            h[(i, j)] = -half_n * m.dot(basis[i].as_matrix());
        }
    }
    let h = SymmetricMatrix::symmetrize(&h).into_matrix();
    (grad, Some(h))
}
