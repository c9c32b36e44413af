use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::SymmetricMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LossKind {
    /// Largest absolute entry of `Σ̂ - Σ*`.
    Linf,
    Frobenius,
    /// Spectral norm of `Σ̂ Σ*⁻¹ - I`.
    Quadratic,
    /// `tr(Σ̂ Σ*⁻¹) - log det(Σ̂ Σ*⁻¹) - p`.
    Entropy,
}

impl LossKind {
    pub const ALL: [LossKind; 4] = [LossKind::Linf, LossKind::Frobenius, LossKind::Quadratic, LossKind::Entropy];

    pub fn name(self) -> &'static str {
        match self {
            LossKind::Linf => "linf",
            LossKind::Frobenius => "frobenius",
            LossKind::Quadratic => "quadratic",
            LossKind::Entropy => "entropy",
        }
    }
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        LossKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown loss `{s}`")))
    }
}

pub fn loss(kind: LossKind, sigma_hat: &SymmetricMatrix, sigma_star: &SymmetricMatrix) -> Result<f64> {
    let p = sigma_star.dim();
    if sigma_hat.dim() != p {
        return Err(Error::DimensionMismatch { expected: p, found: sigma_hat.dim() });
    }
    match kind {
        LossKind::Linf => Ok((sigma_hat - sigma_star).max_abs()),
        LossKind::Frobenius => Ok((sigma_hat - sigma_star).frobenius_norm()),
        LossKind::Quadratic => {
            let chol = sigma_star.cholesky().ok_or(Error::NotPositiveDefinite)?;
            // Σ̂ Σ*⁻¹ = (Σ*⁻¹ Σ̂)ᵀ
            let m = chol.solve(sigma_hat.as_matrix()).transpose() - DMatrix::identity(p, p);
            Ok(m.singular_values().max())
        }
        LossKind::Entropy => {
            let star = sigma_star.cholesky().ok_or(Error::NotPositiveDefinite)?;
            let hat = sigma_hat.cholesky().ok_or(Error::NotPositiveDefinite)?;
            let trace = star.inverse().frobenius_inner(sigma_hat);
            let value = trace - (hat.log_det() - star.log_det()) - p as f64;
            Ok(value.max(0.0))
        }
    }
}
