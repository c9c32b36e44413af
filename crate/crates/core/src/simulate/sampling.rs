use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::estimate::SampleCovariance;
use crate::linalg::SymmetricMatrix;

fn standard_normal_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<f64> {
    // column-major fill, one draw per entry
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

/// `n` rows drawn i.i.d. from `N(mean, Σ)` as `mean + L z`.
pub fn sample_gaussian<R: Rng + ?Sized>(
    mean: &[f64],
    sigma: &SymmetricMatrix,
    n: usize,
    rng: &mut R,
) -> Result<DMatrix<f64>> {
    let p = sigma.dim();
    if mean.len() != p {
        return Err(Error::DimensionMismatch { expected: p, found: mean.len() });
    }
    let chol = sigma.cholesky().ok_or(Error::NotPositiveDefinite)?;
    let z = standard_normal_matrix(n, p, rng);
    let mut x = z * chol.factor().transpose();
    for mut row in x.row_iter_mut() {
        for (xi, mi) in row.iter_mut().zip(mean) {
            *xi += mi;
        }
    }
    Ok(x)
}

/// Mean-centered sample covariance with divisor `n`.
pub fn sample_covariance(data: &DMatrix<f64>) -> Result<SampleCovariance> {
    let (n, p) = data.shape();
    if n < 2 {
        return Err(Error::InsufficientData { needed: 2, got: n });
    }
    if p == 0 {
        return Err(Error::InvalidDimension { dim: 0, reason: "data needs at least one column" });
    }
    let mean: Vec<f64> = data.column_iter().map(|c| c.mean()).collect();
    let mut centered = data.clone();
    for (j, mut col) in centered.column_iter_mut().enumerate() {
        col.add_scalar_mut(-mean[j]);
    }
    let s = centered.transpose() * &centered / n as f64;
    SampleCovariance::with_mean(SymmetricMatrix::symmetrize(&s), n, mean)
}

/// White Wishart `W_p(n_dof, I)` drawn as `A Aᵀ` with `A` a `p × n_dof`
/// standard normal matrix.
pub fn sample_wishart<R: Rng + ?Sized>(n_dof: usize, p: usize, rng: &mut R) -> Result<SymmetricMatrix> {
    if n_dof < 1 || p < 1 {
        return Err(Error::InvalidRange(format!("need n_dof, p ≥ 1, got n_dof = {n_dof}, p = {p}")));
    }
    let a = standard_normal_matrix(p, n_dof, rng);
    Ok(SymmetricMatrix::symmetrize(&(&a * a.transpose())))
}

/// `n` rows of a multivariate t with identity scale and `d` degrees of
/// freedom: `z / √(u/d)` with `z ~ N(0, I)` and `u ~ χ²_d`.
pub fn sample_multivariate_t<R: Rng + ?Sized>(d: f64, p: usize, n: usize, rng: &mut R) -> Result<DMatrix<f64>> {
    if !(d >= 1.0) || !d.is_finite() {
        return Err(Error::InvalidRange(format!("degrees of freedom must be finite and ≥ 1, got {d}")));
    }
    if p < 1 {
        return Err(Error::InvalidRange("need p ≥ 1".into()));
    }
    let chi = ChiSquared::new(d).map_err(|e| Error::InvalidRange(e.to_string()))?;
    let mut x = DMatrix::zeros(n, p);
    for i in 0..n {
        for j in 0..p {
            x[(i, j)] = StandardNormal.sample(rng);
        }
        let w = (chi.sample(rng) / d).sqrt().recip();
        for j in 0..p {
            x[(i, j)] *= w;
        }
    }
    Ok(x)
}
