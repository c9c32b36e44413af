//! Dense symmetric matrices and the Cholesky machinery used for every
//! positive-definiteness decision in the crate.

use std::fmt;
use std::ops::{Add, Sub};

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// A real symmetric `p × p` matrix.
///
/// Every constructor writes the lower triangle and mirrors it, so
/// `m[(i, j)] == m[(j, i)]` holds bit-for-bit.
#[derive(Clone, PartialEq)]
pub struct SymmetricMatrix(DMatrix<f64>);

impl SymmetricMatrix {
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = DMatrix::zeros(dim, dim);
        for j in 0..dim {
            for i in j..dim {
                let x = f(i, j);
                m[(i, j)] = x;
                m[(j, i)] = x;
            }
        }
        Self(m)
    }

    pub fn zeros(dim: usize) -> Self {
        Self(DMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        Self::from_fn(diag.len(), |i, j| if i == j { diag[i] } else { 0.0 })
    }

    /// `u uᵀ`.
    pub fn outer(u: &[f64]) -> Self {
        Self::from_fn(u.len(), |i, j| u[i] * u[j])
    }

    /// Builds from row-major rows, rejecting anything that is not square and
    /// exactly symmetric.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::InvalidDimension { dim, reason: "matrix must be non-empty" });
        }
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: row.len() });
            }
        }
        for i in 0..dim {
            for j in 0..i {
                if rows[i][j] != rows[j][i] {
                    return Err(Error::NotSymmetric { row: i, col: j });
                }
            }
        }
        Ok(Self::from_fn(dim, |i, j| rows[i][j]))
    }

    /// `(A + Aᵀ) / 2` of a square matrix.
    pub fn symmetrize(m: &DMatrix<f64>) -> Self {
        assert!(m.is_square(), "symmetrize needs a square matrix");
        Self::from_fn(m.nrows(), |i, j| 0.5 * (m[(i, j)] + m[(j, i)]))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim()).map(|i| self.0.row(i).iter().copied().collect()).collect()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.0[(i, i)]).collect()
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    pub fn scale(&self, a: f64) -> Self {
        Self::from_fn(self.dim(), |i, j| a * self.0[(i, j)])
    }

    /// `self + a · other`.
    pub fn axpy(&self, a: f64, other: &Self) -> Self {
        assert_eq!(self.dim(), other.dim());
        Self::from_fn(self.dim(), |i, j| self.0[(i, j)] + a * other.0[(i, j)])
    }

    /// `⟨A, B⟩ = tr(AB)`.
    pub fn frobenius_inner(&self, other: &Self) -> f64 {
        self.0.dot(&other.0)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.amax()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0.0)
    }

    pub fn cholesky(&self) -> Option<Cholesky> {
        Cholesky::new(self)
    }

    pub fn is_positive_definite(&self) -> bool {
        self.cholesky().is_some()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.0.clone()).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    pub fn max_eigenvalue(&self) -> f64 {
        *self.eigenvalues().last().expect("non-empty matrix")
    }
}

impl fmt::Debug for SymmetricMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("SymmetricMatrix").field(&self.rows()).finish()
    }
}

impl Add for &SymmetricMatrix {
    type Output = SymmetricMatrix;

    fn add(self, rhs: Self) -> SymmetricMatrix {
        self.axpy(1.0, rhs)
    }
}

impl Sub for &SymmetricMatrix {
    type Output = SymmetricMatrix;

    fn sub(self, rhs: Self) -> SymmetricMatrix {
        self.axpy(-1.0, rhs)
    }
}

/// Lower-triangular Cholesky factor `A = L Lᵀ`.
#[derive(Debug, Clone)]
pub struct Cholesky {
    l: DMatrix<f64>,
}

impl Cholesky {
    /// Returns `None` unless every pivot clears rounding noise, i.e. exceeds
    /// `n ε` times its diagonal entry. Singular matrices thus fail reliably.
    pub fn new(a: &SymmetricMatrix) -> Option<Self> {
        let n = a.dim();
        let a = a.as_matrix();
        let floor = n as f64 * f64::EPSILON;
        let mut l = DMatrix::<f64>::zeros(n, n);
        for j in 0..n {
            let mut d = a[(j, j)];
            for k in 0..j {
                d -= l[(j, k)] * l[(j, k)];
            }
            if !(d > floor * a[(j, j)]) || !d.is_finite() {
                return None;
            }
            let d = d.sqrt();
            l[(j, j)] = d;
            for i in (j + 1)..n {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / d;
            }
        }
        Some(Self { l })
    }

    pub fn factor(&self) -> &DMatrix<f64> {
        &self.l
    }

    pub fn log_det(&self) -> f64 {
        2.0 * self.l.diagonal().iter().map(|d| d.ln()).sum::<f64>()
    }

    /// `L⁻¹ B` by forward substitution.
    pub fn solve_lower(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        self.l
            .solve_lower_triangular(b)
            .expect("Cholesky factor has a positive diagonal")
    }

    /// `A⁻¹ B`.
    pub fn solve(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        let y = self.solve_lower(b);
        self.l
            .tr_solve_lower_triangular(&y)
            .expect("Cholesky factor has a positive diagonal")
    }

    pub fn solve_vector(&self, b: &DVector<f64>) -> DVector<f64> {
        let y = self
            .l
            .solve_lower_triangular(b)
            .expect("Cholesky factor has a positive diagonal");
        self.l
            .tr_solve_lower_triangular(&y)
            .expect("Cholesky factor has a positive diagonal")
    }

    /// `A⁻¹`, symmetrized.
    pub fn inverse(&self) -> SymmetricMatrix {
        let n = self.l.nrows();
        SymmetricMatrix::symmetrize(&self.solve(&DMatrix::identity(n, n)))
    }

    /// `L⁻¹ B L⁻ᵀ`, which shares its spectrum with `A^{-1/2} B A^{-1/2}`.
    pub fn whiten(&self, b: &SymmetricMatrix) -> SymmetricMatrix {
        let y = self.solve_lower(b.as_matrix());
        let z = self.solve_lower(&y.transpose());
        SymmetricMatrix::symmetrize(&z)
    }
}
