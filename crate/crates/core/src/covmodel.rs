//! Linear covariance models `Σ_v = G0 + Σ v_i G_i` and the standard families:
//! correlation matrices, Brownian motion tree models and circular serial
//! correlation.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Cholesky, SymmetricMatrix};

/// Relative tolerance for the independence and orthogonality checks.
pub const MODEL_TOLERANCE: f64 = 1e-10;

/// Coordinates `v ∈ ℝʳ` of a point in a [`LinearCovarianceModel`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParameterVector(Vec<f64>);

impl ParameterVector {
    pub fn new(v: Vec<f64>) -> Self {
        Self(v)
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![0.0; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn to_dvector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.0)
    }

    /// `self + a · d`.
    pub fn step(&self, a: f64, d: &DVector<f64>) -> Self {
        Self(self.0.iter().zip(d.iter()).map(|(x, dx)| x + a * dx).collect())
    }

    pub fn scale(&self, a: f64) -> Self {
        Self(self.0.iter().map(|x| a * x).collect())
    }

    pub fn sup_norm(&self) -> f64 {
        self.0.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

impl From<Vec<f64>> for ParameterVector {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

impl From<DVector<f64>> for ParameterVector {
    fn from(v: DVector<f64>) -> Self {
        Self(v.iter().copied().collect())
    }
}

/// A validated family of covariance matrices `G0 + Σ v_i G_i`.
///
/// The basis is linearly independent and `G0` is orthogonal to its span
/// under `⟨A, B⟩ = tr(AB)`. Basis order fixes the meaning of each
/// coordinate of a [`ParameterVector`].
#[derive(Debug, Clone)]
pub struct LinearCovarianceModel {
    g0: SymmetricMatrix,
    basis: Vec<SymmetricMatrix>,
    gram: DMatrix<f64>,
    gram_chol: Cholesky,
}

impl LinearCovarianceModel {
    pub fn new(g0: SymmetricMatrix, basis: Vec<SymmetricMatrix>) -> Result<Self> {
        let p = g0.dim();
        if basis.is_empty() {
            return Err(Error::InvalidDimension { dim: 0, reason: "basis must be non-empty" });
        }
        if let Some(bad) = basis.iter().find(|g| g.dim() != p) {
            return Err(Error::DimensionMismatch { expected: p, found: bad.dim() });
        }

        let r = basis.len();
        let gram_sym = SymmetricMatrix::from_fn(r, |i, j| basis[i].frobenius_inner(&basis[j]));
        let ev = gram_sym.eigenvalues();
        let (lo, hi) = (ev[0], ev[r - 1]);
        if !(hi > 0.0) || lo < MODEL_TOLERANCE * hi {
            return Err(Error::LinearlyDependentBasis { ratio: if hi > 0.0 { lo / hi } else { 0.0 } });
        }
        let gram_chol = gram_sym.cholesky().ok_or(Error::LinearlyDependentBasis { ratio: lo / hi })?;

        let g0_norm = g0.frobenius_norm();
        for (index, g) in basis.iter().enumerate() {
            if g0.frobenius_inner(g).abs() > MODEL_TOLERANCE * g0_norm * g.frobenius_norm() {
                return Err(Error::NonOrthogonalG0 { index });
            }
        }

        Ok(Self { g0, basis, gram: gram_sym.into_matrix(), gram_chol })
    }

    /// Convenience constructor for models with `G0 = 0`.
    pub fn homogeneous(basis: Vec<SymmetricMatrix>) -> Result<Self> {
        let p = basis.first().map(SymmetricMatrix::dim).unwrap_or(0);
        Self::new(SymmetricMatrix::zeros(p), basis)
    }

    pub fn dim(&self) -> usize {
        self.g0.dim()
    }

    pub fn num_params(&self) -> usize {
        self.basis.len()
    }

    pub fn g0(&self) -> &SymmetricMatrix {
        &self.g0
    }

    pub fn basis(&self) -> &[SymmetricMatrix] {
        &self.basis
    }

    /// `tr(G_i G_j)`.
    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    pub fn has_zero_offset(&self) -> bool {
        self.g0.is_zero()
    }

    pub fn check_params(&self, v: &ParameterVector) -> Result<()> {
        if v.len() != self.num_params() {
            return Err(Error::DimensionMismatch { expected: self.num_params(), found: v.len() });
        }
        Ok(())
    }

    /// `Σ_v = G0 + Σ v_i G_i`, with no positivity check.
    pub fn sigma(&self, v: &ParameterVector) -> Result<SymmetricMatrix> {
        self.check_params(v)?;
        Ok(self.sigma_unchecked(v.as_slice()))
    }

    pub(crate) fn sigma_unchecked(&self, v: &[f64]) -> SymmetricMatrix {
        let p = self.dim();
        SymmetricMatrix::from_fn(p, |i, j| {
            self.basis
                .iter()
                .zip(v)
                .fold(self.g0.get(i, j), |acc, (g, vi)| acc + vi * g.get(i, j))
        })
    }

    /// Membership in the parameter set: `Σ_v ≻ 0`, decided by Cholesky.
    pub fn is_in_theta(&self, v: &ParameterVector) -> Result<bool> {
        Ok(self.sigma(v)?.is_positive_definite())
    }

    /// Coordinates of the Frobenius projection of `target − G0` onto the span
    /// of the basis: solves `gram · w = (tr(target G_j))_j`.
    pub fn project(&self, target: &SymmetricMatrix) -> Result<ParameterVector> {
        if target.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: target.dim() });
        }
        let rhs = DVector::from_iterator(
            self.num_params(),
            self.basis.iter().map(|g| target.frobenius_inner(g)),
        );
        Ok(self.gram_chol.solve_vector(&rhs).into())
    }

    /// Whether `m` lies in the affine model space `G0 + span(G_i)`, up to
    /// the model tolerance. Returns its coordinates when it does.
    pub fn coordinates_of(&self, m: &SymmetricMatrix) -> Result<Option<ParameterVector>> {
        let w = self.project(m)?;
        let residual = &(m - &self.sigma_unchecked(w.as_slice()));
        let scale = m.frobenius_norm().max(1.0);
        Ok((residual.frobenius_norm() <= 1e-9 * scale).then_some(w))
    }

    /// Unconstrained model: the full basis of symmetric `p × p` matrices,
    /// `E_ii` followed by `E_ij + E_ji` for `i < j`.
    pub fn unconstrained(p: usize) -> Result<Self> {
        if p < 1 {
            return Err(Error::InvalidDimension { dim: p, reason: "need p ≥ 1" });
        }
        let mut basis: Vec<SymmetricMatrix> = (0..p).map(|i| unit(p, i, i)).collect();
        basis.extend(upper_pairs(p).map(|(i, j)| unit(p, i, j)));
        Self::homogeneous(basis)
    }

    /// Diagonal covariance matrices, basis `E_11, …, E_pp`.
    pub fn diagonal(p: usize) -> Result<Self> {
        if p < 1 {
            return Err(Error::InvalidDimension { dim: p, reason: "need p ≥ 1" });
        }
        Self::homogeneous((0..p).map(|i| unit(p, i, i)).collect())
    }

    /// All `p × p` correlation matrices: `G0 = I`, basis `E_ij + E_ji`
    /// in lexicographic `(i, j)` order, `i < j`.
    pub fn correlation(p: usize) -> Result<Self> {
        if p < 2 {
            return Err(Error::InvalidDimension { dim: p, reason: "correlation model needs p ≥ 2" });
        }
        let basis = upper_pairs(p).map(|(i, j)| unit(p, i, j)).collect();
        Self::new(SymmetricMatrix::identity(p), basis)
    }

    /// Brownian motion tree model: one basis matrix `e_de(i) e_de(i)ᵀ` per
    /// node (root branch included), in node-id order.
    pub fn brownian_tree(tree: &TreeSpec) -> Result<Self> {
        tree.validate()?;
        let p = tree.leaves.len();
        if p < 2 {
            return Err(Error::InvalidTree(format!("need at least 2 leaves, got {p}")));
        }
        let descendants = tree.leaf_descendants();
        for i in 0..descendants.len() {
            for j in 0..i {
                if descendants[i] == descendants[j] {
                    return Err(Error::DegenerateModel(format!(
                        "nodes {j} and {i} have identical descendant leaf sets"
                    )));
                }
            }
        }
        let basis = descendants
            .iter()
            .map(|mask| {
                let e: Vec<f64> = mask.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
                SymmetricMatrix::outer(&e)
            })
            .collect();
        Self::homogeneous(basis).map_err(|e| match e {
            Error::LinearlyDependentBasis { .. } => Error::DegenerateModel(e.to_string()),
            other => other,
        })
    }

    /// Circular serial correlation: `G0 = 0`, basis `{I, C}` with `C` the
    /// adjacency matrix of the `p`-cycle.
    pub fn circular_serial(p: usize) -> Result<Self> {
        if p < 3 {
            return Err(Error::InvalidDimension { dim: p, reason: "circular model needs p ≥ 3" });
        }
        let cycle = SymmetricMatrix::from_fn(p, |i, j| {
            let d = i.abs_diff(j);
            if d == 1 || d == p - 1 {
                1.0
            } else {
                0.0
            }
        });
        Self::homogeneous(vec![SymmetricMatrix::identity(p), cycle])
    }

    /// Whether every diagonal matrix lies in the span of the basis.
    pub fn contains_diagonals(&self) -> bool {
        let p = self.dim();
        (0..p).all(|i| {
            let e = unit(p, i, i);
            let w = self.project(&e).expect("dimension checked");
            (&e - &self.sigma_linear_part(w.as_slice())).frobenius_norm() <= 1e-9
        })
    }

    /// Whether the identity lies in the span of the basis.
    pub fn contains_identity(&self) -> bool {
        let id = SymmetricMatrix::identity(self.dim());
        let w = self.project(&id).expect("dimension checked");
        (&id - &self.sigma_linear_part(w.as_slice())).frobenius_norm() <= 1e-9 * (self.dim() as f64).sqrt()
    }

    fn sigma_linear_part(&self, v: &[f64]) -> SymmetricMatrix {
        SymmetricMatrix::from_fn(self.dim(), |i, j| {
            self.basis.iter().zip(v).map(|(g, vi)| vi * g.get(i, j)).sum()
        })
    }
}

fn upper_pairs(p: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..p).flat_map(move |i| ((i + 1)..p).map(move |j| (i, j)))
}

/// `E_ij + E_ji` for `i ≠ j`, `E_ii` on the diagonal.
fn unit(p: usize, i: usize, j: usize) -> SymmetricMatrix {
    SymmetricMatrix::from_fn(p, |a, b| if (a == i && b == j) || (a == j && b == i) { 1.0 } else { 0.0 })
}

/// A rooted tree given by parent pointers, with an ordered list of leaves.
///
/// The leaf order fixes the row order of the covariance matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeSpec {
    pub parent: Vec<Option<usize>>,
    pub leaves: Vec<usize>,
}

impl TreeSpec {
    pub fn new(parent: Vec<Option<usize>>, leaves: Vec<usize>) -> Result<Self> {
        let tree = Self { parent, leaves };
        tree.validate()?;
        Ok(tree)
    }

    /// Star tree: leaves `0..p`, root `p`.
    pub fn star(p: usize) -> Self {
        let mut parent = vec![Some(p); p];
        parent.push(None);
        Self { parent, leaves: (0..p).collect() }
    }

    pub fn num_nodes(&self) -> usize {
        self.parent.len()
    }

    pub fn root(&self) -> Option<usize> {
        self.parent.iter().position(Option::is_none)
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.parent.len();
        let roots = self.parent.iter().filter(|p| p.is_none()).count();
        if roots != 1 {
            return Err(Error::InvalidTree(format!("expected exactly one root, found {roots}")));
        }
        for (i, p) in self.parent.iter().enumerate() {
            match p {
                Some(q) if *q >= m => {
                    return Err(Error::InvalidTree(format!("node {i} has unknown parent {q}")))
                }
                Some(q) if *q == i => return Err(Error::InvalidTree(format!("node {i} is its own parent"))),
                _ => {}
            }
        }
        // Every node must reach the root within m steps.
        for start in 0..m {
            let mut node = start;
            let mut steps = 0;
            while let Some(q) = self.parent[node] {
                node = q;
                steps += 1;
                if steps > m {
                    return Err(Error::InvalidTree(format!("cycle through node {start}")));
                }
            }
        }
        let mut has_child = vec![false; m];
        for q in self.parent.iter().flatten() {
            has_child[*q] = true;
        }
        let mut is_leaf = vec![false; m];
        for &leaf in &self.leaves {
            if leaf >= m {
                return Err(Error::InvalidTree(format!("leaf {leaf} is not a node")));
            }
            if is_leaf[leaf] {
                return Err(Error::InvalidTree(format!("leaf {leaf} listed twice")));
            }
            if has_child[leaf] {
                return Err(Error::InvalidTree(format!("leaf {leaf} has children")));
            }
            is_leaf[leaf] = true;
        }
        if let Some(i) = (0..m).find(|&i| !has_child[i] && !is_leaf[i]) {
            return Err(Error::InvalidTree(format!("childless node {i} is not listed as a leaf")));
        }
        Ok(())
    }

    /// For each node, which leaves (by position in `leaves`) descend from it.
    /// Every leaf descends from itself.
    pub fn leaf_descendants(&self) -> Vec<Vec<bool>> {
        let m = self.parent.len();
        let mut out = vec![vec![false; self.leaves.len()]; m];
        for (k, &leaf) in self.leaves.iter().enumerate() {
            let mut node = Some(leaf);
            while let Some(i) = node {
                out[i][k] = true;
                node = self.parent[i];
            }
        }
        out
    }
}
