#![allow(dead_code)]

use lincov::covmodel::{LinearCovarianceModel, ParameterVector, TreeSpec};
use lincov::estimate::{gradient, hessian, log_likelihood, SampleCovariance};
use lincov::linalg::SymmetricMatrix;
use lincov::simulate::sample_wishart;
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

pub fn random_symmetric(p: usize, rng: &mut ChaCha8Rng) -> SymmetricMatrix {
    SymmetricMatrix::symmetrize(&normal_matrix(p, p, rng))
}

/// Well-conditioned positive definite matrix.
pub fn random_spd(p: usize, rng: &mut ChaCha8Rng) -> SymmetricMatrix {
    let a = normal_matrix(p, p + 2, rng);
    SymmetricMatrix::symmetrize(&(&a * a.transpose() / (p + 2) as f64)).axpy(0.3, &SymmetricMatrix::identity(p))
}

pub fn to_correlation(m: &SymmetricMatrix) -> SymmetricMatrix {
    let d: Vec<f64> = m.diagonal().iter().map(|x| x.sqrt()).collect();
    SymmetricMatrix::from_fn(m.dim(), |i, j| m.get(i, j) / (d[i] * d[j]))
}

pub fn random_sample(p: usize, n: usize, rng: &mut ChaCha8Rng) -> SampleCovariance {
    SampleCovariance::new(random_spd(p, rng), n).unwrap()
}

/// Random tree with `p` leaves; retries until the topology is accepted.
pub fn random_tree(p: usize, rng: &mut ChaCha8Rng) -> TreeSpec {
    loop {
        let internal = rng.random_range(1..=3usize);
        let mut parent: Vec<Option<usize>> = vec![None];
        for i in 1..internal {
            parent.push(Some(rng.random_range(0..i)));
        }
        for _ in 0..p {
            parent.push(Some(rng.random_range(0..internal)));
        }
        let leaves: Vec<usize> = (internal..internal + p).collect();
        if let Ok(tree) = TreeSpec::new(parent, leaves) {
            if LinearCovarianceModel::brownian_tree(&tree).is_ok() {
                return tree;
            }
        }
    }
}

/// A model of one of several families together with a parameter at which
/// `Σ_v ≻ 0`.
pub fn random_model(p: usize, rng: &mut ChaCha8Rng) -> (LinearCovarianceModel, ParameterVector) {
    let kind = rng.random_range(0..6);
    match kind {
        0 => {
            let m = LinearCovarianceModel::unconstrained(p).unwrap();
            let v = m.coordinates_of(&random_spd(p, rng)).unwrap().unwrap();
            (m, v)
        }
        1 => {
            let m = LinearCovarianceModel::correlation(p).unwrap();
            let v = m.coordinates_of(&to_correlation(&random_spd(p, rng))).unwrap().unwrap();
            (m, v)
        }
        2 => {
            let m = LinearCovarianceModel::diagonal(p).unwrap();
            let v: Vec<f64> = (0..p).map(|_| rng.random_range(0.2..3.0)).collect();
            (m, v.into())
        }
        3 if p >= 3 => {
            let m = LinearCovarianceModel::circular_serial(p).unwrap();
            let v = vec![rng.random_range(0.5..2.0), rng.random_range(-0.2..0.2)];
            (m, v.into())
        }
        4 => {
            let m = LinearCovarianceModel::brownian_tree(&random_tree(p, rng)).unwrap();
            let v: Vec<f64> = (0..m.num_params()).map(|_| rng.random_range(0.2..2.0)).collect();
            (m, v.into())
        }
        _ => {
            let k = rng.random_range(1..=p * (p + 1) / 2);
            let mut basis = vec![SymmetricMatrix::identity(p)];
            for _ in 1..k {
                basis.push(random_symmetric(p, rng));
            }
            let m = LinearCovarianceModel::homogeneous(basis).unwrap();
            let mut v = vec![2.0 + p as f64];
            v.extend((1..k).map(|_| rng.random_range(-0.3..0.3)));
            (m, v.into())
        }
    }
}

fn shifted(v: &ParameterVector, i: usize, h: f64) -> ParameterVector {
    let mut w = v.as_slice().to_vec();
    w[i] += h;
    w.into()
}

/// Worst relative error of central differences of `ℓ` and of the analytic
/// gradient against the analytic gradient and Hessian.
pub fn finite_difference_errors(model: &LinearCovarianceModel, v: &ParameterVector, s: &SampleCovariance) -> (f64, f64) {
    let g = gradient(model, v, s).unwrap();
    let h = hessian(model, v, s).unwrap();
    let r = v.len();
    let mut g_fd = DVector::zeros(r);
    let mut h_fd = DMatrix::zeros(r, r);
    for i in 0..r {
        let step = 1e-5 * v.as_slice()[i].abs().max(1.0);
        let up = shifted(v, i, step);
        let down = shifted(v, i, -step);
        g_fd[i] = (log_likelihood(model, &up, s).unwrap() - log_likelihood(model, &down, s).unwrap()) / (2.0 * step);
        let dg = (gradient(model, &up, s).unwrap() - gradient(model, &down, s).unwrap()) / (2.0 * step);
        h_fd.set_column(i, &dg);
    }
    let g_err = (&g_fd - &g).norm() / g.norm().max(1.0);
    let h_err = (&h_fd - &h).norm() / h.norm().max(1.0);
    (g_err, h_err)
}

/// `L diag(b) Lᵀ` with `S = L Lᵀ`; lies in `0 ≺ Σ ≺ 2S` iff `0 < b_i < 2`.
pub fn congruent(s: &SampleCovariance, b: Vec<f64>) -> SymmetricMatrix {
    let chol = s.matrix().cholesky().unwrap();
    let l = chol.factor();
    SymmetricMatrix::symmetrize(&(l * DMatrix::from_diagonal(&DVector::from_vec(b)) * l.transpose()))
}

/// `A = Σ x xᵀ Σ` with `x` the bottom eigenvector of `2S - Σ`, so that
/// `∇_A∇_A ℓ = -(n/2) (xᵀΣx) xᵀ(2S - Σ)x ≥ 0`.
pub fn witness_direction(sigma: &SymmetricMatrix, s: &SampleCovariance) -> SymmetricMatrix {
    let gap = s.matrix().scale(2.0).axpy(-1.0, sigma);
    let eig = SymmetricEigen::new(gap.as_matrix().clone());
    let k = eig.eigenvalues.imin();
    let x = eig.eigenvectors.column(k).into_owned();
    let sx = sigma.as_matrix() * x;
    SymmetricMatrix::outer(sx.as_slice())
}

/// Random tree or circular model with a small-sample covariance, so that
/// the least squares estimate is frequently outside the region.
pub fn safe_init_instance(seed: u64) -> (LinearCovarianceModel, SampleCovariance) {
    let mut r = rng(seed);
    let p = r.random_range(3..=6usize);
    let model = if r.random_bool(0.5) {
        LinearCovarianceModel::brownian_tree(&random_tree(p, &mut r)).unwrap()
    } else {
        LinearCovarianceModel::circular_serial(p).unwrap()
    };
    let n = r.random_range(p + 1..=3 * p);
    let sigma = to_correlation(&random_spd(p, &mut r));
    let l = sigma.cholesky().unwrap();
    let w = sample_wishart(n, p, &mut r).unwrap();
    let s = SymmetricMatrix::symmetrize(&(l.factor() * w.as_matrix() * l.factor().transpose() / n as f64));
    (model, SampleCovariance::new(s, n).unwrap())
}
