//! Monte Carlo experiments behind the region, Newton, loss and robustness
//! studies. Every experiment is a pure function of its arguments: the same
//! seed gives the same report on any number of threads.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use super::exec::{map_reps, replication_rng, MonteCarlo};
use super::report::{Estimate, ExperimentReport, Param, ReportRow};
use super::sampling::{sample_covariance, sample_gaussian, sample_multivariate_t, sample_wishart};
use crate::covmodel::{LinearCovarianceModel, ParameterVector};
use crate::error::{Error, Result};
use crate::estimate::{
    in_delta_region, least_squares, log_likelihood, loss, newton_fixed_steps, newton_raphson_mle, sigma_in_delta,
    FitResult, LossKind, NewtonOptions, SampleCovariance,
};
use crate::linalg::SymmetricMatrix;
use crate::rmt::{lse_region_lower_bound, prob_true_in_region};

/// Correlation matrix whose `k`-th upper-triangular entry in lexicographic
/// order is `1/(k + 1)`: `[[1, 1/2, 1/3], [1/2, 1, 1/4], [1/3, 1/4, 1]]`
/// for `p = 3`.
pub fn reciprocal_correlation(p: usize) -> Result<SymmetricMatrix> {
    let model = LinearCovarianceModel::correlation(p)?;
    let v: Vec<f64> = (1..=model.num_params()).map(|k| 1.0 / (k as f64 + 1.0)).collect();
    let sigma = model.sigma(&v.into())?;
    if !sigma.is_positive_definite() {
        return Err(Error::NotPositiveDefinite);
    }
    Ok(sigma)
}

/// Star-tree parameters `v_i = i` on the leaf branches and `1` on the root.
pub fn star_tree_truth(p: usize) -> ParameterVector {
    let mut v: Vec<f64> = (1..=p).map(|i| i as f64).collect();
    v.push(1.0);
    v.into()
}

fn check_reps(mc: &MonteCarlo) -> Result<()> {
    if mc.reps == 0 {
        return Err(Error::InvalidRange("reps must be at least 1".into()));
    }
    Ok(())
}

fn check_sample_sizes(n_grid: &[usize]) -> Result<()> {
    if n_grid.is_empty() {
        return Err(Error::InvalidRange("sample-size grid is empty".into()));
    }
    if let Some(n) = n_grid.iter().find(|&&n| n < 2) {
        return Err(Error::InvalidRange(format!("sample sizes must be ≥ 2, got {n}")));
    }
    Ok(())
}

fn draw_sample<R: Rng + ?Sized>(sigma: &SymmetricMatrix, n: usize, rng: &mut R) -> Result<SampleCovariance> {
    let zeros = vec![0.0; sigma.dim()];
    sample_covariance(&sample_gaussian(&zeros, sigma, n, rng)?)
}

fn collect<T>(results: Vec<Result<T>>) -> Result<Vec<T>> {
    results.into_iter().collect()
}

/// Frequency of `λ_min(W_{n-1}) > n/2` for white Wishart matrices, next to
/// its Tracy-Widom approximation.
///
/// Rows: `series ∈ {simulated, tracy_widom}`, `p`, `n`. The approximation
/// row is omitted where it is undefined (`n < p + 3`).
pub fn experiment_min_eigenvalue(p: usize, n_grid: &[usize], mc: MonteCarlo) -> Result<ExperimentReport> {
    check_reps(&mc)?;
    check_sample_sizes(n_grid)?;
    if p < 1 {
        return Err(Error::InvalidRange("need p ≥ 1".into()));
    }
    let mut report = ExperimentReport::new("mineig", &["series", "p", "n"], mc.seed);
    for (g, &n) in n_grid.iter().enumerate() {
        let half = SymmetricMatrix::identity(p).scale(n as f64 / 2.0);
        let flags = collect(map_reps(mc.exec, mc.reps, |rep| {
            let mut rng = replication_rng(mc.seed, g as u64, rep);
            let w = sample_wishart(n - 1, p, &mut rng)?;
            Ok(w.axpy(-1.0, &half).is_positive_definite())
        }))?;
        report.push(vec!["simulated".into(), p.into(), n.into()], Estimate::from_flags(flags));
        if n >= p + 3 {
            report.push(vec!["tracy_widom".into(), p.into(), n.into()], Estimate::exact(prob_true_in_region(n, p)?));
        }
    }
    Ok(report)
}

/// Monte Carlo frequency of `0 ≺ Σ* ≺ 2S_n` for Gaussian samples from `Σ*`.
pub fn true_in_region_frequency(sigma_star: &SymmetricMatrix, n: usize, mc: MonteCarlo) -> Result<Estimate> {
    check_reps(&mc)?;
    check_sample_sizes(&[n])?;
    let flags = collect(map_reps(mc.exec, mc.reps, |rep| {
        let mut rng = replication_rng(mc.seed, 0, rep);
        let s = draw_sample(sigma_star, n, &mut rng)?;
        Ok(sigma_in_delta(sigma_star, s.matrix()))
    }))?;
    Ok(Estimate::from_flags(flags))
}

/// How often the least squares estimate lies in `0 ≺ Σ ≺ 2S_n`.
///
/// Rows per `n`: `lse_in_region` and `true_in_region` (simulated),
/// `tracy_widom` (approximation for the truth) and `lse_bound` (the
/// exponential lower bound, only where its hypotheses hold, with `κ` the
/// condition number of `Σ*`).
pub fn experiment_lse_region(
    model: &LinearCovarianceModel,
    v_star: &ParameterVector,
    n_grid: &[usize],
    mc: MonteCarlo,
) -> Result<ExperimentReport> {
    check_reps(&mc)?;
    check_sample_sizes(n_grid)?;
    let sigma_star = model.sigma(v_star)?;
    if !sigma_star.is_positive_definite() {
        return Err(Error::NotPositiveDefinite);
    }
    let p = model.dim();
    let ev = sigma_star.eigenvalues();
    let kappa = ev[p - 1] / ev[0];

    let mut report = ExperimentReport::new("lse-region", &["series", "n"], mc.seed);
    for (g, &n) in n_grid.iter().enumerate() {
        let outcomes = collect(map_reps(mc.exec, mc.reps, |rep| {
            let mut rng = replication_rng(mc.seed, g as u64, rep);
            let s = draw_sample(&sigma_star, n, &mut rng)?;
            let v_bar = least_squares(model, &s)?;
            Ok((in_delta_region(model, &v_bar, &s), sigma_in_delta(&sigma_star, s.matrix())))
        }))?;
        report.push(vec!["lse_in_region".into(), n.into()], Estimate::from_flags(outcomes.iter().map(|o| o.0)));
        report.push(vec!["true_in_region".into(), n.into()], Estimate::from_flags(outcomes.iter().map(|o| o.1)));
        if n >= p + 3 {
            report.push(vec!["tracy_widom".into(), n.into()], Estimate::exact(prob_true_in_region(n, p)?));
        }
        if let Ok(bound) = lse_region_lower_bound(n, p, kappa) {
            report.push(vec!["lse_bound".into(), n.into()], Estimate::exact(bound));
        }
    }
    Ok(report)
}

/// Summary and per-replication likelihood-ratio trajectories of
/// [`experiment_newton_paths`].
#[derive(Debug, Clone, PartialEq)]
pub struct NewtonPathsReport {
    pub summary: ExperimentReport,
    pub paths: ExperimentReport,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Landing {
    NotPositiveDefinite,
    OutsideTwoS,
    Inside,
    Breakdown,
}

struct PathOutcome {
    landing: Landing,
    converged: bool,
    in_delta: bool,
    sandwich: bool,
    iterations: usize,
    /// `ℓ(v_k) - ℓ(v*)` for `k = 0..=steps`.
    log_ratios: Vec<f64>,
    /// `ℓ(S_n) - ℓ(v*)`.
    sample_log_ratio: f64,
}

/// Absolute slack on log-likelihood ratios, i.e. relative slack on ratios.
const SANDWICH_SLACK: f64 = 1e-9;

/// Newton-Raphson on the correlation model from the least squares start,
/// for data drawn from the correlation matrix `Σ*`.
///
/// Replications whose least squares estimate is not positive definite are
/// skipped (row `lse_not_pd` reports how often that happened over all
/// replications). For the others, two iterations run side by side:
///
/// * `steps` plain Newton updates with no safeguards. Rows `mle_not_pd` and
///   `mle_outside_2s` give how often the final iterate is not positive
///   definite, and how often it is positive definite but `2S_n - Σ̂ ⊁ 0`.
///   `undamped_breakdown` counts singular `Σ` or Hessian along the way.
/// * the line-searched fit. Rows `damped_converged`, `damped_outside_delta`
///   and `sandwich_holds` (share of converged fits with
///   `1 ≤ L(Σ̂)/L(Σ*) ≤ L(S_n)/L(Σ*)`), plus `iterations`.
///
/// The `paths` report holds, for the first `max_paths` used replications per
/// `n`, the likelihood ratio `L(Σ_k)/L(Σ*)` of the line-searched iterates
/// `k = 0..=steps` and a final `step = sample` row with `L(S_n)/L(Σ*)`.
pub fn experiment_newton_paths(
    sigma_star: &SymmetricMatrix,
    n_grid: &[usize],
    steps: usize,
    max_paths: usize,
    mc: MonteCarlo,
) -> Result<NewtonPathsReport> {
    check_reps(&mc)?;
    check_sample_sizes(n_grid)?;
    let p = sigma_star.dim();
    let model = LinearCovarianceModel::correlation(p)?;
    let v_star = model
        .coordinates_of(sigma_star)?
        .ok_or_else(|| Error::InvalidRange("true covariance must be a correlation matrix".into()))?;
    if !sigma_star.is_positive_definite() {
        return Err(Error::NotPositiveDefinite);
    }
    let opts = NewtonOptions::default();

    let mut summary = ExperimentReport::new("newton-paths", &["series", "p", "n"], mc.seed);
    let mut paths = ExperimentReport::new("newton-paths-trajectories", &["p", "n", "rep", "step"], mc.seed);
    for (g, &n) in n_grid.iter().enumerate() {
        let outcomes = collect(map_reps(mc.exec, mc.reps, |rep| -> Result<Option<PathOutcome>> {
            let mut rng = replication_rng(mc.seed, g as u64, rep);
            let s = draw_sample(sigma_star, n, &mut rng)?;
            let v_bar = least_squares(&model, &s)?;
            if !s.is_full_rank() || !model.is_in_theta(&v_bar)? {
                return Ok(None);
            }

            let undamped = newton_fixed_steps(&model, &s, &v_bar, steps)?;
            let landing = if undamped.broke_down {
                Landing::Breakdown
            } else {
                let sigma_hat = model.sigma(undamped.last())?;
                if !sigma_hat.is_positive_definite() {
                    Landing::NotPositiveDefinite
                } else if sigma_in_delta(&sigma_hat, s.matrix()) {
                    Landing::Inside
                } else {
                    Landing::OutsideTwoS
                }
            };

            let fit = match newton_raphson_mle(&model, &s, &v_bar, &opts) {
                Ok(fit) => fit,
                Err(Error::MaxIterationsExceeded(fit)) => *fit,
                Err(e) => return Err(e),
            };
            let ll_star = log_likelihood(&model, &v_star, &s)?;
            let logdet_s = s.matrix().cholesky().ok_or(Error::SingularSample)?.log_det();
            let ll_sample = -0.5 * n as f64 * (logdet_s + p as f64);
            Ok(Some(damped_outcome(&fit, landing, ll_star, ll_sample, steps)))
        }))?;

        let used: Vec<&PathOutcome> = outcomes.iter().flatten().collect();
        let row = |series: &str| vec![Param::from(series), p.into(), n.into()];
        summary.push(row("lse_not_pd"), Estimate::from_flags(outcomes.iter().map(Option::is_none)));
        for (series, landing) in [
            ("mle_not_pd", Landing::NotPositiveDefinite),
            ("mle_outside_2s", Landing::OutsideTwoS),
            ("undamped_breakdown", Landing::Breakdown),
        ] {
            summary.push(row(series), Estimate::from_flags(used.iter().map(|o| o.landing == landing)));
        }
        summary.push(row("damped_converged"), Estimate::from_flags(used.iter().map(|o| o.converged)));
        summary.push(row("damped_outside_delta"), Estimate::from_flags(used.iter().map(|o| !o.in_delta)));
        let converged: Vec<&&PathOutcome> = used.iter().filter(|o| o.converged).collect();
        summary.push(row("sandwich_holds"), Estimate::from_flags(converged.iter().map(|o| o.sandwich)));
        let iterations: Vec<f64> = converged.iter().map(|o| o.iterations as f64).collect();
        summary.push(row("iterations"), Estimate::from_values(&iterations));

        for (rep, o) in outcomes.iter().enumerate().filter_map(|(r, o)| o.as_ref().map(|o| (r, o))).take(max_paths) {
            let mut push = |step: Param, log_ratio: f64| {
                paths.rows.push(ReportRow {
                    params: vec![p.into(), n.into(), rep.into(), step],
                    estimate: log_ratio.exp(),
                    stderr: 0.0,
                    reps: 1,
                });
            };
            for (k, lr) in o.log_ratios.iter().enumerate() {
                push(k.into(), *lr);
            }
            push("sample".into(), o.sample_log_ratio);
        }
    }
    Ok(NewtonPathsReport { summary, paths })
}

fn damped_outcome(fit: &FitResult, landing: Landing, ll_star: f64, ll_sample: f64, steps: usize) -> PathOutcome {
    let last = *fit.loglik_trace.last().expect("trace holds the start");
    let log_ratios = (0..=steps)
        .map(|k| fit.loglik_trace.get(k).copied().unwrap_or(last) - ll_star)
        .collect();
    let ratio = fit.loglik - ll_star;
    let sample_log_ratio = ll_sample - ll_star;
    PathOutcome {
        landing,
        converged: fit.converged,
        in_delta: fit.diagnostics.in_delta,
        sandwich: ratio >= -SANDWICH_SLACK && ratio <= sample_log_ratio + SANDWICH_SLACK,
        iterations: fit.iterations,
        log_ratios,
        sample_log_ratio,
    }
}

fn label(v: &ParameterVector) -> String {
    v.as_slice().iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";")
}

/// Loss of the MLE against the least squares estimator.
///
/// Rows are keyed by `v_star` (coordinates joined by `;`), `n`, `estimator`
/// and `quantity`. For each loss kind there are rows for `mle`, `lse` and
/// the paired difference `mle_minus_lse`, averaged over replications whose
/// least squares estimate is positive definite (the MLE is started there).
/// The row (`lse`, `prob_not_pd`) gives how often it was not.
pub fn experiment_losses(
    model: &LinearCovarianceModel,
    v_star_list: &[ParameterVector],
    n_grid: &[usize],
    mc: MonteCarlo,
) -> Result<ExperimentReport> {
    check_reps(&mc)?;
    check_sample_sizes(n_grid)?;
    if v_star_list.is_empty() {
        return Err(Error::InvalidRange("no true parameters given".into()));
    }
    let opts = NewtonOptions::default();
    let mut report = ExperimentReport::new("losses", &["v_star", "n", "estimator", "quantity"], mc.seed);
    for (vi, v_star) in v_star_list.iter().enumerate() {
        let sigma_star = model.sigma(v_star)?;
        if !sigma_star.is_positive_definite() {
            return Err(Error::NotPositiveDefinite);
        }
        let name = label(v_star);
        for (ni, &n) in n_grid.iter().enumerate() {
            let grid = (vi * n_grid.len() + ni) as u64;
            let outcomes = collect(map_reps(mc.exec, mc.reps, |rep| -> Result<Option<[[f64; 4]; 2]>> {
                let mut rng = replication_rng(mc.seed, grid, rep);
                let s = draw_sample(&sigma_star, n, &mut rng)?;
                let v_bar = least_squares(model, &s)?;
                let sigma_bar = model.sigma(&v_bar)?;
                if !sigma_bar.is_positive_definite() || !s.is_full_rank() {
                    return Ok(None);
                }
                let fit = match newton_raphson_mle(model, &s, &v_bar, &opts) {
                    Ok(fit) => fit,
                    Err(Error::MaxIterationsExceeded(fit)) => *fit,
                    Err(e) => return Err(e),
                };
                let mut out = [[0.0; 4]; 2];
                for (k, kind) in LossKind::ALL.into_iter().enumerate() {
                    out[0][k] = loss(kind, &fit.sigma_hat, &sigma_star)?;
                    out[1][k] = loss(kind, &sigma_bar, &sigma_star)?;
                }
                Ok(Some(out))
            }))?;

            let row = |est: &str, q: &str| vec![Param::from(name.as_str()), n.into(), est.into(), q.into()];
            report.push(row("lse", "prob_not_pd"), Estimate::from_flags(outcomes.iter().map(Option::is_none)));
            let used: Vec<&[[f64; 4]; 2]> = outcomes.iter().flatten().collect();
            for (k, kind) in LossKind::ALL.into_iter().enumerate() {
                let mle: Vec<f64> = used.iter().map(|o| o[0][k]).collect();
                let lse: Vec<f64> = used.iter().map(|o| o[1][k]).collect();
                let diff: Vec<f64> = used.iter().map(|o| o[0][k] - o[1][k]).collect();
                report.push(row("mle", kind.name()), Estimate::from_values(&mle));
                report.push(row("lse", kind.name()), Estimate::from_values(&lse));
                report.push(row("mle_minus_lse", kind.name()), Estimate::from_values(&diff));
            }
        }
    }
    Ok(report)
}

/// Degrees of freedom of the multivariate t; `Gaussian` is the `d → ∞`
/// limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Dof {
    Finite(f64),
    Gaussian,
}

impl fmt::Display for Dof {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dof::Finite(d) => write!(f, "{d}"),
            Dof::Gaussian => f.write_str("inf"),
        }
    }
}

impl FromStr for Dof {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "gaussian" => Ok(Dof::Gaussian),
            other => other
                .parse::<f64>()
                .ok()
                .filter(|d| *d >= 1.0 && d.is_finite())
                .map(Dof::Finite)
                .ok_or_else(|| Error::Parse(format!("degrees of freedom must be ≥ 1 or `inf`, got `{other}`"))),
        }
    }
}

/// Frequency of `2S_n - I ≻ 0` for multivariate t data with identity scale.
/// Rows: `d` (`inf` for Gaussian data) and `n`.
pub fn experiment_t_robustness(p: usize, d_list: &[Dof], n_grid: &[usize], mc: MonteCarlo) -> Result<ExperimentReport> {
    check_reps(&mc)?;
    check_sample_sizes(n_grid)?;
    if p < 1 {
        return Err(Error::InvalidRange("need p ≥ 1".into()));
    }
    if d_list.is_empty() {
        return Err(Error::InvalidRange("no degrees of freedom given".into()));
    }
    let identity = SymmetricMatrix::identity(p);
    let mut report = ExperimentReport::new("t-robustness", &["d", "p", "n"], mc.seed);
    for (di, &d) in d_list.iter().enumerate() {
        for (ni, &n) in n_grid.iter().enumerate() {
            let grid = (di * n_grid.len() + ni) as u64;
            let flags = collect(map_reps(mc.exec, mc.reps, |rep| {
                let mut rng = replication_rng(mc.seed, grid, rep);
                let data = match d {
                    Dof::Finite(d) => sample_multivariate_t(d, p, n, &mut rng)?,
                    Dof::Gaussian => sample_gaussian(&vec![0.0; p], &identity, n, &mut rng)?,
                };
                let s = sample_covariance(&data)?;
                Ok(sigma_in_delta(&identity, s.matrix()))
            }))?;
            report.push(vec![Param::Text(d.to_string()), p.into(), n.into()], Estimate::from_flags(flags));
        }
    }
    Ok(report)
}
