//! `lincov`: fit linear covariance models, query region probabilities and
//! run the Monte Carlo experiments.
//!
//! Exit codes: 0 success, 1 input error, 2 no convergence, 3 hypothesis of a
//! bound violated.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use lincov::covmodel::{LinearCovarianceModel, ParameterVector, TreeSpec};
use lincov::estimate::{
    default_anchor, least_squares, newton_raphson_mle, safe_init, FitResult, NewtonOptions, SampleCovariance,
};
use lincov::io;
use lincov::rmt::{lse_region_lower_bound, min_sample_size, mle_region_lower_bound, prob_true_in_region};
use lincov::simulate::{
    experiment_losses, experiment_lse_region, experiment_min_eigenvalue, experiment_newton_paths,
    experiment_t_robustness, reciprocal_correlation, sample_covariance, star_tree_truth, Dof, Execution,
    ExperimentReport, MonteCarlo,
};
use lincov::Error;

const SEED_ENV: &str = "LINCOV_SEED";

#[derive(Parser, Debug)]
#[command(name = "lincov", version, about = "Gaussian models with linear covariance structure")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Maximum likelihood fit; prints the result as JSON.
    Fit(FitArgs),
    /// Smallest n with P(Σ* ∈ Δ_2S) above the level (Tracy-Widom approximation).
    MinN {
        #[arg(long)]
        p: usize,
        #[arg(long, default_value_t = 0.95)]
        level: f64,
    },
    /// Probability that the truth (tw) or an estimator (mle, lse) lies in Δ_2S.
    Prob {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: usize,
        #[arg(long, value_enum, default_value_t = Bound::Tw)]
        bound: Bound,
        /// Condition number of the true covariance, for `--bound lse`.
        #[arg(long, default_value_t = 1.0)]
        kappa: f64,
    },
    /// Run a Monte Carlo experiment and write its CSV report.
    Simulate(SimArgs),
}

#[derive(Args, Debug)]
struct FitArgs {
    /// Model spec as JSON ({"p", "G0", "basis"}).
    #[arg(long, conflicts_with_all = ["family", "tree"])]
    model: Option<PathBuf>,
    /// Brownian motion tree as JSON ({"parent", "leaves"}).
    #[arg(long, conflicts_with = "family")]
    tree: Option<PathBuf>,
    /// Built-in model family, sized by `--p`.
    #[arg(long, value_enum, requires = "p")]
    family: Option<Family>,
    #[arg(long)]
    p: Option<usize>,
    /// Observations, one per CSV line.
    #[arg(long, conflicts_with = "sample_cov")]
    data: Option<PathBuf>,
    /// Sample covariance as a CSV matrix; needs `--n`.
    #[arg(long, requires = "n")]
    sample_cov: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, value_enum, default_value_t = Init::Lse)]
    init: Init,
    /// Starting parameters for `--init file`: one comma-separated line.
    #[arg(long, required_if_eq("init", "file"))]
    init_file: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    max_iter: usize,
    #[arg(long, default_value_t = 1e-8)]
    grad_tol: f64,
    /// Include the per-iteration log-likelihood trace.
    #[arg(long)]
    trace: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Family {
    Correlation,
    Circular,
    Diagonal,
    Unconstrained,
    Star,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Init {
    Lse,
    Safe,
    File,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Bound {
    Tw,
    Mle,
    Lse,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Experiment {
    Mineig,
    LseRegion,
    NewtonPaths,
    Losses,
    TRobustness,
}

impl Experiment {
    fn name(self) -> &'static str {
        match self {
            Experiment::Mineig => "mineig",
            Experiment::LseRegion => "lse-region",
            Experiment::NewtonPaths => "newton-paths",
            Experiment::Losses => "losses",
            Experiment::TRobustness => "t-robustness",
        }
    }
}

#[derive(Args, Debug)]
struct SimArgs {
    #[arg(long, value_enum)]
    experiment: Experiment,
    #[arg(long, default_value_t = 10)]
    p: usize,
    /// Sample sizes.
    #[arg(long, value_delimiter = ',', default_value = "100")]
    n: Vec<usize>,
    /// Degrees of freedom for t-robustness (`inf` for Gaussian).
    #[arg(long, value_delimiter = ',', default_value = "5,inf")]
    d: Vec<String>,
    /// True parameters for losses (circular model), as `a;b`. Repeatable.
    #[arg(long = "v-star", default_values = ["1;0.3", "1;0.45"])]
    v_star: Vec<String>,
    /// Newton steps recorded per path.
    #[arg(long, default_value_t = 10)]
    steps: usize,
    /// Trajectories kept per sample size; written next to `--out`.
    #[arg(long, default_value_t = 50)]
    max_paths: usize,
    #[arg(long, default_value_t = 1000)]
    reps: usize,
    /// Master seed; falls back to $LINCOV_SEED, then 0.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run replications on one thread.
    #[arg(long)]
    sequential: bool,
}

/// Failure carrying its exit code.
struct Exit {
    code: u8,
    err: anyhow::Error,
}

impl From<anyhow::Error> for Exit {
    fn from(err: anyhow::Error) -> Self {
        let code = match err.downcast_ref::<Error>() {
            Some(Error::HypothesisViolated(_)) => 3,
            Some(Error::MaxIterationsExceeded(_)) => 2,
            _ => 1,
        };
        Exit { code, err }
    }
}

impl From<Error> for Exit {
    fn from(err: Error) -> Self {
        anyhow::Error::from(err).into()
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match cli.command {
        Command::Fit(args) => cmd_fit(&args),
        Command::MinN { p, level } => cmd_min_n(p, level),
        Command::Prob { n, p, bound, kappa } => cmd_prob(n, p, bound, kappa),
        Command::Simulate(args) => cmd_simulate(&args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Exit { code, err }) => {
            eprintln!("error: {err:#}");
            ExitCode::from(code)
        }
    }
}

fn load_model(args: &FitArgs) -> anyhow::Result<LinearCovarianceModel> {
    if let Some(path) = &args.model {
        return io::read_model_json(path).with_context(|| format!("reading model {}", path.display()));
    }
    if let Some(path) = &args.tree {
        let tree = io::read_tree_json(path).with_context(|| format!("reading tree {}", path.display()))?;
        return Ok(LinearCovarianceModel::brownian_tree(&tree)?);
    }
    let (Some(family), Some(p)) = (args.family, args.p) else {
        bail!("one of --model, --tree or --family with --p is required");
    };
    Ok(match family {
        Family::Correlation => LinearCovarianceModel::correlation(p)?,
        Family::Circular => LinearCovarianceModel::circular_serial(p)?,
        Family::Diagonal => LinearCovarianceModel::diagonal(p)?,
        Family::Unconstrained => LinearCovarianceModel::unconstrained(p)?,
        Family::Star => LinearCovarianceModel::brownian_tree(&TreeSpec::star(p))?,
    })
}

fn load_sample(args: &FitArgs) -> anyhow::Result<SampleCovariance> {
    if let Some(path) = &args.data {
        let data = io::read_data_csv(path).with_context(|| format!("reading data {}", path.display()))?;
        return Ok(sample_covariance(&data)?);
    }
    if let (Some(path), Some(n)) = (&args.sample_cov, args.n) {
        let s = io::read_matrix_csv(path).with_context(|| format!("reading sample covariance {}", path.display()))?;
        return Ok(SampleCovariance::new(s, n)?);
    }
    bail!("one of --data or --sample-cov with --n is required")
}

fn read_params(path: &Path) -> anyhow::Result<ParameterVector> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let v = text
        .split([',', '\n', ' '])
        .filter(|t| !t.trim().is_empty())
        .map(|t| t.trim().parse::<f64>().with_context(|| format!("`{t}` is not a number")))
        .collect::<anyhow::Result<Vec<f64>>>()?;
    Ok(v.into())
}

fn fit_json(fit: &FitResult, trace: bool) -> serde_json::Value {
    let mut out = json!({
        "v_hat": fit.v_hat.as_slice(),
        "loglik": fit.loglik,
        "iterations": fit.iterations,
        "converged": fit.converged,
        "stop_reason": format!("{:?}", fit.stop_reason),
        "diagnostics": {
            "sigma_pd": fit.diagnostics.sigma_pd,
            "in_delta": fit.diagnostics.in_delta,
            "hessian_negdef_at_solution": fit.diagnostics.hessian_negdef_at_solution,
        },
    });
    if trace {
        out["loglik_trace"] = json!(fit.loglik_trace);
    }
    out
}

fn cmd_fit(args: &FitArgs) -> Result<(), Exit> {
    let model = load_model(args)?;
    let s = load_sample(args)?;
    if s.dim() != model.dim() {
        return Err(Error::DimensionMismatch { expected: model.dim(), found: s.dim() }.into());
    }
    if !s.is_full_rank() {
        return Err(Error::SingularSample.into());
    }
    let init = match args.init {
        Init::Lse => {
            let v = least_squares(&model, &s)?;
            if !model.is_in_theta(&v)? {
                return Err(anyhow::anyhow!("least squares estimate is not positive definite; try --init safe").into());
            }
            v
        }
        Init::Safe => {
            if !model.has_zero_offset() {
                return Err(Error::UnsupportedModel("--init safe requires a model with G0 = 0").into());
            }
            safe_init(&model, &s, &default_anchor(&model, &s)?)?
        }
        Init::File => read_params(args.init_file.as_deref().expect("required by clap"))?,
    };
    let opts = NewtonOptions { max_iterations: args.max_iter, gradient_tol: args.grad_tol, ..NewtonOptions::default() };
    match newton_raphson_mle(&model, &s, &init, &opts) {
        Ok(fit) => {
            println!("{}", fit_json(&fit, args.trace));
            Ok(())
        }
        Err(Error::MaxIterationsExceeded(fit)) => {
            println!("{}", fit_json(&fit, args.trace));
            Err(Exit { code: 2, err: anyhow::anyhow!("no convergence after {} iterations", fit.iterations) })
        }
        Err(e) => Err(e.into()),
    }
}

fn cmd_min_n(p: usize, level: f64) -> Result<(), Exit> {
    println!("{}", min_sample_size(p, level)?);
    Ok(())
}

fn cmd_prob(n: usize, p: usize, bound: Bound, kappa: f64) -> Result<(), Exit> {
    let value = match bound {
        Bound::Tw => prob_true_in_region(n, p)?,
        Bound::Mle => mle_region_lower_bound(n, p)?,
        Bound::Lse => lse_region_lower_bound(n, p, kappa)?,
    };
    if value < 0.0 {
        println!("0 (vacuous)");
        eprintln!("raw bound {value} clamped to 0");
    } else if value > 1.0 {
        println!("1 (vacuous)");
        eprintln!("raw bound {value} clamped to 1");
    } else {
        println!("{value}");
    }
    Ok(())
}

fn parse_v_star(text: &str) -> anyhow::Result<ParameterVector> {
    let v = text
        .split(';')
        .map(|t| t.trim().parse::<f64>().with_context(|| format!("bad --v-star entry `{t}`")))
        .collect::<anyhow::Result<Vec<f64>>>()?;
    Ok(v.into())
}

fn default_out(name: &str) -> PathBuf {
    let stamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    PathBuf::from(format!("{name}_{stamp}.csv"))
}

fn resolve_seed(flag: Option<u64>) -> anyhow::Result<u64> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    match std::env::var(SEED_ENV) {
        Ok(s) => s.trim().parse().with_context(|| format!("${SEED_ENV} is not an integer")),
        Err(_) => Ok(0),
    }
}

fn write_report(report: &ExperimentReport, path: &Path) -> anyhow::Result<()> {
    report.write_csv_file(path).with_context(|| format!("writing {}", path.display()))?;
    eprintln!("{}: {} rows written to {}", report.experiment, report.rows.len(), path.display());
    Ok(())
}

fn cmd_simulate(args: &SimArgs) -> Result<(), Exit> {
    let seed = resolve_seed(args.seed)?;
    let mut mc = MonteCarlo::new(args.reps, seed);
    if args.sequential {
        mc = mc.with_exec(Execution::Sequential);
    }
    let name = args.experiment.name();
    let out = args.out.clone().unwrap_or_else(|| default_out(name));
    let n = &args.n;
    let report = match args.experiment {
        Experiment::Mineig => experiment_min_eigenvalue(args.p, n, mc)?,
        Experiment::LseRegion => {
            let model = LinearCovarianceModel::brownian_tree(&TreeSpec::star(args.p))?;
            experiment_lse_region(&model, &star_tree_truth(args.p), n, mc)?
        }
        Experiment::NewtonPaths => {
            let sigma = reciprocal_correlation(args.p)?;
            let r = experiment_newton_paths(&sigma, n, args.steps, args.max_paths, mc)?;
            let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or(name);
            write_report(&r.paths, &out.with_file_name(format!("{stem}_paths.csv")))?;
            r.summary
        }
        Experiment::Losses => {
            let model = LinearCovarianceModel::circular_serial(args.p)?;
            let v_stars = args.v_star.iter().map(|s| parse_v_star(s)).collect::<anyhow::Result<Vec<_>>>()?;
            experiment_losses(&model, &v_stars, n, mc)?
        }
        Experiment::TRobustness => {
            let d = args.d.iter().map(|s| s.parse::<Dof>()).collect::<Result<Vec<_>, _>>()?;
            experiment_t_robustness(args.p, &d, n, mc)?
        }
    };
    write_report(&report, &out)?;
    println!("{}", out.display());
    Ok(())
}
