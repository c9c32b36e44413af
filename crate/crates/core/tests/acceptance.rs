//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails. Runs without the libtest harness so the lines are
//! always visible.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::{
    congruent, finite_difference_errors, random_model, random_sample, rng, safe_init_instance,
    witness_direction,
};
use lincov::covmodel::{LinearCovarianceModel, ParameterVector, TreeSpec};
use lincov::estimate::{
    default_anchor, directional_second_derivative, hessian, in_delta_region, least_squares, safe_init,
    sigma_in_delta,
};
use lincov::linalg::SymmetricMatrix;
use lincov::rmt::{logdet_moments, min_sample_size, prob_true_in_region, trace_bounds, tracy_widom_cdf};
use lincov::simulate::{
    experiment_losses, experiment_min_eigenvalue, experiment_newton_paths, experiment_t_robustness,
    map_reps, reciprocal_correlation, replication_rng, sample_wishart, Dof, ExperimentReport, MonteCarlo,
    ReportRow,
};
use rand::Rng;

const SEED: u64 = 20_240_601;

type Criterion<'a> = (u32, &'a str, Box<dyn Fn() -> Outcome + 'a>);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

fn row<'a>(r: &'a ExperimentReport, filters: &[(&str, &str)]) -> &'a ReportRow {
    r.find(filters).unwrap_or_else(|| panic!("missing row {filters:?}"))
}

fn c1_sample_size_table() -> Outcome {
    let expected = [(3, 51), (5, 77), (10, 140), (20, 262), (100, 1214), (1000, 11759)];
    let (got, t) = timed(|| expected.iter().map(|&(p, _)| min_sample_size(p, 0.95).unwrap()).collect::<Vec<_>>());
    let exact = got.iter().zip(&expected).all(|(g, (_, n))| g == n);
    outcome(exact && t < Duration::from_secs(1), format!("n = {got:?} in {t:.2?}"))
}

fn c2_asymptotic_ratio() -> Outcome {
    let (n, t) = timed(|| min_sample_size(5000, 0.95).unwrap());
    let ratio = n as f64 / 5000.0;
    outcome((11.56..=11.76).contains(&ratio) && t < Duration::from_secs(10), format!("n/p = {ratio:.4} in {t:.2?}"))
}

fn c3_tracy_widom_anchor() -> Outcome {
    let f = tracy_widom_cdf(0.98);
    outcome((f - 0.95).abs() <= 0.005, format!("F(0.98) = {f:.6}"))
}

fn c4_min_eigenvalue() -> Outcome {
    let (report, t) = timed(|| experiment_min_eigenvalue(10, &[120, 140, 200], MonteCarlo::new(10_000, SEED)).unwrap());
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for n in [120usize, 140, 200] {
        let mc = row(&report, &[("series", "simulated"), ("n", &n.to_string())]).estimate;
        let tw = prob_true_in_region(n, 10).unwrap();
        worst = worst.max((mc - tw).abs());
        parts.push(format!("n={n}: {mc:.4} vs {tw:.4}"));
    }
    outcome(worst <= 0.02 && t < Duration::from_secs(120), format!("{}; max gap {worst:.4} in {t:.2?}", parts.join(", ")))
}

fn newton_runs() -> lincov::simulate::NewtonPathsReport {
    let sigma = reciprocal_correlation(3).unwrap();
    experiment_newton_paths(&sigma, &[10, 100], 10, 0, MonteCarlo::new(2000, SEED)).unwrap()
}

fn c5_boundary_table(report: &ExperimentReport) -> Outcome {
    let at = |series: &str, n: &str| row(report, &[("series", series), ("n", n)]).estimate;
    let outside_10 = at("mle_outside_2s", "10");
    let (not_pd_100, outside_100) = (at("mle_not_pd", "100"), at("mle_outside_2s", "100"));
    let pass = (outside_10 - 0.120).abs() <= 0.09 && not_pd_100 <= 0.02 && outside_100 <= 0.02;
    outcome(
        pass,
        format!(
            "n=10: P(2S-Σ̂ not PD) = {outside_10:.3} (P(Σ̂ not PD) = {:.3}); n=100: {not_pd_100:.3}, {outside_100:.3}",
            at("mle_not_pd", "10")
        ),
    )
}

fn c6_sandwich(report: &ExperimentReport) -> Outcome {
    let r10 = row(report, &[("series", "sandwich_holds"), ("n", "10")]);
    let r100 = row(report, &[("series", "sandwich_holds"), ("n", "100")]);
    outcome(
        r10.estimate == 1.0 && r100.estimate == 1.0,
        format!("n=10: {}/{} fits, n=100: {}/{} fits", r10.estimate * r10.reps as f64, r10.reps, r100.estimate * r100.reps as f64, r100.reps),
    )
}

fn c7_derivatives() -> Outcome {
    let (mut g_worst, mut h_worst) = (0.0f64, 0.0f64);
    for seed in 0..100 {
        let mut r = rng(seed);
        let p = r.random_range(2..=6);
        let (model, v) = random_model(p, &mut r);
        let s = random_sample(p, 20, &mut r);
        let (g, h) = finite_difference_errors(&model, &v, &s);
        g_worst = g_worst.max(g);
        h_worst = h_worst.max(h);
    }
    outcome(g_worst < 1e-6 && h_worst < 1e-5, format!("max rel err gradient {g_worst:.2e}, hessian {h_worst:.2e}"))
}

fn c8_concavity_witness() -> Outcome {
    let (mut inside_ok, mut outside_ok) = (0, 0);
    for seed in 0..100 {
        let mut r = rng(1000 + seed);
        let p = r.random_range(2..=6);
        let s = random_sample(p, 30, &mut r);
        let b: Vec<f64> = (0..p).map(|_| r.random_range(0.05..1.95)).collect();
        let sigma = congruent(&s, b);
        let model = LinearCovarianceModel::unconstrained(p).unwrap();
        let v = model.coordinates_of(&sigma).unwrap().unwrap();
        let neg_h = SymmetricMatrix::symmetrize(&(-hessian(&model, &v, &s).unwrap()));
        inside_ok += usize::from(sigma_in_delta(&sigma, s.matrix()) && neg_h.is_positive_definite());

        let mut b: Vec<f64> = (0..p).map(|_| r.random_range(0.05..3.0)).collect();
        b[r.random_range(0..p)] = r.random_range(2.0..4.0);
        let sigma = congruent(&s, b);
        let a = witness_direction(&sigma, &s);
        let d2 = directional_second_derivative(&sigma, &s, &a, &a).unwrap();
        outside_ok += usize::from(!sigma_in_delta(&sigma, s.matrix()) && d2 >= 0.0);
    }
    outcome(inside_ok == 100 && outside_ok == 100, format!("inside negdef {inside_ok}/100, outside witness {outside_ok}/100"))
}

fn c9_lse_properties() -> Outcome {
    let (mut idem, mut minimal) = (0, 0);
    for seed in 0..100 {
        let mut r = rng(2000 + seed);
        let p = r.random_range(2..=6);
        let (model, _) = random_model(p, &mut r);
        let s = random_sample(p, 20, &mut r);
        let v = least_squares(&model, &s).unwrap();
        let again = model.project(&model.sigma(&v).unwrap()).unwrap();
        let err = v.as_slice().iter().zip(again.as_slice()).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        idem += usize::from(err <= 1e-10 * v.sup_norm().max(1.0));

        let resid = |w: &ParameterVector| (s.matrix() - &model.sigma(w).unwrap()).frobenius_norm();
        let best = resid(&v);
        let beaten = (0..10).any(|_| {
            let scale = 10f64.powf(r.random_range(-3.0..0.0));
            let w: Vec<f64> = v.as_slice().iter().map(|x| x + scale * r.random_range(-1.0..1.0)).collect();
            resid(&w.into()) < best
        });
        minimal += usize::from(!beaten);
    }
    // star tree: diagonal of S kept, covariances replaced by their mean
    let mut star_ok = true;
    let mut r = rng(3000);
    for p in 2..=8 {
        let s = random_sample(p, 30, &mut r);
        let model = LinearCovarianceModel::brownian_tree(&TreeSpec::star(p)).unwrap();
        let v = least_squares(&model, &s).unwrap();
        let m = s.matrix();
        let offdiag: Vec<f64> = (0..p).flat_map(|i| (0..i).map(move |j| (i, j))).map(|(i, j)| m.get(i, j)).collect();
        let avg = offdiag.iter().sum::<f64>() / offdiag.len() as f64;
        star_ok &= (v.as_slice()[p] - avg).abs() < 1e-12;
        star_ok &= (0..p).all(|i| (v.as_slice()[i] - (m.get(i, i) - avg)).abs() < 1e-12);
    }
    outcome(
        idem == 100 && minimal == 100 && star_ok,
        format!("idempotent {idem}/100, minimal {minimal}/100, star-tree formula {}", if star_ok { "matched" } else { "mismatch" }),
    )
}

fn c10_safe_init() -> Outcome {
    let mut ok = 0;
    let mut repaired = 0;
    for seed in 0..1000 {
        let (model, s) = safe_init_instance(seed);
        repaired += usize::from(!in_delta_region(&model, &least_squares(&model, &s).unwrap(), &s));
        let v = default_anchor(&model, &s).and_then(|a| safe_init(&model, &s, &a));
        ok += usize::from(v.is_ok_and(|v| in_delta_region(&model, &v, &s)));
    }
    outcome(ok == 1000, format!("{ok}/1000 in region ({repaired} needed repair)"))
}

fn c11_wishart_moments() -> Outcome {
    let (n, p, reps) = (50, 5, 100_000u64);
    let logdets = map_reps(Default::default(), reps as usize, |rep| {
        let w = sample_wishart(n, p, &mut replication_rng(SEED, 11, rep)).unwrap();
        w.cholesky().unwrap().log_det()
    });
    let k = reps as f64;
    let mean = logdets.iter().sum::<f64>() / k;
    let m2 = logdets.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0);
    let m4 = logdets.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / k;
    let theory = logdet_moments(n, p).unwrap();
    let z_mean = (mean - theory.mean) / (m2 / k).sqrt();
    let z_var = (m2 - theory.variance) / ((m4 - m2 * m2) / k).sqrt();
    let moments_ok = z_mean.abs() <= 3.0 && z_var.abs() <= 3.0;

    // trace bounds against empirical coverage of |tr W - np| ≤ ε, ε a
    // multiple of the standard deviation √(2np); 3 SE of Monte Carlo slack
    let trace_reps = 4000;
    let mut violations = Vec::new();
    let mut grid = 0u64;
    for n in [10usize, 30, 100] {
        for p in [2usize, 4, 8] {
            let traces = map_reps(Default::default(), trace_reps, |rep| {
                sample_wishart(n, p, &mut replication_rng(SEED, 100 + grid, rep)).unwrap().trace()
            });
            grid += 1;
            let sd = (2.0 * (n * p) as f64).sqrt();
            for c in [1.5, 2.5, 4.0] {
                let eps = c * sd;
                let hits = traces.iter().filter(|t| (*t - (n * p) as f64).abs() <= eps).count();
                let cover = hits as f64 / trace_reps as f64;
                let se = (cover * (1.0 - cover) / trace_reps as f64).sqrt().max(1.0 / trace_reps as f64);
                let b = trace_bounds(n, p, eps).unwrap();
                if b.chebyshev > cover + 3.0 * se || b.laurent_massart > cover + 3.0 * se {
                    violations.push(format!("(n={n}, p={p}, ε={eps:.1})"));
                }
            }
        }
    }
    outcome(
        moments_ok && violations.is_empty(),
        format!(
            "log det mean z = {z_mean:.2}, variance z = {z_var:.2}; trace bound violations {}/27 {}",
            violations.len(),
            violations.join(" ")
        ),
    )
}

fn c12_losses() -> Outcome {
    let model = LinearCovarianceModel::circular_serial(10).unwrap();
    let v_star: ParameterVector = vec![1.0, 0.45].into();
    let report = experiment_losses(&model, &[v_star], &[100, 200], MonteCarlo::new(1000, SEED)).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for n in ["100", "200"] {
        let get = |est: &str, q: &str| row(&report, &[("n", n), ("estimator", est), ("quantity", q)]);
        let (mle, lse, diff) = (get("mle", "entropy"), get("lse", "entropy"), get("mle_minus_lse", "entropy"));
        pass &= mle.estimate < lse.estimate;
        parts.push(format!("n={n}: entropy mle {:.4} < lse {:.4} (paired diff {:.4} ± {:.4})", mle.estimate, lse.estimate, diff.estimate, diff.stderr));
    }
    let not_pd = row(&report, &[("n", "100"), ("estimator", "lse"), ("quantity", "prob_not_pd")]).estimate;
    pass &= (not_pd - 0.011).abs() <= 0.03;
    parts.push(format!("P(Σ_v̄ not PD) at n=100 = {not_pd:.3}"));
    outcome(pass, parts.join("; "))
}

fn c13_t_robustness() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for p in [3usize, 5] {
        let n = 20 * p;
        let r = experiment_t_robustness(p, &[Dof::Finite(5.0), Dof::Gaussian], &[n], MonteCarlo::new(10_000, SEED)).unwrap();
        let t = row(&r, &[("d", "5")]);
        let g = row(&r, &[("d", "inf")]);
        let slack = t.stderr.hypot(g.stderr);
        pass &= t.estimate >= g.estimate - slack;
        parts.push(format!("p={p}, n={n}: d=5 {:.4} vs gaussian {:.4} (1 SE {slack:.4})", t.estimate, g.estimate));
    }
    outcome(pass, parts.join("; "))
}

fn main() -> ExitCode {
    let start = Instant::now();
    let newton = newton_runs();
    let criteria: Vec<Criterion> = vec![
        (1, "sample-size table", Box::new(c1_sample_size_table)),
        (2, "asymptotic ratio", Box::new(c2_asymptotic_ratio)),
        (3, "Tracy-Widom anchor", Box::new(c3_tracy_widom_anchor)),
        (4, "min-eigenvalue reproduction", Box::new(c4_min_eigenvalue)),
        (5, "boundary probabilities", Box::new(|| c5_boundary_table(&newton.summary))),
        (6, "sandwich property", Box::new(|| c6_sandwich(&newton.summary))),
        (7, "gradient/Hessian finite differences", Box::new(c7_derivatives)),
        (8, "concavity witness", Box::new(c8_concavity_witness)),
        (9, "least squares properties", Box::new(c9_lse_properties)),
        (10, "safe initialization", Box::new(c10_safe_init)),
        (11, "Wishart moments and trace bounds", Box::new(c11_wishart_moments)),
        (12, "loss comparison", Box::new(c12_losses)),
        (13, "t-robustness ordering", Box::new(c13_t_robustness)),
    ];
    let mut failed = 0;
    for (id, name, check) in &criteria {
        let o = check();
        failed += usize::from(!o.pass);
        println!("criterion {id:>2} {}: {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("acceptance: {}/{} passed in {:.1?}", criteria.len() - failed, criteria.len(), start.elapsed());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
