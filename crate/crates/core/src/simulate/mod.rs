//! Seeded samplers and Monte Carlo experiment runners.

mod exec;
mod experiments;
mod report;
mod sampling;

pub use exec::{map_reps, replication_rng, Execution, MonteCarlo};
pub use experiments::{
    experiment_losses, experiment_lse_region, experiment_min_eigenvalue, experiment_newton_paths,
    experiment_t_robustness, reciprocal_correlation, star_tree_truth, true_in_region_frequency, Dof,
    NewtonPathsReport,
};
pub use report::{Estimate, ExperimentReport, Param, ReportRow};
pub use sampling::{sample_covariance, sample_gaussian, sample_multivariate_t, sample_wishart};
