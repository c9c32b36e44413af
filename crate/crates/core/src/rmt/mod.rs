//! Random matrix machinery: the Tracy-Widom law, region probabilities,
//! sample-size calculus and Wishart concentration bounds.

mod bounds;
mod region;
pub mod special;
mod tracy_widom;

pub use bounds::{
    logdet_chebyshev_bound, logdet_moments, lse_epsilon, lse_region_lower_bound, mle_region_lower_bound,
    mle_region_lower_bound_asymptotic, trace_bounds, LogdetMoments, TraceBounds, MLE_EPSILON,
};
pub use region::{
    gamma_star, ma_constants, min_sample_size, prob_true_in_region, region_argument, step_limit,
    subgaussian_prob_approx, MaConstants,
};
pub use special::{digamma, log_gamma, trigamma};
pub use tracy_widom::{tracy_widom_cdf, tracy_widom_quantile, tracy_widom_reflected_cdf, TracyWidomTable};
