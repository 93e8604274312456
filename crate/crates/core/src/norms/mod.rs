//! Mixed space-time norms, composite solution norms and empirical checks of
//! the linear, product and gauge-side estimates.

mod composite;
mod estimates;
mod mixed;

pub use composite::{composite_norm, x_norm, xr_norm, xr_tilde, Composite, NormParams, DEFAULT_EPS};
pub use estimates::{
    check_admissible, check_linear_estimates, check_product_estimate, check_unbound_lemma, free_trajectory,
    kato_ratio, maximal_ratio, prolong, seeded_samples, strichartz_ratio, LinearEstimateParams, StrichartzTriple,
    UnboundRatio, REFINEMENT_TOLERANCE,
};
pub use mixed::{mixed_norm, mixed_norm_series, trapezoid_weights, MixedNormSpec, Outer};
