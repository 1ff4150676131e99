//! Reductions from sample traces to the quantities compared against theory:
//! tail fits, lower-tail curves, covariance and confinement tables,
//! distributional tests and MCMC output analysis.

pub mod ensemble;
pub mod mcmc;
pub mod spatial;
pub mod stats;
pub mod tail;

pub use ensemble::{
    free_vs_zero_convergence, lower_tail_slope, pinning_check, pooled, pooled_mean, scaling_check, ConvergenceRow,
    PinningReport, SamplingPlan, ScalingReport, SlopeEstimate,
};
pub use mcmc::{
    autocorrelation, batch_means, batch_means_with, geweke_z, iid_mean, integrated_autocorr_time, mean, variance,
    MeanEstimate,
};
pub use spatial::{confinement_profile, covariance_lag, span_ratio, ConfinementRow, CovariancePoint};
pub use stats::{
    clopper_pearson, kolmogorov_sf, ks_one_sample, ks_two_sample, two_proportion_z, KsResult, Proportion,
};
pub use tail::{
    fit_upper_tail, fit_upper_tail_points, linear_fit, local_cdf_slope, loglog_slope, lower_tail_curve, tail_coefficient_ck, LinearFit, LowerTailPoint,
    TailFit, FS_TAIL_CONSTANT, K_INFINITY,
};
