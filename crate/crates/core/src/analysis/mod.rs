//! Monte-Carlo performance study, statistical diagnostics and the
//! sliding-window group comparison.

pub mod mc;
pub mod presets;
pub mod sliding;
pub mod stats;

pub use mc::{run_mc, EstimatorSummary, McConfig, McReport};
pub use presets::Preset;
pub use sliding::{compare_groups, sliding_window_estimates, GroupComparison, SlidingConfig, WindowEstimate};
pub use stats::{
    bh_reject, chi2_qq_correlation, chi2_qq_pairs, chi2_quantiles, estimate_correlation,
    mahalanobis_samples, max_offdiag_abs, performance_matrices, spectral_norm, v_n_approx,
    wilcoxon_ranksum, GroupTestReport, PerformanceMatrices,
};
