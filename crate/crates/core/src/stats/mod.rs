//! Uncertainty, complexity estimates, generalisation bounds, hypothesis tests
//! and the sample-size experiments built on them.

pub mod bootstrap;
pub mod bounds;
pub mod experiments;
pub mod rademacher;
pub mod ttest;

pub use bootstrap::{bootstrap_mpr, BootstrapConfig, BootstrapResult, BootstrapSummary};
pub use bounds::{
    bernstein_bound, empirical_variance_across_prompts, gap_bound_prop1, prompt_bound_prop2,
    BoundInputs, BoundValue,
};
pub use experiments::{
    gap_experiment, std_heatmap, GapConfig, GapTable, HeatmapConfig, HeatmapTable, PopulationSource,
};
pub use rademacher::{empirical_rademacher, RademacherEstimate};
pub use ttest::{model_compare_test, threshold_test, TestKind, TestResult};

/// Arithmetic mean; `NaN` for an empty slice.
pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Unbiased sample variance (divisor `n − 1`); `NaN` for fewer than two values.
pub fn sample_variance(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return f64::NAN;
    }
    let mu = mean(values);
    values.iter().map(|x| (x - mu) * (x - mu)).sum::<f64>() / (n - 1) as f64
}
