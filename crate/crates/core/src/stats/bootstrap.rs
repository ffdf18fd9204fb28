//! Bootstrap uncertainty for MPR estimates.
//!
//! By default only the generated set is resampled and the reference set is
//! held fixed; `joint` resamples both.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::attributes::SampleSet;
use crate::error::{MprError, Result};
use crate::function_classes::FunctionClassSpec;
use crate::mpr::mpr;
use crate::rng::{stream, sub_rng, Rng};

pub const DEFAULT_RESAMPLES: usize = 1000;
pub const DEFAULT_REPETITIONS: usize = 100;
pub const DEFAULT_ALPHA: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BootstrapConfig {
    /// Size of each resample of the generated set; `None` keeps its size.
    pub resample_size: Option<usize>,
    pub repetitions: usize,
    /// Also resample the reference set (to its own size).
    pub joint: bool,
    /// Level of the percentile interval.
    pub alpha: f64,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self {
            resample_size: Some(DEFAULT_RESAMPLES),
            repetitions: DEFAULT_REPETITIONS,
            joint: false,
            alpha: DEFAULT_ALPHA,
        }
    }
}

impl BootstrapConfig {
    pub fn validate(&self) -> Result<()> {
        if self.repetitions < 2 {
            return Err(MprError::InvalidArgument(format!(
                "need ≥ 2 repetitions, got {}",
                self.repetitions
            )));
        }
        if self.resample_size == Some(0) {
            return Err(MprError::InvalidArgument(
                "resample size must be ≥ 1".into(),
            ));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(MprError::InvalidArgument(format!(
                "alpha {} outside (0, 1)",
                self.alpha
            )));
        }
        Ok(())
    }
}

/// Compact statistics attached to an [`crate::mpr::MprEstimate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapSummary {
    pub mean: f64,
    pub std: f64,
    pub ci: (f64, f64),
    pub alpha: f64,
    pub repetitions: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapResult {
    pub point_estimate: f64,
    pub replicate_values: Vec<f64>,
    pub mean: f64,
    pub std: f64,
    pub ci: (f64, f64),
    pub alpha: f64,
    pub resample_size: usize,
    pub joint: bool,
}

impl BootstrapResult {
    pub fn summary(&self) -> BootstrapSummary {
        BootstrapSummary {
            mean: self.mean,
            std: self.std,
            ci: self.ci,
            alpha: self.alpha,
            repetitions: self.replicate_values.len(),
        }
    }
}

/// Linear-interpolated quantile of sorted data, `q ∈ [0, 1]`.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// Mean, sample standard deviation and percentile interval of replicates.
pub fn summarize(replicates: &[f64], alpha: f64) -> (f64, f64, (f64, f64)) {
    let mean = super::mean(replicates);
    let std = super::sample_variance(replicates).max(0.0).sqrt();
    let mut sorted = replicates.to_vec();
    sorted.sort_by(f64::total_cmp);
    let lo = quantile_sorted(&sorted, alpha / 2.0);
    let hi = quantile_sorted(&sorted, 1.0 - alpha / 2.0);
    (mean, std, (lo.min(mean), hi.max(mean)))
}

/// Run `repetitions` independent replicates; replicate `i` receives the
/// generator derived from `(seed, i)`, so the output does not depend on how
/// the work is scheduled.
pub fn bootstrap_replicates<F>(repetitions: usize, seed: u64, replicate: F) -> Result<Vec<f64>>
where
    F: Fn(&mut Rng) -> Result<f64> + Sync,
{
    (0..repetitions)
        .into_par_iter()
        .map(|i| replicate(&mut sub_rng(seed, stream::BOOTSTRAP, i as u64)))
        .collect()
}

/// Indices of a with-replacement resample of `set` (weight-proportional when
/// the set is weighted).
pub fn resample_indices(set: &SampleSet, size: usize, rng: &mut Rng) -> Result<Vec<usize>> {
    match set.weights() {
        Some(w) => {
            let index = WeightedIndex::new(w.iter().copied())
                .map_err(|e| MprError::Distribution(e.to_string()))?;
            Ok((0..size).map(|_| index.sample(rng)).collect())
        }
        None => Ok((0..size).map(|_| rng.random_range(0..set.len())).collect()),
    }
}

pub fn bootstrap_mpr(
    g: &SampleSet,
    r: &SampleSet,
    spec: &FunctionClassSpec,
    config: &BootstrapConfig,
    seed: u64,
) -> Result<BootstrapResult> {
    config.validate()?;
    spec.validate(g.schema())?;
    let point = mpr(g, r, spec)?.value;
    let size = config.resample_size.unwrap_or(g.len());
    let replicate_values = bootstrap_replicates(config.repetitions, seed, |rng| {
        let gb = g.select(&resample_indices(g, size, rng)?)?;
        if config.joint {
            let rb = r.select(&resample_indices(r, r.len(), rng)?)?;
            Ok(mpr(&gb, &rb, spec)?.value)
        } else {
            Ok(mpr(&gb, r, spec)?.value)
        }
    })?;
    let (mean, std, ci) = summarize(&replicate_values, config.alpha);
    Ok(BootstrapResult {
        point_estimate: point,
        replicate_values,
        mean,
        std,
        ci,
        alpha: config.alpha,
        resample_size: size,
        joint: config.joint,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attributes::load_schema;
    use std::sync::Arc;

    fn sets() -> (SampleSet, SampleSet) {
        let s = Arc::new(
            load_schema(
                r#"{"attributes":[{"name":"g","categories":["m","f"]},{"name":"a","categories":["y","o"]}]}"#,
            )
            .unwrap(),
        );
        let g = SampleSet::from_cells(
            s.clone(),
            &[vec![0, 0], vec![0, 1], vec![1, 0], vec![0, 0], vec![1, 1]],
            None,
            "g",
        )
        .unwrap();
        let r = SampleSet::from_cells(
            s,
            &[vec![0, 0], vec![1, 1], vec![1, 0], vec![0, 1]],
            None,
            "r",
        )
        .unwrap();
        (g, r)
    }

    #[test]
    fn defaults_follow_measurement_protocol() {
        let c = BootstrapConfig::default();
        assert_eq!(c.resample_size, Some(1000));
        assert_eq!(c.repetitions, 100);
        assert!(!c.joint);
    }

    #[test]
    fn identical_rows_have_zero_spread() {
        let (g, r) = sets();
        let constant = g.select(&[0, 0, 0]).unwrap();
        let res = bootstrap_mpr(
            &constant,
            &r,
            &FunctionClassSpec::tree(2),
            &BootstrapConfig::default(),
            4,
        )
        .unwrap();
        assert_eq!(res.std, 0.0);
        assert_eq!(res.replicate_values.len(), 100);
        assert!(res
            .replicate_values
            .iter()
            .all(|v| *v == res.point_estimate));
    }

    #[test]
    fn seeded_runs_are_bit_identical() {
        let (g, r) = sets();
        let cfg = BootstrapConfig {
            resample_size: Some(50),
            repetitions: 20,
            ..Default::default()
        };
        let a = bootstrap_mpr(&g, &r, &FunctionClassSpec::tree(1), &cfg, 11).unwrap();
        let b = bootstrap_mpr(&g, &r, &FunctionClassSpec::tree(1), &cfg, 11).unwrap();
        assert_eq!(a, b);
        let c = bootstrap_mpr(&g, &r, &FunctionClassSpec::tree(1), &cfg, 12).unwrap();
        assert_ne!(a.replicate_values, c.replicate_values);
        assert!(a.ci.0 <= a.mean && a.mean <= a.ci.1);
    }

    #[test]
    fn rejects_single_repetition() {
        let (g, r) = sets();
        let cfg = BootstrapConfig {
            repetitions: 1,
            ..Default::default()
        };
        let err = bootstrap_mpr(&g, &r, &FunctionClassSpec::BoundedLinear, &cfg, 0).unwrap_err();
        assert!(err.to_string().contains("≥ 2 repetitions"));
    }

    #[test]
    fn quantiles_interpolate() {
        let v = [0.0, 1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile_sorted(&v, 0.5), 2.0);
        assert_eq!(quantile_sorted(&v, 0.125), 0.5);
        let (mean, std, ci) = summarize(&[1.0, 2.0, 3.0], 0.5);
        assert_eq!(mean, 2.0);
        assert_eq!(std, 1.0);
        assert_eq!(ci, (1.5, 2.5));
    }
}
