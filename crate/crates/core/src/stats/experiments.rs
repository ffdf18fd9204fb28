//! Sample-size experiments on synthetic or pooled populations.
//!
//! [`gap_experiment`] measures how far empirical MPR strays from the exact
//! population value as the sample size and class complexity vary.
//! [`std_heatmap`] tabulates bootstrap standard deviations over a grid of
//! generated/reference sample sizes.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::attributes::{JointDistribution, SampleSet};
use crate::error::{MprError, Result};
use crate::function_classes::FunctionClassSpec;
use crate::mpr::{mpr, mpr_exact};
use crate::rng::{derive_seed, stream, sub_rng, Rng};
use crate::stats::bootstrap::{bootstrap_mpr, BootstrapConfig};

pub const DEFAULT_GAP_REPS: usize = 30;

fn default_reps() -> usize {
    DEFAULT_GAP_REPS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapConfig {
    pub classes: Vec<FunctionClassSpec>,
    pub sample_sizes: Vec<usize>,
    #[serde(default = "default_reps")]
    pub reps: usize,
    /// Fixed reference sample size; `None` draws as many reference samples as
    /// generated ones.
    #[serde(default)]
    pub reference_size: Option<usize>,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapRow {
    pub class: String,
    pub sample_size: usize,
    pub reference_size: usize,
    pub truth: f64,
    pub max_deviation: f64,
    pub mean_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReplicate {
    pub class: String,
    pub sample_size: usize,
    pub rep: usize,
    pub empirical: f64,
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapTable {
    pub rows: Vec<GapRow>,
    pub replicates: Vec<GapReplicate>,
}

impl GapTable {
    pub fn row(&self, class: &str, sample_size: usize) -> Option<&GapRow> {
        self.rows
            .iter()
            .find(|r| r.class == class && r.sample_size == sample_size)
    }

    /// Summary rows as CSV.
    pub fn summary_csv(&self) -> String {
        let mut out =
            String::from("class,sample_size,reference_size,truth,max_deviation,mean_deviation\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r.class,
                r.sample_size,
                r.reference_size,
                r.truth,
                r.max_deviation,
                r.mean_deviation
            );
        }
        out
    }

    /// One line per replicate (long format).
    pub fn replicates_csv(&self) -> String {
        let mut out = String::from("class,sample_size,rep,empirical,deviation\n");
        for r in &self.replicates {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                r.class, r.sample_size, r.rep, r.empirical, r.deviation
            );
        }
        out
    }
}

/// For every `(class, sample size)`: the largest and mean `|empirical − exact|`
/// over `reps` independent draws of generated and reference samples.
///
/// All classes see the same draws for a given `(size, rep)`.
pub fn gap_experiment(
    generated: &JointDistribution,
    reference: &JointDistribution,
    config: &GapConfig,
) -> Result<GapTable> {
    if config.reps == 0 {
        return Err(MprError::InvalidArgument("reps must be at least 1".into()));
    }
    if config.classes.is_empty() || config.sample_sizes.is_empty() {
        return Err(MprError::InvalidArgument(
            "classes and sample sizes must be nonempty".into(),
        ));
    }
    if config.sample_sizes.contains(&0) || config.reference_size == Some(0) {
        return Err(MprError::InvalidArgument(
            "sample sizes must be positive".into(),
        ));
    }
    let truths = config
        .classes
        .iter()
        .map(|spec| Ok(mpr_exact(generated, reference, spec)?.value))
        .collect::<Result<Vec<f64>>>()?;

    let units: Vec<(usize, usize)> = (0..config.sample_sizes.len())
        .flat_map(|s| (0..config.reps).map(move |r| (s, r)))
        .collect();
    let values: Vec<Vec<f64>> = units
        .par_iter()
        .map(|&(s, rep)| {
            let n = config.sample_sizes[s];
            let m = config.reference_size.unwrap_or(n);
            let base = derive_seed(config.seed, stream::GAP, s as u64);
            let g = generated.sample(
                n,
                &mut sub_rng(base, stream::DRAW_GENERATED, rep as u64),
                "generated",
            )?;
            let r = reference.sample(
                m,
                &mut sub_rng(base, stream::DRAW_REFERENCE, rep as u64),
                "reference",
            )?;
            config
                .classes
                .iter()
                .map(|spec| Ok(mpr(&g, &r, spec)?.value))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    let mut replicates = Vec::new();
    for (c, spec) in config.classes.iter().enumerate() {
        let label = spec.label();
        for (s, &n) in config.sample_sizes.iter().enumerate() {
            let mut max_dev: f64 = 0.0;
            let mut sum_dev = 0.0;
            for rep in 0..config.reps {
                let empirical = values[s * config.reps + rep][c];
                let deviation = (empirical - truths[c]).abs();
                max_dev = max_dev.max(deviation);
                sum_dev += deviation;
                replicates.push(GapReplicate {
                    class: label.clone(),
                    sample_size: n,
                    rep,
                    empirical,
                    deviation,
                });
            }
            rows.push(GapRow {
                class: label.clone(),
                sample_size: n,
                reference_size: config.reference_size.unwrap_or(n),
                truth: truths[c],
                max_deviation: max_dev,
                mean_deviation: sum_dev / config.reps as f64,
            });
        }
    }
    Ok(GapTable { rows, replicates })
}

/// Where heatmap samples come from.
#[derive(Debug, Clone)]
pub enum PopulationSource {
    /// Fresh i.i.d. draws from an exact distribution.
    Exact(JointDistribution),
    /// Subsets of an observed pool, drawn without replacement (the whole pool,
    /// in order, when the requested size equals the pool size).
    Pool(SampleSet),
}

impl PopulationSource {
    pub fn draw(&self, n: usize, rng: &mut Rng) -> Result<SampleSet> {
        if n == 0 {
            return Err(MprError::EmptySampleSet);
        }
        match self {
            PopulationSource::Exact(d) => d.sample(n, rng, "draw"),
            PopulationSource::Pool(pool) => {
                if n > pool.len() {
                    return Err(MprError::InvalidArgument(format!(
                        "requested {n} rows from a pool of {}",
                        pool.len()
                    )));
                }
                if n == pool.len() {
                    return Ok(pool.clone());
                }
                let mut idx = rand::seq::index::sample(rng, pool.len(), n).into_vec();
                idx.sort_unstable();
                pool.select(&idx)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatmapConfig {
    pub k_list: Vec<usize>,
    pub m_list: Vec<usize>,
    pub bootstrap: BootstrapConfig,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatmapCell {
    pub k: usize,
    pub m: usize,
    pub point_estimate: f64,
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatmapTable {
    pub cells: Vec<HeatmapCell>,
}

impl HeatmapTable {
    pub fn get(&self, k: usize, m: usize) -> Option<&HeatmapCell> {
        self.cells.iter().find(|c| c.k == k && c.m == m)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,m,point_estimate,mean,std\n");
        for c in &self.cells {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                c.k, c.m, c.point_estimate, c.mean, c.std
            );
        }
        out
    }
}

/// Seed used for the bootstrap of heatmap cell `index` (row-major over
/// `k_list × m_list`).
pub fn heatmap_cell_seed(seed: u64, index: usize) -> u64 {
    derive_seed(seed, stream::HEATMAP, index as u64)
}

/// Draw the generated and reference sets for heatmap cell `index`.
pub fn heatmap_cell_draws(
    generated: &PopulationSource,
    reference: &PopulationSource,
    k: usize,
    m: usize,
    seed: u64,
    index: usize,
) -> Result<(SampleSet, SampleSet)> {
    let base = heatmap_cell_seed(seed, index);
    let g = generated.draw(k, &mut sub_rng(base, stream::DRAW_GENERATED, 0))?;
    let r = reference.draw(m, &mut sub_rng(base, stream::DRAW_REFERENCE, 0))?;
    Ok((g, r))
}

pub fn std_heatmap(
    generated: &PopulationSource,
    reference: &PopulationSource,
    spec: &FunctionClassSpec,
    config: &HeatmapConfig,
) -> Result<HeatmapTable> {
    if config.k_list.is_empty() || config.m_list.is_empty() {
        return Err(MprError::InvalidArgument(
            "k_list and m_list must be nonempty".into(),
        ));
    }
    config.bootstrap.validate()?;
    let grid: Vec<(usize, usize)> = config
        .k_list
        .iter()
        .flat_map(|&k| config.m_list.iter().map(move |&m| (k, m)))
        .collect();
    let cells = grid
        .iter()
        .enumerate()
        .map(|(index, &(k, m))| {
            let (g, r) = heatmap_cell_draws(generated, reference, k, m, config.seed, index)?;
            let boot = bootstrap_mpr(
                &g,
                &r,
                spec,
                &config.bootstrap,
                heatmap_cell_seed(config.seed, index),
            )?;
            Ok(HeatmapCell {
                k,
                m,
                point_estimate: boot.point_estimate,
                mean: boot.mean,
                std: boot.std,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(HeatmapTable { cells })
}
