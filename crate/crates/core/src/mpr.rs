//! Empirical and exact MPR for each function class.
//!
//! * bounded linear: the supremum of `|E_G[wᵀx] − E_R[wᵀx]|` over the unit
//!   ball is the norm of the mean-difference vector, attained at its direction;
//! * depth-`ℓ` trees: the supremum is `max_{|I|=ℓ} 2·TV` between the marginals
//!   on `I`, attained by labelling each cell `+1` where the generated mass is
//!   at least the reference mass;
//! * explicit sets: a direct maximum over the listed indicators.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::attributes::{AttributeSchema, JointDistribution, SampleSet};
use crate::error::{MprError, Result};
use crate::function_classes::{
    binomial, enumerate_subsets, FunctionClassSpec, LinearWitness, TreeWitness, Witness,
    MAX_TREE_DEPTH,
};
use crate::stats::bootstrap::BootstrapSummary;

/// Largest number of feature subsets `mpr_tree` scans before refusing.
pub const MAX_TREE_SUBSETS: u128 = 1_000_000;
const PARALLEL_SUBSET_THRESHOLD: u128 = 20_000;
const EXPLICIT_TIE_TOL: f64 = 1e-12;

/// `v = Xᵀã`: weighted generated mean minus weighted reference mean.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeanDifferenceVector {
    pub v: Vec<f64>,
    pub k: usize,
    pub m: usize,
}

impl MeanDifferenceVector {
    pub fn norm(&self) -> f64 {
        self.v.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

/// Result of an MPR computation.
#[derive(Debug, Clone)]
pub struct MprEstimate {
    pub value: f64,
    pub spec: FunctionClassSpec,
    pub witness: Witness,
    pub k: usize,
    pub m: usize,
    pub bootstrap: Option<BootstrapSummary>,
}

impl MprEstimate {
    pub fn to_json(&self, schema: &AttributeSchema) -> serde_json::Value {
        serde_json::json!({
            "value": self.value,
            "class": self.spec,
            "witness": self.witness.describe(schema),
            "k": self.k,
            "m": self.m,
            "bootstrap": self.bootstrap,
        })
    }
}

fn check_pair(g: &SampleSet, r: &SampleSet) -> Result<()> {
    if !g.same_schema(r) {
        return Err(MprError::SchemaMismatch);
    }
    if g.is_empty() || r.is_empty() {
        return Err(MprError::EmptySampleSet);
    }
    Ok(())
}

pub fn mean_diff_vector(g: &SampleSet, r: &SampleSet) -> Result<MeanDifferenceVector> {
    check_pair(g, r)?;
    let mg = g.mean_vector();
    let mr = r.mean_vector();
    Ok(MeanDifferenceVector {
        v: mg.iter().zip(&mr).map(|(a, b)| a - b).collect(),
        k: g.len(),
        m: r.len(),
    })
}

/// Norm of `v` and the unit direction attaining it (zero direction when `v = 0`).
pub fn linear_sup(v: &[f64]) -> (f64, Vec<f64>) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        (norm, v.iter().map(|x| x / norm).collect())
    } else {
        (0.0, vec![0.0; v.len()])
    }
}

/// `Xᵀã` for raw real-valued rows, with `ã_i = 1/k` on generated rows and
/// `−1/m` on reference rows. Features need not be `±1` encodings here.
pub fn mean_diff_from_rows(generated: &[Vec<f64>], reference: &[Vec<f64>]) -> Result<Vec<f64>> {
    if generated.is_empty() || reference.is_empty() {
        return Err(MprError::EmptySampleSet);
    }
    let d = generated[0].len();
    if let Some(bad) = generated.iter().chain(reference).find(|row| row.len() != d) {
        return Err(MprError::DimensionMismatch {
            expected: d,
            got: bad.len(),
        });
    }
    let (k, m) = (generated.len() as f64, reference.len() as f64);
    let coefficients = std::iter::repeat_n(1.0 / k, generated.len())
        .chain(std::iter::repeat_n(-1.0 / m, reference.len()));
    let mut v = vec![0.0; d];
    for (a, row) in coefficients.zip(generated.iter().chain(reference)) {
        for (vj, xj) in v.iter_mut().zip(row) {
            *vj += a * xj;
        }
    }
    Ok(v)
}

/// Linear-class MPR over raw real-valued rows: `(‖Xᵀã‖, Xᵀã/‖Xᵀã‖)`.
pub fn linear_mpr_from_rows(
    generated: &[Vec<f64>],
    reference: &[Vec<f64>],
) -> Result<(f64, Vec<f64>)> {
    Ok(linear_sup(&mean_diff_from_rows(generated, reference)?))
}

pub fn mpr_linear(g: &SampleSet, r: &SampleSet) -> Result<MprEstimate> {
    let diff = mean_diff_vector(g, r)?;
    let (value, w) = linear_sup(&diff.v);
    let witness = if value > 0.0 {
        // renormalisation can overshoot 1 by an ulp
        LinearWitness::new(w)?
    } else {
        LinearWitness::zero(diff.v.len())
    };
    Ok(MprEstimate {
        value,
        spec: FunctionClassSpec::BoundedLinear,
        witness: Witness::Linear(witness),
        k: diff.k,
        m: diff.m,
        bootstrap: None,
    })
}

/// Empirical distribution over `{-1,+1}^ℓ` cells.
#[derive(Debug, Clone, PartialEq)]
pub struct CellDistribution {
    arity: usize,
    probs: BTreeMap<Vec<i8>, f64>,
}

impl CellDistribution {
    pub fn new(arity: usize, probs: BTreeMap<Vec<i8>, f64>) -> Result<Self> {
        if probs
            .keys()
            .any(|k| k.len() != arity || k.iter().any(|s| *s != 1 && *s != -1))
        {
            return Err(MprError::Distribution(format!(
                "cells must be ±1 tuples of length {arity}"
            )));
        }
        if probs.values().any(|p| !(0.0..=1.0 + 1e-12).contains(p)) {
            return Err(MprError::Distribution(
                "cell probability outside [0,1]".into(),
            ));
        }
        let sum: f64 = probs.values().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(MprError::Distribution(format!(
                "cell probabilities sum to {sum}"
            )));
        }
        Ok(Self { arity, probs })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn get(&self, cell: &[i8]) -> f64 {
        self.probs.get(cell).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Vec<i8>, &f64)> {
        self.probs.iter()
    }
}

/// `½ Σ |a(cell) − b(cell)|` over the union of supports.
pub fn tv_distance(a: &CellDistribution, b: &CellDistribution) -> Result<f64> {
    if a.arity != b.arity {
        return Err(MprError::DimensionMismatch {
            expected: a.arity,
            got: b.arity,
        });
    }
    let mut total = 0.0;
    for (cell, p) in &a.probs {
        total += (p - b.get(cell)).abs();
    }
    for (cell, q) in &b.probs {
        if !a.probs.contains_key(cell) {
            total += q;
        }
    }
    Ok((total / 2.0).min(1.0))
}

/// Weighted frequency of each projection of the rows onto `subset`.
pub fn marginal_cells(s: &SampleSet, subset: &[usize]) -> Result<CellDistribution> {
    if subset.is_empty() {
        return Err(MprError::InvalidArgument(
            "marginal needs at least one feature".into(),
        ));
    }
    if let Some(&bad) = subset.iter().find(|&&f| f >= s.dim()) {
        return Err(MprError::InvalidArgument(format!(
            "feature index {bad} out of range (dim {})",
            s.dim()
        )));
    }
    let mut probs: BTreeMap<Vec<i8>, f64> = BTreeMap::new();
    for (i, row) in s.rows().enumerate() {
        let cell: Vec<i8> = subset
            .iter()
            .map(|&f| if row[f] > 0.0 { 1 } else { -1 })
            .collect();
        *probs.entry(cell).or_insert(0.0) += s.weight(i);
    }
    Ok(CellDistribution {
        arity: subset.len(),
        probs,
    })
}

/// Feature-major view of a set of distinct patterns, used to scan subsets.
pub(crate) struct PatternTable {
    /// `positive[f][p]` is true when pattern `p` has `+1` at feature `f`.
    positive: Vec<Vec<bool>>,
    n_patterns: usize,
}

pub(crate) struct SubsetScan {
    pub value: f64,
    pub subset: Vec<usize>,
    pub cells: Vec<f64>,
}

impl PatternTable {
    pub(crate) fn new(patterns: &[&[f64]], dim: usize) -> Self {
        let positive = (0..dim)
            .map(|f| patterns.iter().map(|p| p[f] > 0.0).collect())
            .collect();
        Self {
            positive,
            n_patterns: patterns.len(),
        }
    }

    pub(crate) fn dim(&self) -> usize {
        self.positive.len()
    }

    /// `Σ_cells |Σ_{p ∈ cell} mass[p]|` for one subset, plus the cell sums.
    fn cell_sums(&self, subset: &[usize], mass: &[f64], cells: &mut [f64]) -> f64 {
        cells.iter_mut().for_each(|c| *c = 0.0);
        for (p, &m) in mass.iter().enumerate().take(self.n_patterns) {
            let mut key = 0usize;
            for (j, &f) in subset.iter().enumerate() {
                key |= usize::from(self.positive[f][p]) << j;
            }
            cells[key] += m;
        }
        cells.iter().map(|c| c.abs()).sum()
    }

    /// Maximise `Σ_cells |cell sum|` over all size-`depth` subsets.
    ///
    /// Ties keep the lexicographically smallest subset; the result is the same
    /// whether or not the scan is split across threads.
    pub(crate) fn scan(&self, depth: usize, mass: &[f64]) -> Result<SubsetScan> {
        let n = self.dim();
        if depth == 0 || depth > n {
            return Err(MprError::InvalidArgument(format!(
                "tree depth {depth} outside 1..={n}"
            )));
        }
        if depth > MAX_TREE_DEPTH {
            return Err(MprError::Guard(format!(
                "tree depth {depth} exceeds {MAX_TREE_DEPTH}"
            )));
        }
        let count = binomial(n, depth);
        if count > MAX_TREE_SUBSETS {
            return Err(MprError::Guard(format!(
                "C({n},{depth}) = {count} subsets exceeds the exact-scan limit {MAX_TREE_SUBSETS}"
            )));
        }
        let width = 1usize << depth;
        let subsets = enumerate_subsets(n, depth)?;

        let best = if count > PARALLEL_SUBSET_THRESHOLD {
            let all: Vec<Vec<usize>> = subsets.collect();
            let (_, idx) = all
                .par_chunks(4096)
                .enumerate()
                .map(|(chunk_idx, chunk)| {
                    let mut cells = vec![0.0; width];
                    let mut best = (f64::NEG_INFINITY, 0usize);
                    for (i, s) in chunk.iter().enumerate() {
                        let v = self.cell_sums(s, mass, &mut cells);
                        if v > best.0 {
                            best = (v, chunk_idx * 4096 + i);
                        }
                    }
                    best
                })
                .reduce(
                    || (f64::NEG_INFINITY, usize::MAX),
                    |a, b| {
                        if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
                            b
                        } else {
                            a
                        }
                    },
                );
            all[idx].clone()
        } else {
            let mut cells = vec![0.0; width];
            let mut best: Option<(f64, Vec<usize>)> = None;
            for s in subsets {
                let v = self.cell_sums(&s, mass, &mut cells);
                if best.as_ref().is_none_or(|(b, _)| v > *b) {
                    best = Some((v, s));
                }
            }
            best.expect("at least one subset").1
        };

        let mut cells = vec![0.0; width];
        let value = self.cell_sums(&best, mass, &mut cells);
        Ok(SubsetScan {
            value,
            subset: best,
            cells,
        })
    }
}

/// Distinct patterns of `g ∪ r` with mass `G(pattern) − R(pattern)`.
pub(crate) fn pattern_deltas(g: &SampleSet, r: &SampleSet) -> (Vec<Vec<f64>>, Vec<f64>) {
    let pg = g.pattern_masses();
    let pr = r.pattern_masses();
    let mut patterns = Vec::with_capacity(pg.len() + pr.len());
    let mut deltas = Vec::with_capacity(pg.len() + pr.len());
    let (mut i, mut j) = (0, 0);
    while i < pg.len() || j < pr.len() {
        let ord = match (pg.get(i), pr.get(j)) {
            (Some(a), Some(b)) => {
                a.0.iter()
                    .zip(&b.0)
                    .map(|(x, y)| x.total_cmp(y))
                    .find(|o| o.is_ne())
                    .unwrap_or(std::cmp::Ordering::Equal)
            }
            (Some(_), None) => std::cmp::Ordering::Less,
            (None, _) => std::cmp::Ordering::Greater,
        };
        match ord {
            std::cmp::Ordering::Less => {
                patterns.push(pg[i].0.clone());
                deltas.push(pg[i].1);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                patterns.push(pr[j].0.clone());
                deltas.push(-pr[j].1);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                patterns.push(pg[i].0.clone());
                deltas.push(pg[i].1 - pr[j].1);
                i += 1;
                j += 1;
            }
        }
    }
    (patterns, deltas)
}

pub fn mpr_tree(g: &SampleSet, r: &SampleSet, depth: usize) -> Result<MprEstimate> {
    check_pair(g, r)?;
    let (patterns, deltas) = pattern_deltas(g, r);
    let refs: Vec<&[f64]> = patterns.iter().map(Vec::as_slice).collect();
    let table = PatternTable::new(&refs, g.dim());
    let scan = table.scan(depth, &deltas)?;
    // +1 where the generated mass is at least the reference mass
    let leaf_signs = scan
        .cells
        .iter()
        .map(|&d| if d >= 0.0 { 1 } else { -1 })
        .collect();
    let witness = TreeWitness::new(scan.subset, leaf_signs, g.dim())?;
    Ok(MprEstimate {
        value: scan.value,
        spec: FunctionClassSpec::tree(depth),
        witness: Witness::Tree(witness),
        k: g.len(),
        m: r.len(),
        bootstrap: None,
    })
}

pub fn mpr_explicit(g: &SampleSet, r: &SampleSet, spec: &FunctionClassSpec) -> Result<MprEstimate> {
    check_pair(g, r)?;
    let indicators = spec.compile_indicators(g.schema())?;
    let (patterns, deltas) = pattern_deltas(g, r);
    let mut best: Option<(f64, usize)> = None;
    for (idx, ind) in indicators.iter().enumerate() {
        let w = Witness::Indicator(ind.clone());
        let diff: f64 = patterns
            .iter()
            .zip(&deltas)
            .map(|(p, d)| d * w.evaluate_unchecked(p))
            .sum();
        let v = diff.abs();
        // values equal up to rounding count as ties and keep the earlier indicator
        if best.is_none_or(|(b, _)| v > b + EXPLICIT_TIE_TOL * b.max(1.0)) {
            best = Some((v, idx));
        }
    }
    let (value, idx) = best.expect("explicit set is nonempty");
    Ok(MprEstimate {
        value,
        spec: spec.clone(),
        witness: Witness::Indicator(indicators[idx].clone()),
        k: g.len(),
        m: r.len(),
        bootstrap: None,
    })
}

/// Empirical MPR of `g` against `r` over `spec`.
pub fn mpr(g: &SampleSet, r: &SampleSet, spec: &FunctionClassSpec) -> Result<MprEstimate> {
    match spec {
        FunctionClassSpec::BoundedLinear => mpr_linear(g, r),
        FunctionClassSpec::DecisionTree { depth } => mpr_tree(g, r, *depth),
        FunctionClassSpec::ExplicitSet { .. } => mpr_explicit(g, r, spec),
    }
}

/// Population MPR between two exact joint distributions.
pub fn mpr_exact(
    p: &JointDistribution,
    r: &JointDistribution,
    spec: &FunctionClassSpec,
) -> Result<MprEstimate> {
    if p.schema() != r.schema() {
        return Err(MprError::SchemaMismatch);
    }
    spec.validate(p.schema())?;
    mpr(
        &p.to_weighted_set("generated"),
        &r.to_weighted_set("reference"),
        spec,
    )
}

/// Signed mean difference `E_G[c] − E_R[c]` for one witness.
pub fn witness_gap(witness: &Witness, g: &SampleSet, r: &SampleSet) -> Result<f64> {
    let mean = |s: &SampleSet| -> Result<f64> {
        let mut acc = 0.0;
        for (i, row) in s.rows().enumerate() {
            acc += s.weight(i) * witness.evaluate(row)?;
        }
        Ok(acc)
    };
    Ok(mean(g)? - mean(r)?)
}
