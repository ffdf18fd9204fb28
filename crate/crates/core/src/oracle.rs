//! Independent brute-force checks for the closed forms in [`crate::mpr`].
//!
//! Neither routine shares code with the closed-form path: the linear oracle
//! probes random unit directions, the tree oracle enumerates every feature
//! subset together with every labelling of its cells.

use rand_distr::{Distribution, StandardNormal};

use crate::attributes::SampleSet;
use crate::error::{MprError, Result};
use crate::function_classes::{TreeWitness, Witness};
use crate::rng::{rng_from_seed, stream};

/// Upper limit on `C(n,ℓ)·2^(2^ℓ)` for [`brute_force_tree`].
pub const BRUTE_FORCE_LIMIT: f64 = 1e7;

fn weighted_mean(s: &SampleSet) -> Vec<f64> {
    let mut acc = vec![0.0; s.dim()];
    for i in 0..s.len() {
        let w = s.weight(i);
        for (a, x) in acc.iter_mut().zip(s.row(i)) {
            *a += w * x;
        }
    }
    acc
}

/// Best `|E_G[wᵀx] − E_R[wᵀx]|` over `trials` random unit vectors `w`.
pub fn brute_force_linear(g: &SampleSet, r: &SampleSet, trials: usize, seed: u64) -> Result<f64> {
    if trials == 0 {
        return Err(MprError::InvalidArgument(
            "trials must be at least 1".into(),
        ));
    }
    if !g.same_schema(r) {
        return Err(MprError::SchemaMismatch);
    }
    let mg = weighted_mean(g);
    let mr = weighted_mean(r);
    let mut rng = rng_from_seed(seed ^ stream::ORACLE);
    let mut w = vec![0.0; g.dim()];
    let mut best: f64 = 0.0;
    for _ in 0..trials {
        let mut norm: f64 = 0.0;
        for wj in w.iter_mut() {
            *wj = StandardNormal.sample(&mut rng);
            norm += *wj * *wj;
        }
        let norm = norm.sqrt();
        if norm == 0.0 {
            continue;
        }
        let eg: f64 = w.iter().zip(&mg).map(|(a, b)| a * b).sum::<f64>() / norm;
        let er: f64 = w.iter().zip(&mr).map(|(a, b)| a * b).sum::<f64>() / norm;
        best = best.max((eg - er).abs());
    }
    Ok(best)
}

/// Exhaustive maximum over feature subsets of size `depth` and all `2^(2^depth)`
/// sign labellings of their cells.
pub fn brute_force_tree(g: &SampleSet, r: &SampleSet, depth: usize) -> Result<(f64, Witness)> {
    if !g.same_schema(r) {
        return Err(MprError::SchemaMismatch);
    }
    let n = g.dim();
    if depth == 0 || depth > n {
        return Err(MprError::InvalidArgument(format!(
            "tree depth {depth} outside 1..={n}"
        )));
    }
    if n >= 64 || depth > 4 {
        return Err(MprError::Guard(
            "brute-force tree search is limited to depth ≤ 4, n < 64".into(),
        ));
    }
    let cells = 1usize << depth;
    let labellings = 1u64 << cells;
    let subsets = crate::function_classes::binomial(n, depth) as f64;
    if subsets * labellings as f64 > BRUTE_FORCE_LIMIT {
        return Err(MprError::Guard(format!(
            "C({n},{depth})·2^{cells} exceeds {BRUTE_FORCE_LIMIT}"
        )));
    }

    let cell_masses = |s: &SampleSet, subset: &[usize]| -> Vec<f64> {
        let mut masses = vec![0.0; cells];
        for i in 0..s.len() {
            let row = s.row(i);
            let cell = subset
                .iter()
                .enumerate()
                .filter(|(_, &f)| row[f] == 1.0)
                .map(|(j, _)| 1usize << j)
                .sum::<usize>();
            masses[cell] += s.weight(i);
        }
        masses
    };

    let mut best: Option<(f64, Vec<usize>, u64)> = None;
    for mask in 0u64..(1u64 << n) {
        if mask.count_ones() as usize != depth {
            continue;
        }
        let subset: Vec<usize> = (0..n).filter(|&f| mask >> f & 1 == 1).collect();
        let mg = cell_masses(g, &subset);
        let mr = cell_masses(r, &subset);
        for labelling in 0..labellings {
            let sign = |c: usize| if labelling >> c & 1 == 1 { 1.0 } else { -1.0 };
            let eg: f64 = (0..cells).map(|c| sign(c) * mg[c]).sum();
            let er: f64 = (0..cells).map(|c| sign(c) * mr[c]).sum();
            let v = (eg - er).abs();
            if best.as_ref().is_none_or(|(b, _, _)| v > *b) {
                best = Some((v, subset.clone(), labelling));
            }
        }
    }
    let (value, subset, labelling) = best.expect("at least one subset");
    let signs = (0..cells)
        .map(|c| if labelling >> c & 1 == 1 { 1 } else { -1 })
        .collect();
    Ok((value, Witness::Tree(TreeWitness::new(subset, signs, n)?)))
}
