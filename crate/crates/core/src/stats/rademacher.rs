//! Monte-Carlo estimate of the empirical Rademacher complexity
//! `E_σ sup_c Σ_i w_i σ_i c(x_i)` (with `w_i = 1/n` for unweighted sets).
//!
//! The inner supremum is exact for every class: a norm for the linear class,
//! a cell-wise sign choice plus subset scan for trees, a direct maximum for
//! explicit sets. Explicit sets are symmetrised (`c` and `−c`), matching the
//! absolute value inside MPR.

use std::collections::HashMap;

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::attributes::SampleSet;
use crate::error::{MprError, Result};
use crate::function_classes::{FunctionClassSpec, Witness};
use crate::mpr::PatternTable;
use crate::rng::{stream, sub_rng};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RademacherEstimate {
    pub value: f64,
    pub trials: usize,
    pub std_error: f64,
}

pub fn empirical_rademacher(
    spec: &FunctionClassSpec,
    s: &SampleSet,
    trials: usize,
    seed: u64,
) -> Result<RademacherEstimate> {
    if trials == 0 {
        return Err(MprError::InvalidArgument(
            "trials must be at least 1".into(),
        ));
    }
    if s.is_empty() {
        return Err(MprError::EmptySampleSet);
    }
    spec.validate(s.schema())?;

    // distinct patterns and the pattern of each row
    let mut lookup: HashMap<Vec<i8>, usize> = HashMap::new();
    let mut patterns: Vec<&[f64]> = Vec::new();
    let row_pattern: Vec<usize> = s
        .rows()
        .map(|row| {
            let key: Vec<i8> = row.iter().map(|x| if *x > 0.0 { 1 } else { -1 }).collect();
            *lookup.entry(key).or_insert_with(|| {
                patterns.push(row);
                patterns.len() - 1
            })
        })
        .collect();
    let weights: Vec<f64> = (0..s.len()).map(|i| s.weight(i)).collect();

    let table = PatternTable::new(&patterns, s.dim());
    let indicators = match spec {
        FunctionClassSpec::ExplicitSet { .. } => spec
            .compile_indicators(s.schema())?
            .into_iter()
            .map(Witness::Indicator)
            .collect(),
        _ => Vec::new(),
    };

    let draws: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = sub_rng(seed, stream::RADEMACHER, t as u64);
            let mut mass = vec![0.0; patterns.len()];
            for (p, w) in row_pattern.iter().zip(&weights) {
                if rng.random::<bool>() {
                    mass[*p] += w;
                } else {
                    mass[*p] -= w;
                }
            }
            match spec {
                FunctionClassSpec::BoundedLinear => {
                    let mut v = vec![0.0; s.dim()];
                    for (pattern, m) in patterns.iter().zip(&mass) {
                        for (vj, x) in v.iter_mut().zip(pattern.iter()) {
                            *vj += m * x;
                        }
                    }
                    Ok(v.iter().map(|x| x * x).sum::<f64>().sqrt())
                }
                FunctionClassSpec::DecisionTree { depth } => Ok(table.scan(*depth, &mass)?.value),
                FunctionClassSpec::ExplicitSet { .. } => Ok(indicators
                    .iter()
                    .map(|c| {
                        patterns
                            .iter()
                            .zip(&mass)
                            .map(|(p, m)| m * c.evaluate_unchecked(p))
                            .sum::<f64>()
                            .abs()
                    })
                    .fold(0.0, f64::max)),
            }
        })
        .collect::<Result<_>>()?;

    let value = super::mean(&draws);
    let std_error = if trials > 1 {
        (super::sample_variance(&draws) / trials as f64).sqrt()
    } else {
        0.0
    };
    Ok(RademacherEstimate {
        value,
        trials,
        std_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attributes::{load_schema, AttributeSchema, JointDistribution};
    use crate::rng::rng_from_seed;
    use std::sync::Arc;

    fn schema() -> Arc<AttributeSchema> {
        Arc::new(
            load_schema(
                r#"{"attributes":[{"name":"g","categories":["m","f"]},{"name":"a","categories":["y","o","z"]}]}"#,
            )
            .unwrap(),
        )
    }

    #[test]
    fn single_point_values() {
        let s = SampleSet::from_cells(schema(), &[vec![1, 2]], None, "one").unwrap();
        let tree = empirical_rademacher(&FunctionClassSpec::tree(2), &s, 25, 3).unwrap();
        assert!((tree.value - 1.0).abs() < 1e-15);
        assert_eq!(tree.std_error, 0.0);
        let lin = empirical_rademacher(&FunctionClassSpec::BoundedLinear, &s, 25, 3).unwrap();
        assert!((lin.value - 5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn tree_complexity_decays_with_sample_size() {
        let s = schema();
        let d = JointDistribution::uniform(s).unwrap();
        let small = d.sample(200, &mut rng_from_seed(1), "s").unwrap();
        let large = d.sample(2000, &mut rng_from_seed(2), "l").unwrap();
        let spec = FunctionClassSpec::tree(1);
        let a = empirical_rademacher(&spec, &small, 200, 5).unwrap();
        let b = empirical_rademacher(&spec, &large, 200, 5).unwrap();
        assert!(b.value < a.value);
        // O(1/√n): ten times the data shrinks the estimate by roughly √10
        let ratio = a.value / b.value;
        assert!(ratio > 2.0 && ratio < 4.5, "ratio {ratio}");
        assert!(a.value <= 1.0);
    }

    #[test]
    fn deterministic_per_seed() {
        let s = schema();
        let d = JointDistribution::uniform(s).unwrap();
        let set = d.sample(100, &mut rng_from_seed(1), "s").unwrap();
        let spec = FunctionClassSpec::tree(2);
        assert_eq!(
            empirical_rademacher(&spec, &set, 30, 9).unwrap(),
            empirical_rademacher(&spec, &set, 30, 9).unwrap()
        );
        assert!(empirical_rademacher(&spec, &set, 0, 9).is_err());
    }
}
