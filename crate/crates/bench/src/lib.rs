//! Synthetic workloads shared by the benchmarks in `benches/`.

use std::sync::Arc;

use mpr_core::rng::rng_from_seed;
use mpr_core::{load_schema, AttributeSchema, JointDistribution, SampleSet};

/// A schema of `attributes` attributes with `categories` categories each.
pub fn schema(attributes: usize, categories: usize) -> Arc<AttributeSchema> {
    let attrs: Vec<String> = (0..attributes)
        .map(|a| {
            let cats: Vec<String> = (0..categories).map(|c| format!("\"c{c}\"")).collect();
            format!(r#"{{"name":"a{a}","categories":[{}]}}"#, cats.join(","))
        })
        .collect();
    Arc::new(
        load_schema(&format!(r#"{{"attributes":[{}]}}"#, attrs.join(","))).expect("valid schema"),
    )
}

/// A skewed distribution: cell `i` gets weight proportional to `1 / (1 + i)`.
pub fn skewed(schema: &Arc<AttributeSchema>) -> JointDistribution {
    let cells = schema.joint_cells().expect("small schema");
    let weights: Vec<f64> = (0..cells.len()).map(|i| 1.0 / (1.0 + i as f64)).collect();
    let total: f64 = weights.iter().sum();
    JointDistribution::new(
        Arc::clone(schema),
        cells
            .into_iter()
            .zip(weights.into_iter().map(|w| w / total))
            .collect(),
    )
    .expect("normalised")
}

/// `k` skewed generated rows and `m` uniform reference rows.
pub fn sample_pair(
    schema: &Arc<AttributeSchema>,
    k: usize,
    m: usize,
    seed: u64,
) -> (SampleSet, SampleSet) {
    let mut rng = rng_from_seed(seed);
    let g = skewed(schema)
        .sample(k, &mut rng, "generated")
        .expect("k > 0");
    let r = JointDistribution::uniform(Arc::clone(schema))
        .expect("small schema")
        .sample(m, &mut rng, "reference")
        .expect("m > 0");
    (g, r)
}
