use std::collections::BTreeMap;
use std::sync::Arc;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;

use crate::attributes::{AttributeSchema, JointDistribution, SampleSet};
use crate::error::{MprError, Result};
use crate::rng::rng_from_seed;

/// Probability floor used when turning a distribution into logits.
const LOGIT_FLOOR: f64 = 1e-12;

/// Numerically stable softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exp: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = exp.iter().sum();
    exp.into_iter().map(|e| e / total).collect()
}

/// Softmax-categorical generator over every joint cell of a schema.
#[derive(Debug, Clone)]
pub struct GeneratorModel {
    schema: Arc<AttributeSchema>,
    cells: Vec<Vec<usize>>,
    encodings: Vec<Vec<f64>>,
    logits: Vec<f64>,
    base_logits: Vec<f64>,
}

impl GeneratorModel {
    /// Start from explicit logits; they also become the frozen base.
    pub fn from_logits(schema: Arc<AttributeSchema>, logits: Vec<f64>) -> Result<Self> {
        let cells = schema.joint_cells()?;
        if logits.len() != cells.len() {
            return Err(MprError::DimensionMismatch {
                expected: cells.len(),
                got: logits.len(),
            });
        }
        if logits.iter().any(|l| !l.is_finite()) {
            return Err(MprError::InvalidArgument("logits must be finite".into()));
        }
        let encodings = cells
            .iter()
            .map(|c| schema.encode_indices(c))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            schema,
            cells,
            encodings,
            base_logits: logits.clone(),
            logits,
        })
    }

    /// Logits `ln max(p, 1e-12)` of a joint distribution; missing cells get the
    /// floor.
    pub fn from_distribution(dist: &JointDistribution) -> Result<Self> {
        let schema = Arc::clone(dist.schema_arc());
        let cells = schema.joint_cells()?;
        let logits = cells
            .iter()
            .map(|c| dist.probability(c).max(LOGIT_FLOOR).ln())
            .collect();
        Self::from_logits(schema, logits)
    }

    pub fn uniform(schema: Arc<AttributeSchema>) -> Result<Self> {
        let n = schema.joint_cells()?.len();
        Self::from_logits(schema, vec![0.0; n])
    }

    pub fn schema(&self) -> &AttributeSchema {
        &self.schema
    }

    pub fn schema_arc(&self) -> &Arc<AttributeSchema> {
        &self.schema
    }

    pub fn cells(&self) -> &[Vec<usize>] {
        &self.cells
    }

    /// ±1 feature vector of each cell, in cell order.
    pub fn encodings(&self) -> &[Vec<f64>] {
        &self.encodings
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn logits(&self) -> &[f64] {
        &self.logits
    }

    pub fn base_logits(&self) -> &[f64] {
        &self.base_logits
    }

    pub fn set_logits(&mut self, logits: Vec<f64>) -> Result<()> {
        if logits.len() != self.logits.len() {
            return Err(MprError::DimensionMismatch {
                expected: self.logits.len(),
                got: logits.len(),
            });
        }
        self.logits = logits;
        Ok(())
    }

    pub fn probabilities(&self) -> Vec<f64> {
        softmax(&self.logits)
    }

    pub fn base_probabilities(&self) -> Vec<f64> {
        softmax(&self.base_logits)
    }

    pub fn to_distribution(&self) -> JointDistribution {
        let cells = self
            .cells
            .iter()
            .cloned()
            .zip(self.probabilities())
            .collect();
        JointDistribution::new(Arc::clone(&self.schema), cells)
            .expect("softmax output is a valid distribution")
    }

    /// `{"probabilities": {cell key → p}, "logits": {cell key → θ}}`.
    pub fn to_json(&self) -> serde_json::Value {
        let keys: Vec<String> = self
            .cells
            .iter()
            .map(|c| self.schema.joint_key(c))
            .collect();
        let probabilities: BTreeMap<String, f64> =
            keys.iter().cloned().zip(self.probabilities()).collect();
        let logits: BTreeMap<String, f64> =
            keys.into_iter().zip(self.logits.iter().copied()).collect();
        serde_json::json!({ "probabilities": probabilities, "logits": logits })
    }
}

/// `batch` i.i.d. draws from `softmax(logits)`.
pub fn sample_batch(gen: &GeneratorModel, batch: usize, seed: u64) -> Result<SampleSet> {
    if batch == 0 {
        return Err(MprError::InvalidArgument(
            "batch size must be at least 1".into(),
        ));
    }
    let index = WeightedIndex::new(gen.probabilities())
        .map_err(|e| MprError::Distribution(e.to_string()))?;
    let mut rng = rng_from_seed(seed);
    let cells: Vec<Vec<usize>> = (0..batch)
        .map(|_| gen.cells[index.sample(&mut rng)].clone())
        .collect();
    SampleSet::from_cells(Arc::clone(&gen.schema), &cells, None, "batch")
}
