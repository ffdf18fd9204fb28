//! Function classes over encoded feature vectors and their maximisers.
//!
//! A depth-`ℓ` decision tree over `±1` features is stored extensionally: the
//! sorted subset `I` of features it reads plus a sign for each of the `2^ℓ`
//! cells of `{-1,+1}^I`. Any tree reading the features in `I` collapses to such
//! a table, so the representation is canonical.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::attributes::AttributeSchema;
use crate::error::{MprError, Result};

/// Norm slack accepted for linear witnesses.
pub const LINEAR_NORM_TOL: f64 = 1e-9;
/// Largest depth for which a full leaf table is materialised.
pub const MAX_TREE_DEPTH: usize = 24;

fn default_outputs() -> [f64; 2] {
    [-1.0, 1.0]
}

/// `outputs[1]` when every `attribute = category` in `predicate` holds,
/// `outputs[0]` otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Indicator {
    pub predicate: BTreeMap<String, String>,
    #[serde(default = "default_outputs")]
    pub outputs: [f64; 2],
}

impl Indicator {
    pub fn new<K: Into<String>, V: Into<String>>(
        predicate: impl IntoIterator<Item = (K, V)>,
        outputs: [f64; 2],
    ) -> Self {
        Self {
            predicate: predicate
                .into_iter()
                .map(|(k, v)| (k.into(), v.into()))
                .collect(),
            outputs,
        }
    }

    fn compile(&self, index: usize, schema: &AttributeSchema) -> Result<IndicatorWitness> {
        if self.predicate.is_empty() {
            return Err(MprError::InvalidArgument(format!(
                "indicator {index} has an empty predicate"
            )));
        }
        if self.outputs.iter().any(|o| !o.is_finite()) {
            return Err(MprError::InvalidArgument(format!(
                "indicator {index} has non-finite outputs"
            )));
        }
        let mut features = self
            .predicate
            .iter()
            .map(|(attr, cat)| {
                schema.feature_index(attr, cat).ok_or_else(|| {
                    MprError::InvalidArgument(format!(
                        "indicator {index}: `{attr}={cat}` is not a schema feature"
                    ))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        features.sort_unstable();
        Ok(IndicatorWitness {
            index,
            features,
            outputs: self.outputs,
            dim: schema.feature_dim(),
        })
    }
}

/// The class `𝒞` over which the supremum is taken.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FunctionClassSpec {
    /// `{x ↦ wᵀx : ‖w‖₂ ≤ 1}`, no bias term.
    BoundedLinear,
    /// `{-1,+1}`-valued trees reading `depth` binary features.
    DecisionTree { depth: usize },
    /// A finite list of indicator functions.
    ExplicitSet { indicators: Vec<Indicator> },
}

impl FunctionClassSpec {
    pub fn tree(depth: usize) -> Self {
        FunctionClassSpec::DecisionTree { depth }
    }

    pub fn validate(&self, schema: &AttributeSchema) -> Result<()> {
        match self {
            FunctionClassSpec::BoundedLinear => Ok(()),
            FunctionClassSpec::DecisionTree { depth } => {
                if *depth == 0 || *depth > schema.feature_dim() {
                    Err(MprError::InvalidArgument(format!(
                        "tree depth {depth} outside 1..={}",
                        schema.feature_dim()
                    )))
                } else {
                    Ok(())
                }
            }
            FunctionClassSpec::ExplicitSet { .. } => self.compile_indicators(schema).map(|_| ()),
        }
    }

    /// Resolve indicator predicates to feature indices.
    pub fn compile_indicators(&self, schema: &AttributeSchema) -> Result<Vec<IndicatorWitness>> {
        match self {
            FunctionClassSpec::ExplicitSet { indicators } => {
                if indicators.is_empty() {
                    return Err(MprError::InvalidArgument("explicit set is empty".into()));
                }
                indicators
                    .iter()
                    .enumerate()
                    .map(|(i, ind)| ind.compile(i, schema))
                    .collect()
            }
            _ => Err(MprError::InvalidArgument("not an explicit set".into())),
        }
    }

    /// Short label used in reports, e.g. `tree(depth=3)`.
    pub fn label(&self) -> String {
        match self {
            FunctionClassSpec::BoundedLinear => "linear".into(),
            FunctionClassSpec::DecisionTree { depth } => format!("tree(depth={depth})"),
            FunctionClassSpec::ExplicitSet { indicators } => {
                format!("explicit(n={})", indicators.len())
            }
        }
    }
}

/// `B = sup |c(X) − c(X′)|` over the class and inputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RangeConstant(pub f64);

pub fn range_constant(spec: &FunctionClassSpec, schema: &AttributeSchema) -> RangeConstant {
    let b = match spec {
        FunctionClassSpec::DecisionTree { .. } => 2.0,
        // ‖x − x′‖ ≤ 2√d on the cube
        FunctionClassSpec::BoundedLinear => 2.0 * (schema.feature_dim() as f64).sqrt(),
        FunctionClassSpec::ExplicitSet { indicators } => indicators
            .iter()
            .map(|ind| (ind.outputs[1] - ind.outputs[0]).abs())
            .fold(0.0, f64::max),
    };
    RangeConstant(b)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearWitness {
    weights: Vec<f64>,
}

impl LinearWitness {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        let norm = weights.iter().map(|w| w * w).sum::<f64>().sqrt();
        if !norm.is_finite() || norm > 1.0 + LINEAR_NORM_TOL {
            return Err(MprError::InvalidArgument(format!(
                "linear witness norm {norm} exceeds 1"
            )));
        }
        Ok(Self { weights })
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            weights: vec![0.0; dim],
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct TreeWitness {
    features: Vec<usize>,
    leaf_signs: Vec<i8>,
    dim: usize,
}

impl TreeWitness {
    /// `leaf_signs[cell]` where bit `j` of `cell` is set iff `x[features[j]] = +1`.
    pub fn new(features: Vec<usize>, leaf_signs: Vec<i8>, dim: usize) -> Result<Self> {
        if features.is_empty() || features.len() > MAX_TREE_DEPTH {
            return Err(MprError::InvalidArgument(format!(
                "tree witness must read 1..={MAX_TREE_DEPTH} features"
            )));
        }
        if features.windows(2).any(|w| w[0] >= w[1]) {
            return Err(MprError::InvalidArgument(
                "tree features must be strictly increasing".into(),
            ));
        }
        if *features.last().unwrap() >= dim {
            return Err(MprError::InvalidArgument(
                "tree feature index out of range".into(),
            ));
        }
        if leaf_signs.len() != 1 << features.len() {
            return Err(MprError::InvalidArgument(format!(
                "expected {} leaf signs, got {}",
                1usize << features.len(),
                leaf_signs.len()
            )));
        }
        if leaf_signs.iter().any(|s| *s != 1 && *s != -1) {
            return Err(MprError::InvalidArgument("leaf signs must be ±1".into()));
        }
        Ok(Self {
            features,
            leaf_signs,
            dim,
        })
    }

    pub fn features(&self) -> &[usize] {
        &self.features
    }

    pub fn leaf_signs(&self) -> &[i8] {
        &self.leaf_signs
    }

    pub fn depth(&self) -> usize {
        self.features.len()
    }

    pub fn cell_of(&self, x: &[f64]) -> usize {
        self.features
            .iter()
            .enumerate()
            .fold(0, |acc, (j, &f)| acc | (usize::from(x[f] > 0.0) << j))
    }

    /// `"101"`-style bit string of a cell (`1` = `+1`), in feature order.
    pub fn cell_bits(&self, cell: usize) -> String {
        (0..self.features.len())
            .map(|j| if cell >> j & 1 == 1 { '1' } else { '0' })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndicatorWitness {
    index: usize,
    features: Vec<usize>,
    outputs: [f64; 2],
    dim: usize,
}

impl IndicatorWitness {
    pub fn index(&self) -> usize {
        self.index
    }

    pub fn outputs(&self) -> [f64; 2] {
        self.outputs
    }

    pub fn features(&self) -> &[usize] {
        &self.features
    }

    fn holds(&self, x: &[f64]) -> bool {
        self.features.iter().all(|&f| x[f] > 0.0)
    }
}

/// A concrete function `c*` from one of the classes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Witness {
    Linear(LinearWitness),
    Tree(TreeWitness),
    Indicator(IndicatorWitness),
}

impl Witness {
    pub fn dim(&self) -> usize {
        match self {
            Witness::Linear(w) => w.weights.len(),
            Witness::Tree(t) => t.dim,
            Witness::Indicator(i) => i.dim,
        }
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(MprError::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(self.evaluate_unchecked(x))
    }

    /// Evaluate without the length check (`x.len()` must equal `dim()`).
    pub fn evaluate_unchecked(&self, x: &[f64]) -> f64 {
        match self {
            Witness::Linear(w) => w.weights.iter().zip(x).map(|(a, b)| a * b).sum(),
            Witness::Tree(t) => f64::from(t.leaf_signs[t.cell_of(x)]),
            Witness::Indicator(i) => {
                if i.holds(x) {
                    i.outputs[1]
                } else {
                    i.outputs[0]
                }
            }
        }
    }

    /// JSON description with schema feature names.
    pub fn describe(&self, schema: &AttributeSchema) -> serde_json::Value {
        match self {
            Witness::Linear(w) => serde_json::json!({
                "kind": "linear",
                "weights": w.weights,
                "features": schema.feature_names(),
            }),
            Witness::Tree(t) => {
                let leaf_signs: BTreeMap<String, i8> = t
                    .leaf_signs
                    .iter()
                    .enumerate()
                    .map(|(cell, s)| (t.cell_bits(cell), *s))
                    .collect();
                serde_json::json!({
                    "kind": "tree",
                    "features": t.features.iter().map(|&f| schema.feature_name(f)).collect::<Vec<_>>(),
                    "leaf_signs": leaf_signs,
                })
            }
            Witness::Indicator(i) => serde_json::json!({
                "kind": "indicator",
                "index": i.index,
                "features": i.features.iter().map(|&f| schema.feature_name(f)).collect::<Vec<_>>(),
                "outputs": i.outputs,
            }),
        }
    }
}

pub fn evaluate(witness: &Witness, x: &[f64]) -> Result<f64> {
    witness.evaluate(x)
}

/// `C(n, k)` saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Lexicographic stream of the `C(n, ℓ)` size-`ℓ` subsets of `0..n`.
#[derive(Debug, Clone)]
pub struct Subsets {
    n: usize,
    current: Option<Vec<usize>>,
}

impl Iterator for Subsets {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.clone()?;
        let cur = self.current.as_mut().unwrap();
        let l = cur.len();
        // rightmost position that can still advance
        match (0..l).rev().find(|&i| cur[i] < self.n - l + i) {
            Some(i) => {
                cur[i] += 1;
                for j in i + 1..l {
                    cur[j] = cur[j - 1] + 1;
                }
            }
            None => self.current = None,
        }
        Some(out)
    }
}

pub fn enumerate_subsets(n: usize, l: usize) -> Result<Subsets> {
    if l == 0 || l > n {
        return Err(MprError::InvalidArgument(format!(
            "subset size {l} outside 1..={n}"
        )));
    }
    Ok(Subsets {
        n,
        current: Some((0..l).collect()),
    })
}
