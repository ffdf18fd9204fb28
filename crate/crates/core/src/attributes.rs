//! Attribute schemas, ±1 one-hot encoding, and sample/reference populations.
//!
//! Every attribute with `c` categories contributes a block of `c` binary
//! features. A record sets the feature of its category to `+1` and every other
//! feature of the block to `-1`, so a schema with attributes of sizes
//! `c_1, …, c_A` yields vectors in `{-1, +1}^n` with `n = Σ c_a`.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use serde::{Deserialize, Serialize};

use crate::error::{MprError, Result};

/// Tolerance on weight / probability normalisation.
pub const NORMALIZATION_TOL: f64 = 1e-12;
/// Tolerance accepted from user-supplied proportions before renormalising.
pub const PROPORTION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attribute {
    pub name: String,
    pub categories: Vec<String>,
}

#[derive(Deserialize)]
struct SchemaDocument {
    attributes: Vec<Attribute>,
}

/// Ordered categorical attributes and the feature layout they induce.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttributeSchema {
    attributes: Vec<Attribute>,
    offsets: Vec<usize>,
    feature_dim: usize,
}

impl AttributeSchema {
    pub fn new(attributes: Vec<Attribute>) -> Result<Self> {
        if attributes.is_empty() {
            return Err(MprError::Schema("schema has no attributes".into()));
        }
        let mut seen = HashMap::new();
        let mut offsets = Vec::with_capacity(attributes.len());
        let mut dim = 0;
        for attr in &attributes {
            if attr.name.is_empty() {
                return Err(MprError::Schema("empty attribute name".into()));
            }
            if seen.insert(attr.name.as_str(), ()).is_some() {
                return Err(MprError::Schema(format!(
                    "duplicate attribute name `{}`",
                    attr.name
                )));
            }
            if attr.categories.len() < 2 {
                return Err(MprError::Schema(format!(
                    "attribute `{}` needs at least 2 categories, found {}",
                    attr.name,
                    attr.categories.len()
                )));
            }
            let mut cats = HashMap::new();
            for cat in &attr.categories {
                if cat.is_empty() || cat.contains('|') || cat.contains(',') {
                    return Err(MprError::Schema(format!(
                        "attribute `{}`: illegal category name `{cat}`",
                        attr.name
                    )));
                }
                if cats.insert(cat.as_str(), ()).is_some() {
                    return Err(MprError::Schema(format!(
                        "attribute `{}`: duplicate category `{cat}`",
                        attr.name
                    )));
                }
            }
            offsets.push(dim);
            dim += attr.categories.len();
        }
        Ok(Self {
            attributes,
            offsets,
            feature_dim: dim,
        })
    }

    pub fn attributes(&self) -> &[Attribute] {
        &self.attributes
    }

    pub fn num_attributes(&self) -> usize {
        self.attributes.len()
    }

    /// Total number of binary features, `Σ |categories|`.
    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    pub fn attribute_index(&self, name: &str) -> Option<usize> {
        self.attributes.iter().position(|a| a.name == name)
    }

    pub fn category_index(&self, attribute: usize, category: &str) -> Option<usize> {
        self.attributes[attribute]
            .categories
            .iter()
            .position(|c| c == category)
    }

    /// Index of the binary feature for `attribute = category`.
    pub fn feature_index(&self, attribute: &str, category: &str) -> Option<usize> {
        let a = self.attribute_index(attribute)?;
        let c = self.category_index(a, category)?;
        Some(self.offsets[a] + c)
    }

    /// Block `[start, end)` of feature indices owned by an attribute.
    pub fn block(&self, attribute: usize) -> std::ops::Range<usize> {
        let start = self.offsets[attribute];
        start..start + self.attributes[attribute].categories.len()
    }

    /// `"attribute=category"` name of a feature.
    pub fn feature_name(&self, feature: usize) -> String {
        let a = self.offsets.partition_point(|&o| o <= feature) - 1;
        let attr = &self.attributes[a];
        format!(
            "{}={}",
            attr.name,
            attr.categories[feature - self.offsets[a]]
        )
    }

    pub fn feature_names(&self) -> Vec<String> {
        (0..self.feature_dim)
            .map(|j| self.feature_name(j))
            .collect()
    }

    /// Encode per-attribute category indices (schema order).
    pub fn encode_indices(&self, categories: &[usize]) -> Result<Vec<f64>> {
        if categories.len() != self.attributes.len() {
            return Err(MprError::DimensionMismatch {
                expected: self.attributes.len(),
                got: categories.len(),
            });
        }
        let mut x = vec![-1.0; self.feature_dim];
        for (a, &c) in categories.iter().enumerate() {
            let attr = &self.attributes[a];
            if c >= attr.categories.len() {
                return Err(MprError::Record(format!(
                    "category index {c} out of range for `{}`",
                    attr.name
                )));
            }
            x[self.offsets[a] + c] = 1.0;
        }
        Ok(x)
    }

    pub fn encode(&self, record: &CategoricalRecord) -> Result<Vec<f64>> {
        let cats = self.record_indices(record)?;
        self.encode_indices(&cats)
    }

    fn record_indices(&self, record: &CategoricalRecord) -> Result<Vec<usize>> {
        for key in record.values.keys() {
            if self.attribute_index(key).is_none() {
                return Err(MprError::Record(format!("unknown attribute `{key}`")));
            }
        }
        self.attributes
            .iter()
            .enumerate()
            .map(|(a, attr)| {
                let value = record.values.get(&attr.name).ok_or_else(|| {
                    MprError::Record(format!("missing attribute `{}`", attr.name))
                })?;
                self.category_index(a, value).ok_or_else(|| {
                    MprError::Record(format!(
                        "unknown category `{value}` for attribute `{}`",
                        attr.name
                    ))
                })
            })
            .collect()
    }

    /// Per-attribute category indices of a valid encoding (argmax per block).
    pub fn decode_indices(&self, x: &[f64]) -> Result<Vec<usize>> {
        self.check_encoding(x)?;
        Ok((0..self.attributes.len())
            .map(|a| {
                self.block(a)
                    .position(|j| x[j] > 0.0)
                    .expect("validated encoding has one +1 per block")
            })
            .collect())
    }

    pub fn decode(&self, x: &[f64]) -> Result<CategoricalRecord> {
        let cats = self.decode_indices(x)?;
        Ok(CategoricalRecord {
            values: self
                .attributes
                .iter()
                .zip(cats)
                .map(|(attr, c)| (attr.name.clone(), attr.categories[c].clone()))
                .collect(),
        })
    }

    /// Check that `x` has exactly one `+1` per block and `-1` elsewhere.
    pub fn check_encoding(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.feature_dim {
            return Err(MprError::DimensionMismatch {
                expected: self.feature_dim,
                got: x.len(),
            });
        }
        for (a, attr) in self.attributes.iter().enumerate() {
            let mut hot = 0;
            for j in self.block(a) {
                if x[j] == 1.0 {
                    hot += 1;
                } else if x[j] != -1.0 {
                    return Err(MprError::Record(format!(
                        "feature {} has value {} (expected ±1)",
                        self.feature_name(j),
                        x[j]
                    )));
                }
            }
            if hot != 1 {
                return Err(MprError::Record(format!(
                    "attribute `{}` block has {hot} active categories (expected 1)",
                    attr.name
                )));
            }
        }
        Ok(())
    }

    /// Number of joint cells, `Π |categories|`, or `None` on overflow.
    pub fn joint_cell_count(&self) -> Option<usize> {
        self.attributes
            .iter()
            .try_fold(1usize, |acc, a| acc.checked_mul(a.categories.len()))
    }

    /// All joint cells in lexicographic order of category indices.
    pub fn joint_cells(&self) -> Result<Vec<Vec<usize>>> {
        const MAX_CELLS: usize = 1 << 20;
        let total = self
            .joint_cell_count()
            .filter(|&n| n <= MAX_CELLS)
            .ok_or_else(|| MprError::Guard(format!("more than {MAX_CELLS} joint cells")))?;
        let sizes: Vec<usize> = self.attributes.iter().map(|a| a.categories.len()).collect();
        let mut out = Vec::with_capacity(total);
        let mut cur = vec![0usize; sizes.len()];
        for _ in 0..total {
            out.push(cur.clone());
            for a in (0..sizes.len()).rev() {
                cur[a] += 1;
                if cur[a] < sizes[a] {
                    break;
                }
                cur[a] = 0;
            }
        }
        Ok(out)
    }

    /// `"cat1|cat2|…"` key of a joint cell.
    pub fn joint_key(&self, cell: &[usize]) -> String {
        self.attributes
            .iter()
            .zip(cell)
            .map(|(attr, &c)| attr.categories[c].as_str())
            .collect::<Vec<_>>()
            .join("|")
    }

    pub fn parse_joint_key(&self, key: &str) -> Result<Vec<usize>> {
        let parts: Vec<&str> = key.split('|').collect();
        if parts.len() != self.attributes.len() {
            return Err(MprError::Distribution(format!(
                "cell `{key}` has {} components, schema has {} attributes",
                parts.len(),
                self.attributes.len()
            )));
        }
        parts
            .iter()
            .enumerate()
            .map(|(a, part)| {
                self.category_index(a, part.trim()).ok_or_else(|| {
                    MprError::Distribution(format!(
                        "cell `{key}`: unknown category `{part}` for `{}`",
                        self.attributes[a].name
                    ))
                })
            })
            .collect()
    }
}

impl Serialize for AttributeSchema {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Doc<'a> {
            attributes: &'a [Attribute],
        }
        Doc {
            attributes: &self.attributes,
        }
        .serialize(s)
    }
}

/// Parse a schema document `{"attributes":[{"name":…, "categories":[…]}]}`.
pub fn load_schema(source: &str) -> Result<AttributeSchema> {
    let doc: SchemaDocument = serde_json::from_str(source)?;
    AttributeSchema::new(doc.attributes)
}

/// One categorical record: attribute name → category name.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CategoricalRecord {
    pub values: BTreeMap<String, String>,
}

impl CategoricalRecord {
    pub fn new<K: Into<String>, V: Into<String>>(pairs: impl IntoIterator<Item = (K, V)>) -> Self {
        Self {
            values: pairs
                .into_iter()
                .map(|(k, v)| (k.into(), v.into()))
                .collect(),
        }
    }
}

pub fn encode_record(schema: &AttributeSchema, record: &CategoricalRecord) -> Result<Vec<f64>> {
    schema.encode(record)
}

/// A (possibly weighted) population of encoded samples.
///
/// Rows are stored row-major as `±1` values. Without explicit weights every
/// row carries mass `1/k`.
#[derive(Debug, Clone)]
pub struct SampleSet {
    schema: Arc<AttributeSchema>,
    data: Vec<f64>,
    weights: Option<Vec<f64>>,
    label: String,
}

impl SampleSet {
    /// Build from already encoded rows; every row is validated against `schema`.
    pub fn from_rows(
        schema: Arc<AttributeSchema>,
        rows: Vec<Vec<f64>>,
        weights: Option<Vec<f64>>,
        label: impl Into<String>,
    ) -> Result<Self> {
        if rows.is_empty() {
            return Err(MprError::EmptySampleSet);
        }
        let mut data = Vec::with_capacity(rows.len() * schema.feature_dim());
        for (i, row) in rows.iter().enumerate() {
            schema.check_encoding(row).map_err(|e| MprError::Row {
                row: i + 1,
                message: e.to_string(),
            })?;
            data.extend_from_slice(row);
        }
        if let Some(w) = &weights {
            validate_weights(w, rows.len())?;
        }
        Ok(Self {
            schema,
            data,
            weights,
            label: label.into(),
        })
    }

    pub fn from_records(
        schema: Arc<AttributeSchema>,
        records: &[CategoricalRecord],
        label: impl Into<String>,
    ) -> Result<Self> {
        let rows = records
            .iter()
            .enumerate()
            .map(|(i, r)| {
                schema.encode(r).map_err(|e| MprError::Row {
                    row: i + 1,
                    message: e.to_string(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_rows(schema, rows, None, label)
    }

    /// Build from per-attribute category indices.
    pub fn from_cells(
        schema: Arc<AttributeSchema>,
        cells: &[Vec<usize>],
        weights: Option<Vec<f64>>,
        label: impl Into<String>,
    ) -> Result<Self> {
        let rows = cells
            .iter()
            .map(|c| schema.encode_indices(c))
            .collect::<Result<Vec<_>>>()?;
        Self::from_rows(schema, rows, weights, label)
    }

    pub fn schema(&self) -> &AttributeSchema {
        &self.schema
    }

    pub fn schema_arc(&self) -> &Arc<AttributeSchema> {
        &self.schema
    }

    pub fn same_schema(&self, other: &SampleSet) -> bool {
        Arc::ptr_eq(&self.schema, &other.schema) || *self.schema == *other.schema
    }

    pub fn dim(&self) -> usize {
        self.schema.feature_dim()
    }

    /// Number of rows `k`.
    pub fn len(&self) -> usize {
        self.data.len() / self.dim()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let d = self.dim();
        &self.data[i * d..(i + 1) * d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.dim())
    }

    pub fn is_weighted(&self) -> bool {
        self.weights.is_some()
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    /// Mass of row `i` (`1/k` when unweighted).
    pub fn weight(&self, i: usize) -> f64 {
        match &self.weights {
            Some(w) => w[i],
            None => 1.0 / self.len() as f64,
        }
    }

    /// Rows at `indices` (repeats allowed) with uniform weights.
    pub fn select(&self, indices: &[usize]) -> Result<SampleSet> {
        if indices.is_empty() {
            return Err(MprError::EmptySampleSet);
        }
        let d = self.dim();
        let mut data = Vec::with_capacity(indices.len() * d);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Ok(SampleSet {
            schema: Arc::clone(&self.schema),
            data,
            weights: None,
            label: self.label.clone(),
        })
    }

    /// Distinct rows with their total mass, sorted by row pattern.
    ///
    /// Unweighted sets use `count / k`, so identical sets produce bit-identical
    /// masses.
    pub fn pattern_masses(&self) -> Vec<(Vec<f64>, f64)> {
        let mut rows: Vec<(usize, &[f64])> = self.rows().enumerate().collect();
        rows.sort_by(|a, b| cmp_rows(a.1, b.1));
        let k = self.len() as f64;
        let mut out: Vec<(Vec<f64>, f64)> = Vec::new();
        let mut counts: Vec<usize> = Vec::new();
        for (i, row) in rows {
            let same = out.last().is_some_and(|(p, _)| p.as_slice() == row);
            if !same {
                out.push((row.to_vec(), 0.0));
                counts.push(0);
            }
            let last = out.len() - 1;
            counts[last] += 1;
            if let Some(w) = &self.weights {
                out[last].1 += w[i];
            }
        }
        if self.weights.is_none() {
            for (entry, c) in out.iter_mut().zip(counts) {
                entry.1 = c as f64 / k;
            }
        }
        out
    }

    /// Weighted mean vector.
    pub fn mean_vector(&self) -> Vec<f64> {
        let mut mean = vec![0.0; self.dim()];
        match &self.weights {
            Some(w) => {
                for (row, wi) in self.rows().zip(w) {
                    for (m, x) in mean.iter_mut().zip(row) {
                        *m += wi * x;
                    }
                }
            }
            None => {
                for row in self.rows() {
                    for (m, x) in mean.iter_mut().zip(row) {
                        *m += x;
                    }
                }
                let k = self.len() as f64;
                mean.iter_mut().for_each(|m| *m /= k);
            }
        }
        mean
    }

    /// Decode all rows back to category indices.
    pub fn cells(&self) -> Vec<Vec<usize>> {
        self.rows()
            .map(|r| {
                self.schema
                    .decode_indices(r)
                    .expect("rows are validated at construction")
            })
            .collect()
    }
}

fn cmp_rows(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal)
}

fn validate_weights(w: &[f64], k: usize) -> Result<()> {
    if w.len() != k {
        return Err(MprError::DimensionMismatch {
            expected: k,
            got: w.len(),
        });
    }
    if w.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(MprError::InvalidArgument(
            "weights must be finite and nonnegative".into(),
        ));
    }
    let sum: f64 = w.iter().sum();
    if (sum - 1.0).abs() > NORMALIZATION_TOL * (k as f64).max(1.0) {
        return Err(MprError::InvalidArgument(format!(
            "weights sum to {sum}, expected 1"
        )));
    }
    Ok(())
}

/// Parse a comma-delimited sample table.
///
/// Two layouts are accepted:
/// * categorical: header names every schema attribute (extra columns are
///   ignored), each row gives category names;
/// * encoded: header names every feature as `attribute=category`, each row
///   gives `0/1` or `-1/+1` indicators (`0` maps to `-1`).
///
/// Quoting is disabled, so a category containing a comma shows up as a
/// malformed row. Row numbers in errors count data rows from 1.
pub fn load_samples(
    schema: Arc<AttributeSchema>,
    source: &str,
    label: impl Into<String>,
) -> Result<SampleSet> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .quoting(false)
        .flexible(false)
        .from_reader(source.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| MprError::Parse(format!("sample header: {e}")))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    if header.iter().all(|h| h.is_empty()) {
        return Err(MprError::Parse("sample file has no header".into()));
    }

    let encoded = header.iter().all(|h| h.contains('='));
    let rows = if encoded {
        read_encoded(&schema, &header, &mut reader)?
    } else {
        read_categorical(&schema, &header, &mut reader)?
    };
    if rows.is_empty() {
        return Err(MprError::EmptySampleSet);
    }
    SampleSet::from_rows(schema, rows, None, label)
}

fn read_categorical(
    schema: &AttributeSchema,
    header: &[String],
    reader: &mut csv::Reader<&[u8]>,
) -> Result<Vec<Vec<f64>>> {
    let mut columns = Vec::with_capacity(schema.num_attributes());
    for attr in schema.attributes() {
        let matches: Vec<usize> = header
            .iter()
            .enumerate()
            .filter(|(_, h)| **h == attr.name)
            .map(|(i, _)| i)
            .collect();
        match matches.as_slice() {
            [i] => columns.push(*i),
            [] => {
                return Err(MprError::Parse(format!(
                    "header is missing attribute `{}`",
                    attr.name
                )))
            }
            _ => {
                return Err(MprError::Parse(format!(
                    "header repeats attribute `{}`",
                    attr.name
                )))
            }
        }
    }

    let mut rows = Vec::new();
    let mut cats = vec![0usize; schema.num_attributes()];
    for (i, rec) in reader.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| MprError::Row {
            row,
            message: format!("malformed row: {e}"),
        })?;
        for (a, &col) in columns.iter().enumerate() {
            let value = rec.get(col).unwrap_or("").trim();
            if value.is_empty() {
                return Err(MprError::Row {
                    row,
                    message: format!("missing value for `{}`", schema.attributes()[a].name),
                });
            }
            cats[a] = schema
                .category_index(a, value)
                .ok_or_else(|| MprError::Row {
                    row,
                    message: format!(
                        "unknown category `{value}` for attribute `{}`",
                        schema.attributes()[a].name
                    ),
                })?;
        }
        rows.push(schema.encode_indices(&cats)?);
    }
    Ok(rows)
}

fn read_encoded(
    schema: &AttributeSchema,
    header: &[String],
    reader: &mut csv::Reader<&[u8]>,
) -> Result<Vec<Vec<f64>>> {
    let names = schema.feature_names();
    let columns = names
        .iter()
        .map(|name| {
            header
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| MprError::Parse(format!("header is missing feature `{name}`")))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| MprError::Row {
            row,
            message: format!("malformed row: {e}"),
        })?;
        let x = columns
            .iter()
            .zip(&names)
            .map(|(&col, name)| match rec.get(col).map(str::trim) {
                Some("1") | Some("+1") => Ok(1.0),
                Some("0") | Some("-1") => Ok(-1.0),
                other => Err(MprError::Row {
                    row,
                    message: format!("feature `{name}` has value {other:?} (expected 0/1 or ±1)"),
                }),
            })
            .collect::<Result<Vec<_>>>()?;
        schema.check_encoding(&x).map_err(|e| MprError::Row {
            row,
            message: e.to_string(),
        })?;
        rows.push(x);
    }
    Ok(rows)
}

/// An exact categorical distribution over joint cells.
#[derive(Debug, Clone)]
pub struct JointDistribution {
    schema: Arc<AttributeSchema>,
    cells: Vec<(Vec<usize>, f64)>,
}

impl JointDistribution {
    /// Validate and renormalise. Probabilities must be nonnegative and sum to
    /// one within [`PROPORTION_TOL`]; repeated cells are rejected.
    pub fn new(schema: Arc<AttributeSchema>, cells: Vec<(Vec<usize>, f64)>) -> Result<Self> {
        if cells.is_empty() {
            return Err(MprError::Distribution("no cells given".into()));
        }
        let mut seen = HashMap::new();
        for (cell, p) in &cells {
            schema
                .encode_indices(cell)
                .map_err(|e| MprError::Distribution(e.to_string()))?;
            if !p.is_finite() || *p < 0.0 {
                return Err(MprError::Distribution(format!(
                    "cell `{}` has negative or non-finite probability {p}",
                    schema.joint_key(cell)
                )));
            }
            if seen.insert(cell.clone(), ()).is_some() {
                return Err(MprError::Distribution(format!(
                    "cell `{}` listed twice",
                    schema.joint_key(cell)
                )));
            }
        }
        let sum: f64 = cells.iter().map(|(_, p)| p).sum();
        if (sum - 1.0).abs() > PROPORTION_TOL {
            return Err(MprError::Distribution(format!(
                "probabilities sum to {sum}, expected 1"
            )));
        }
        let cells = cells.into_iter().map(|(c, p)| (c, p / sum)).collect();
        Ok(Self { schema, cells })
    }

    /// Uniform distribution over every joint cell.
    pub fn uniform(schema: Arc<AttributeSchema>) -> Result<Self> {
        let cells = schema.joint_cells()?;
        let p = 1.0 / cells.len() as f64;
        Self::new(schema, cells.into_iter().map(|c| (c, p)).collect())
    }

    pub fn schema(&self) -> &AttributeSchema {
        &self.schema
    }

    pub fn schema_arc(&self) -> &Arc<AttributeSchema> {
        &self.schema
    }

    pub fn cells(&self) -> &[(Vec<usize>, f64)] {
        &self.cells
    }

    pub fn probability(&self, cell: &[usize]) -> f64 {
        self.cells
            .iter()
            .find(|(c, _)| c.as_slice() == cell)
            .map_or(0.0, |(_, p)| *p)
    }

    /// Weighted sample set with one row per cell of positive mass.
    pub fn to_weighted_set(&self, label: impl Into<String>) -> SampleSet {
        let support: Vec<&(Vec<usize>, f64)> =
            self.cells.iter().filter(|(_, p)| *p > 0.0).collect();
        let total: f64 = support.iter().map(|(_, p)| p).sum();
        let cells: Vec<Vec<usize>> = support.iter().map(|(c, _)| c.clone()).collect();
        let weights: Vec<f64> = support.iter().map(|(_, p)| p / total).collect();
        SampleSet::from_cells(Arc::clone(&self.schema), &cells, Some(weights), label)
            .expect("validated distribution yields a valid weighted set")
    }

    /// Draw `m` i.i.d. records (uniform weights).
    pub fn sample<R: rand::Rng + ?Sized>(
        &self,
        m: usize,
        rng: &mut R,
        label: impl Into<String>,
    ) -> Result<SampleSet> {
        if m == 0 {
            return Err(MprError::EmptySampleSet);
        }
        let index = WeightedIndex::new(self.cells.iter().map(|(_, p)| *p))
            .map_err(|e| MprError::Distribution(e.to_string()))?;
        let draws: Vec<Vec<usize>> = (0..m)
            .map(|_| self.cells[index.sample(rng)].0.clone())
            .collect();
        SampleSet::from_cells(Arc::clone(&self.schema), &draws, None, label)
    }

    /// Serialise as `{"cat1|cat2": p, …}`.
    pub fn to_key_map(&self) -> BTreeMap<String, f64> {
        self.cells
            .iter()
            .map(|(c, p)| (self.schema.joint_key(c), *p))
            .collect()
    }
}

/// The target population: observed samples or an exact distribution.
#[derive(Debug, Clone)]
pub enum ReferenceSpec {
    Samples(SampleSet),
    Exact(JointDistribution),
}

impl ReferenceSpec {
    pub fn schema(&self) -> &AttributeSchema {
        match self {
            ReferenceSpec::Samples(s) => s.schema(),
            ReferenceSpec::Exact(d) => d.schema(),
        }
    }

    /// The reference as a sample set (weighted when exact).
    pub fn to_sample_set(&self) -> SampleSet {
        match self {
            ReferenceSpec::Samples(s) => s.clone(),
            ReferenceSpec::Exact(d) => d.to_weighted_set("reference"),
        }
    }

    /// Draw `m` records; observed references are resampled with replacement.
    pub fn draw<R: rand::Rng + ?Sized>(&self, m: usize, rng: &mut R) -> Result<SampleSet> {
        match self {
            ReferenceSpec::Exact(d) => d.sample(m, rng, "reference"),
            ReferenceSpec::Samples(s) => {
                if m == 0 {
                    return Err(MprError::EmptySampleSet);
                }
                let idx: Vec<usize> = match s.weights() {
                    Some(w) => {
                        let index = WeightedIndex::new(w.iter().copied())
                            .map_err(|e| MprError::Distribution(e.to_string()))?;
                        (0..m).map(|_| index.sample(rng)).collect()
                    }
                    None => (0..m).map(|_| rng.random_range(0..s.len())).collect(),
                };
                s.select(&idx)
            }
        }
    }
}

/// Build an exact reference from `"cat1|cat2|…" → probability` proportions.
pub fn reference_from_proportions(
    schema: Arc<AttributeSchema>,
    proportions: &BTreeMap<String, f64>,
) -> Result<ReferenceSpec> {
    Ok(ReferenceSpec::Exact(distribution_from_proportions(
        schema,
        proportions,
    )?))
}

pub fn distribution_from_proportions(
    schema: Arc<AttributeSchema>,
    proportions: &BTreeMap<String, f64>,
) -> Result<JointDistribution> {
    let cells = proportions
        .iter()
        .map(|(key, p)| Ok((schema.parse_joint_key(key)?, *p)))
        .collect::<Result<Vec<_>>>()?;
    JointDistribution::new(schema, cells)
}

/// Parse a proportions JSON object.
pub fn load_proportions(schema: Arc<AttributeSchema>, source: &str) -> Result<JointDistribution> {
    let map: BTreeMap<String, f64> = serde_json::from_str(source)?;
    distribution_from_proportions(schema, &map)
}
