use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use mpr_core::attributes::{distribution_from_proportions, load_samples, load_schema};
use mpr_core::{
    AttributeSchema, FunctionClassSpec, Indicator, JointDistribution, ReferenceSpec, SampleSet,
};
use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::error::{CliError, CliResult};
use crate::report::Inputs;

pub fn schema(inputs: &mut Inputs, path: &Path) -> CliResult<Arc<AttributeSchema>> {
    let text = inputs.read("schema", path)?;
    Ok(Arc::new(
        load_schema(&text).map_err(CliError::in_file(path))?,
    ))
}

pub fn samples(
    inputs: &mut Inputs,
    role: &str,
    schema: &Arc<AttributeSchema>,
    path: &Path,
) -> CliResult<SampleSet> {
    let text = inputs.read(role, path)?;
    load_samples(Arc::clone(schema), &text, role).map_err(CliError::in_file(path))
}

pub fn proportions(
    inputs: &mut Inputs,
    role: &str,
    schema: &Arc<AttributeSchema>,
    path: &Path,
) -> CliResult<JointDistribution> {
    let text = inputs.read(role, path)?;
    let map: BTreeMap<String, f64> = parse_json(&text, path)?;
    distribution_from_proportions(Arc::clone(schema), &map).map_err(CliError::in_file(path))
}

/// Reference from either observed samples or exact proportions.
pub fn reference(
    inputs: &mut Inputs,
    schema: &Arc<AttributeSchema>,
    samples_path: Option<&Path>,
    proportions_path: Option<&Path>,
) -> CliResult<ReferenceSpec> {
    match (samples_path, proportions_path) {
        (Some(p), None) => Ok(ReferenceSpec::Samples(samples(
            inputs,
            "reference",
            schema,
            p,
        )?)),
        (None, Some(p)) => Ok(ReferenceSpec::Exact(proportions(
            inputs,
            "reference",
            schema,
            p,
        )?)),
        _ => Err(CliError::Usage(
            "give exactly one of --reference or --proportions".into(),
        )),
    }
}

/// Deserialize JSON, naming the offending field path on failure.
pub fn parse_json<T: DeserializeOwned>(text: &str, path: &Path) -> CliResult<T> {
    let mut de = serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let field = e.path().to_string();
        let message = if field == "." {
            e.inner().to_string()
        } else {
            format!("at `{field}`: {}", e.inner())
        };
        CliError::Input {
            path: path.to_path_buf(),
            message,
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ClassKind {
    Tree,
    Linear,
    Explicit,
}

pub fn class_spec(
    inputs: &mut Inputs,
    kind: ClassKind,
    depth: Option<usize>,
    indicators: Option<&Path>,
) -> CliResult<FunctionClassSpec> {
    match kind {
        ClassKind::Tree => {
            let depth =
                depth.ok_or_else(|| CliError::Usage("--class tree needs --depth".into()))?;
            Ok(FunctionClassSpec::tree(depth))
        }
        ClassKind::Linear => Ok(FunctionClassSpec::BoundedLinear),
        ClassKind::Explicit => {
            let path = indicators
                .ok_or_else(|| CliError::Usage("--class explicit needs --indicators".into()))?;
            let text = inputs.read("indicators", path)?;
            let indicators: Vec<Indicator> = parse_json(&text, path)?;
            Ok(FunctionClassSpec::ExplicitSet { indicators })
        }
    }
}

/// A list of replicate values: a JSON array, a bootstrap report (its
/// `results.replicate_values`), or one number per line.
pub fn replicates(inputs: &mut Inputs, role: &str, path: &Path) -> CliResult<Vec<f64>> {
    let text = inputs.read(role, path)?;
    let bad = |message: String| CliError::Input {
        path: path.to_path_buf(),
        message,
    };
    let trimmed = text.trim_start();
    if trimmed.starts_with('[') || trimmed.starts_with('{') {
        let value: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?;
        let array = value
            .pointer("/results/result/replicate_values")
            .or_else(|| value.pointer("/result/replicate_values"))
            .or_else(|| value.get("replicate_values"))
            .unwrap_or(&value);
        let values: Vec<f64> = serde_json::from_value(array.clone())
            .map_err(|_| bad("expected an array of numbers or a bootstrap report".into()))?;
        return Ok(values);
    }
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.trim()
                .parse::<f64>()
                .map_err(|_| bad(format!("line {}: `{}` is not a number", i + 1, l.trim())))
        })
        .collect()
}

/// A schema given inline in a config file or as a path relative to it.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum SchemaSource {
    Path(PathBuf),
    Inline(serde_json::Value),
}

/// Joint-cell proportions given inline or as a path to a JSON file.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ProportionsSource {
    Path(PathBuf),
    Inline(BTreeMap<String, f64>),
}

/// A population given as exact proportions or as a sample file.
#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum PopulationDoc {
    Proportions(ProportionsSource),
    Samples(PathBuf),
}

pub struct ConfigDir<'a> {
    pub config: &'a Path,
}

impl ConfigDir<'_> {
    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.config.parent().unwrap_or(Path::new(".")).join(p)
        }
    }

    pub fn schema(
        &self,
        inputs: &mut Inputs,
        source: &SchemaSource,
    ) -> CliResult<Arc<AttributeSchema>> {
        match source {
            SchemaSource::Path(p) => schema(inputs, &self.resolve(p)),
            SchemaSource::Inline(v) => Ok(Arc::new(
                load_schema(&v.to_string()).map_err(CliError::in_file(self.config))?,
            )),
        }
    }

    pub fn distribution(
        &self,
        inputs: &mut Inputs,
        role: &str,
        schema: &Arc<AttributeSchema>,
        source: &ProportionsSource,
    ) -> CliResult<JointDistribution> {
        match source {
            ProportionsSource::Path(p) => proportions(inputs, role, schema, &self.resolve(p)),
            ProportionsSource::Inline(map) => {
                distribution_from_proportions(Arc::clone(schema), map)
                    .map_err(CliError::in_file(self.config))
            }
        }
    }

    pub fn population(
        &self,
        inputs: &mut Inputs,
        role: &str,
        schema: &Arc<AttributeSchema>,
        doc: &PopulationDoc,
    ) -> CliResult<Population> {
        match doc {
            PopulationDoc::Proportions(src) => Ok(Population::Exact(
                self.distribution(inputs, role, schema, src)?,
            )),
            PopulationDoc::Samples(p) => Ok(Population::Samples(samples(
                inputs,
                role,
                schema,
                &self.resolve(p),
            )?)),
        }
    }
}

pub enum Population {
    Exact(JointDistribution),
    Samples(SampleSet),
}
