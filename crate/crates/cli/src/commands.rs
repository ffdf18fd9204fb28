use std::path::Path;
use std::sync::Arc;

use mpr_core::attributes::ReferenceSpec;
use mpr_core::optimizer::{finetune, GeneratorModel, TuneConfig, TuneParams};
use mpr_core::rng::{derive_seed, stream};
use mpr_core::stats::{
    bernstein_bound, bootstrap_mpr, empirical_rademacher, empirical_variance_across_prompts,
    gap_bound_prop1, gap_experiment, model_compare_test, prompt_bound_prop2, std_heatmap,
    threshold_test, BootstrapConfig, BoundInputs, GapConfig, HeatmapConfig, PopulationSource,
};
use mpr_core::{mpr, range_constant, FunctionClassSpec};
use serde::Deserialize;
use serde_json::json;

use crate::error::{CliError, CliResult};
use crate::inputs::{self, ConfigDir, Population, PopulationDoc, ProportionsSource, SchemaSource};
use crate::report::{write_file, Inputs};
use crate::{BoundArgs, BoundKind, ClassArgs, DataArgs, Outcome};

fn class_spec(inputs: &mut Inputs, class: &ClassArgs) -> CliResult<FunctionClassSpec> {
    inputs::class_spec(
        inputs,
        class.class,
        class.depth.map(|d| d as usize),
        class.indicators.as_deref(),
    )
}

fn load_data(
    inputs: &mut Inputs,
    data: &DataArgs,
) -> CliResult<(
    Arc<mpr_core::AttributeSchema>,
    mpr_core::SampleSet,
    ReferenceSpec,
)> {
    let schema = inputs::schema(inputs, &data.schema)?;
    let generated = inputs::samples(inputs, "generated", &schema, &data.generated)?;
    let reference = inputs::reference(
        inputs,
        &schema,
        data.reference.as_deref(),
        data.proportions.as_deref(),
    )?;
    Ok((schema, generated, reference))
}

pub fn measure(inputs: &mut Inputs, data: &DataArgs, class: &ClassArgs) -> CliResult<Outcome> {
    let (schema, g, reference) = load_data(inputs, data)?;
    let spec = class_spec(inputs, class)?;
    spec.validate(&schema)?;
    let estimate = mpr(&g, &reference.to_sample_set(), &spec)?;
    Ok(Outcome {
        seed: None,
        results: estimate.to_json(&schema),
    })
}

pub fn bootstrap(
    inputs: &mut Inputs,
    data: &DataArgs,
    class: &ClassArgs,
    config: BootstrapConfig,
    seed: u64,
) -> CliResult<Outcome> {
    config.validate()?;
    let (schema, g, reference) = load_data(inputs, data)?;
    let spec = class_spec(inputs, class)?;
    spec.validate(&schema)?;
    let result = bootstrap_mpr(&g, &reference.to_sample_set(), &spec, &config, seed)?;
    Ok(Outcome {
        seed: Some(seed),
        results: json!({
            "class": spec,
            "config": config,
            "result": result,
        }),
    })
}

pub fn bound(inputs: &mut Inputs, args: &BoundArgs) -> CliResult<Outcome> {
    let mut b = BoundInputs {
        range: 2.0,
        rad_generated: args.rad_generated,
        rad_reference: args.rad_reference,
        delta: args.delta,
        prompts: args.prompts,
        epsilon: args.epsilon,
        ..Default::default()
    };
    let mut plug_in = None;
    let spec = match args.class {
        Some(kind) => Some(inputs::class_spec(
            inputs,
            kind,
            args.depth.map(|d| d as usize),
            args.indicators.as_deref(),
        )?),
        None => None,
    };

    if let (Some(schema_path), Some(generated)) = (&args.schema, &args.generated) {
        let spec = spec
            .clone()
            .ok_or_else(|| CliError::Usage("Rademacher plug-ins need --class".into()))?;
        let schema = inputs::schema(inputs, schema_path)?;
        spec.validate(&schema)?;
        b.range = range_constant(&spec, &schema).0;
        let g = inputs::samples(inputs, "generated", &schema, generated)?;
        let rad_g = empirical_rademacher(
            &spec,
            &g,
            args.rad_trials,
            derive_seed(args.seed, stream::DRAW_GENERATED, 0),
        )?;
        b.rad_generated = rad_g.value;
        b.k = g.len();
        let mut rad_r = None;
        match (&args.reference, &args.proportions) {
            (Some(path), _) => {
                let r = inputs::samples(inputs, "reference", &schema, path)?;
                let est = empirical_rademacher(
                    &spec,
                    &r,
                    args.rad_trials,
                    derive_seed(args.seed, stream::DRAW_REFERENCE, 0),
                )?;
                b.rad_reference = est.value;
                b.m = r.len();
                rad_r = Some(est);
            }
            (None, Some(path)) => {
                // exact reference: no sampling error on that side
                inputs::proportions(inputs, "reference", &schema, path)?;
                b.m = args
                    .m
                    .ok_or_else(|| CliError::Usage("--proportions needs --m".into()))?;
            }
            (None, None) => {
                b.m = args.m.ok_or_else(|| {
                    CliError::Usage("give --reference, --proportions or --m".into())
                })?;
            }
        }
        plug_in = Some(json!({ "generated": rad_g, "reference": rad_r }));
    } else {
        if let Some(spec) = &spec {
            if !matches!(spec, FunctionClassSpec::BoundedLinear) {
                b.range = match spec {
                    FunctionClassSpec::DecisionTree { .. } => 2.0,
                    FunctionClassSpec::ExplicitSet { indicators } => indicators
                        .iter()
                        .map(|i| (i.outputs[1] - i.outputs[0]).abs())
                        .fold(0.0, f64::max),
                    FunctionClassSpec::BoundedLinear => unreachable!(),
                };
            } else if args.range.is_none() {
                return Err(CliError::Usage(
                    "the linear range depends on the schema: give --range or --schema".into(),
                ));
            }
        }
        b.k = args
            .k
            .ok_or_else(|| CliError::Usage("--k is required without --generated".into()))?;
        b.m = args
            .m
            .ok_or_else(|| CliError::Usage("--m is required without --generated".into()))?;
    }
    if let Some(range) = args.range {
        b.range = range;
    }
    b.lambda_sup = args.lambda.unwrap_or(if plug_in.is_some() {
        b.rad_generated + b.rad_reference
    } else {
        0.0
    });

    let mut variance_estimate = None;
    if let Some(path) = &args.variance_file {
        let values = inputs::replicates(inputs, "variance", path)?;
        let v = empirical_variance_across_prompts(&values).map_err(CliError::in_file(path))?;
        variance_estimate = Some(v);
        b.variance = v;
    } else if let Some(v) = args.variance {
        b.variance = v;
    }

    let (name, value) = match args.which {
        BoundKind::Prop1 => {
            let value = gap_bound_prop1(&b)?;
            (
                "prop1",
                json!({ "value": value, "vacuous": value >= b.range }),
            )
        }
        BoundKind::Prop2 => (
            "prop2",
            serde_json::to_value(prompt_bound_prop2(&b, args.squared)?).expect("serialisable"),
        ),
        BoundKind::Bernstein => (
            "bernstein",
            serde_json::to_value(bernstein_bound(&b)?).expect("serialisable"),
        ),
    };
    Ok(Outcome {
        seed: plug_in.is_some().then_some(args.seed),
        results: json!({
            "which": name,
            "squared_variant": args.squared,
            "inputs": b,
            "bound": value,
            "rademacher": plug_in,
            "variance_estimate": variance_estimate,
        }),
    })
}

pub fn test(
    inputs: &mut Inputs,
    threshold: Option<f64>,
    replicates: Option<&Path>,
    compare: Option<&[std::path::PathBuf]>,
    alpha: f64,
) -> CliResult<Outcome> {
    let result = match (threshold, replicates, compare) {
        (Some(rho), Some(path), None) => {
            let values = inputs::replicates(inputs, "replicates", path)?;
            threshold_test(&values, rho, alpha)?
        }
        (None, _, Some([a, b])) => {
            let xa = inputs::replicates(inputs, "compare_a", a)?;
            let xb = inputs::replicates(inputs, "compare_b", b)?;
            model_compare_test(&xa, &xb, alpha)?
        }
        _ => {
            return Err(CliError::Usage(
                "give --threshold with --replicates, or --compare A B".into(),
            ))
        }
    };
    Ok(Outcome {
        seed: None,
        results: serde_json::to_value(result).expect("serialisable"),
    })
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TuneDoc {
    schema: SchemaSource,
    /// Initial generator proportions; uniform when absent.
    #[serde(default)]
    generator: Option<ProportionsSource>,
    reference: PopulationDoc,
    #[serde(default)]
    params: TuneParams,
}

pub fn tune(
    inputs: &mut Inputs,
    config: &Path,
    trajectory: Option<&Path>,
    generator_out: Option<&Path>,
    seed: Option<u64>,
) -> CliResult<Outcome> {
    let text = inputs.read("config", config)?;
    let doc: TuneDoc = inputs::parse_json(&text, config)?;
    let dir = ConfigDir { config };
    let schema = dir.schema(inputs, &doc.schema)?;
    let generator = match &doc.generator {
        Some(src) => GeneratorModel::from_distribution(&dir.distribution(
            inputs,
            "generator",
            &schema,
            src,
        )?)?,
        None => GeneratorModel::uniform(Arc::clone(&schema))?,
    };
    let reference = match dir.population(inputs, "reference", &schema, &doc.reference)? {
        Population::Exact(d) => ReferenceSpec::Exact(d),
        Population::Samples(s) => ReferenceSpec::Samples(s),
    };
    let mut params = doc.params;
    if let Some(seed) = seed {
        params.seed = seed;
    }
    params.validate().map_err(CliError::in_file(config))?;
    let initial = generator.to_json();
    let run = finetune(
        generator,
        &TuneConfig {
            params: params.clone(),
            reference,
        },
    )?;
    if let Some(path) = trajectory {
        write_file(path, &run.to_csv())?;
    }
    let final_generator = run.generator.to_json();
    if let Some(path) = generator_out {
        write_file(
            path,
            &format!(
                "{}\n",
                serde_json::to_string_pretty(&final_generator).expect("serialisable")
            ),
        )?;
    }
    Ok(Outcome {
        seed: Some(params.seed),
        results: json!({
            "params": params,
            "initial_generator": initial,
            "final": run.final_record(),
            "records": run.records,
            "generator": final_generator,
        }),
    })
}

#[derive(Debug, Deserialize)]
struct GapDoc {
    schema: SchemaSource,
    generated: ProportionsSource,
    reference: ProportionsSource,
    #[serde(flatten)]
    config: GapConfig,
}

pub fn gap(
    inputs: &mut Inputs,
    config: &Path,
    csv: Option<&Path>,
    replicates_csv: Option<&Path>,
    seed: Option<u64>,
) -> CliResult<Outcome> {
    let text = inputs.read("config", config)?;
    let doc: GapDoc = inputs::parse_json(&text, config)?;
    let dir = ConfigDir { config };
    let schema = dir.schema(inputs, &doc.schema)?;
    let p = dir.distribution(inputs, "generated", &schema, &doc.generated)?;
    let r = dir.distribution(inputs, "reference", &schema, &doc.reference)?;
    let mut cfg = doc.config;
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    let table = gap_experiment(&p, &r, &cfg)?;
    if let Some(path) = csv {
        write_file(path, &table.summary_csv())?;
    }
    if let Some(path) = replicates_csv {
        write_file(path, &table.replicates_csv())?;
    }
    Ok(Outcome {
        seed: Some(cfg.seed),
        results: json!({
            "kind": "gap",
            "reps": cfg.reps,
            "sample_sizes": cfg.sample_sizes,
            "reference_size": cfg.reference_size,
            "rows": table.rows,
        }),
    })
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct HeatmapDoc {
    schema: SchemaSource,
    generated: PopulationDoc,
    reference: PopulationDoc,
    class: FunctionClassSpec,
    k_list: Vec<usize>,
    m_list: Vec<usize>,
    #[serde(default)]
    bootstrap: BootstrapConfig,
    #[serde(default)]
    seed: u64,
}

fn source(p: Population) -> PopulationSource {
    match p {
        Population::Exact(d) => PopulationSource::Exact(d),
        Population::Samples(s) => PopulationSource::Pool(s),
    }
}

pub fn heatmap(
    inputs: &mut Inputs,
    config: &Path,
    csv: Option<&Path>,
    seed: Option<u64>,
) -> CliResult<Outcome> {
    let text = inputs.read("config", config)?;
    let doc: HeatmapDoc = inputs::parse_json(&text, config)?;
    let dir = ConfigDir { config };
    let schema = dir.schema(inputs, &doc.schema)?;
    let g = source(dir.population(inputs, "generated", &schema, &doc.generated)?);
    let r = source(dir.population(inputs, "reference", &schema, &doc.reference)?);
    let cfg = HeatmapConfig {
        k_list: doc.k_list,
        m_list: doc.m_list,
        bootstrap: doc.bootstrap,
        seed: seed.unwrap_or(doc.seed),
    };
    doc.class.validate(&schema)?;
    let table = std_heatmap(&g, &r, &doc.class, &cfg)?;
    if let Some(path) = csv {
        write_file(path, &table.to_csv())?;
    }
    Ok(Outcome {
        seed: Some(cfg.seed),
        results: json!({
            "kind": "heatmap",
            "class": doc.class,
            "bootstrap": cfg.bootstrap,
            "cells": table.cells,
        }),
    })
}

/// The MPR value recorded in a run report of any command.
fn run_value(report: &serde_json::Value) -> Option<f64> {
    [
        "/results/value",
        "/results/result/point_estimate",
        "/results/final/mpr",
    ]
    .iter()
    .find_map(|p| report.pointer(p).and_then(serde_json::Value::as_f64))
}

pub fn report(inputs: &mut Inputs, runs: &Path) -> CliResult<Outcome> {
    let entries = std::fs::read_dir(runs).map_err(|source| CliError::Read {
        path: runs.to_path_buf(),
        source,
    })?;
    let mut files: Vec<std::path::PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(CliError::Usage(format!(
            "no run reports (*.json) in {}",
            runs.display()
        )));
    }
    let mut rows = Vec::with_capacity(files.len());
    let mut values = Vec::with_capacity(files.len());
    for path in &files {
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let text = inputs.read(&format!("run:{name}"), path)?;
        let doc: serde_json::Value = serde_json::from_str(&text).map_err(|e| CliError::Input {
            path: path.clone(),
            message: e.to_string(),
        })?;
        let value = run_value(&doc).ok_or_else(|| CliError::Input {
            path: path.clone(),
            message: "no MPR value in report".into(),
        })?;
        rows.push(json!({ "run": name, "mpr": value }));
        values.push(value);
    }
    let mean = mpr_core::stats::mean(&values);
    let variance = (values.len() > 1).then(|| mpr_core::stats::sample_variance(&values));
    Ok(Outcome {
        seed: None,
        results: json!({
            "aggregation": "mean of per-prompt MPR",
            "runs": rows,
            "count": values.len(),
            "mean": mean,
            "variance": variance,
        }),
    })
}
