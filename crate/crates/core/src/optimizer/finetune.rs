use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::attributes::{ReferenceSpec, SampleSet};
use crate::error::{MprError, Result};
use crate::function_classes::FunctionClassSpec;
use crate::mpr::{mpr, MprEstimate};
use crate::rng::{derive_seed, stream};

use super::buffers::{FunctionBuffer, SampleBuffer};
use super::generator::{sample_batch, GeneratorModel};
use super::loss::{clip_gradient, loss_drift, loss_mpr, Objective};

/// Halvings of the step size tried before an iteration gives up on moving.
const MAX_HALVINGS: usize = 20;

/// Hyperparameters of a tuning run (the serialisable part of [`TuneConfig`]).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TuneParams {
    pub iterations: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub reg_lambda: f64,
    /// Capacity of the sample buffer `P̂`.
    pub sample_buffer: usize,
    /// Capacity of the function buffer `Ĉ`.
    pub function_buffer: usize,
    pub grad_clip_norm: f64,
    pub eval_every: usize,
    pub eval_samples: usize,
    pub seed: u64,
    /// Skip witnesses already present in the function buffer.
    pub dedupe: bool,
    /// Gaps with `|E_θ[c] − E_R[c]|` at most this are treated as sitting on
    /// their kink: the step keeps them fixed to first order instead of
    /// crossing them. `0` gives the plain clipped gradient step.
    pub kink_band: f64,
    pub spec: FunctionClassSpec,
}

impl Default for TuneParams {
    fn default() -> Self {
        Self {
            iterations: 2000,
            batch_size: 8,
            learning_rate: 0.05,
            reg_lambda: 0.5,
            sample_buffer: 32,
            function_buffer: 32,
            grad_clip_norm: 1.0,
            eval_every: 100,
            eval_samples: 10_000,
            seed: 0,
            dedupe: false,
            kink_band: 1e-2,
            spec: FunctionClassSpec::tree(1),
        }
    }
}

impl TuneParams {
    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("iterations", self.iterations),
            ("batch_size", self.batch_size),
            ("sample_buffer", self.sample_buffer),
            ("function_buffer", self.function_buffer),
            ("eval_every", self.eval_every),
            ("eval_samples", self.eval_samples),
        ];
        for (name, v) in counts {
            if v == 0 {
                return Err(MprError::InvalidArgument(format!(
                    "{name} must be positive"
                )));
            }
        }
        if self.eval_every > self.iterations {
            return Err(MprError::InvalidArgument(format!(
                "eval_every {} exceeds iterations {}",
                self.eval_every, self.iterations
            )));
        }
        let reals = [
            ("learning_rate", self.learning_rate),
            ("grad_clip_norm", self.grad_clip_norm),
        ];
        for (name, v) in reals {
            if !(v > 0.0 && v.is_finite()) {
                return Err(MprError::InvalidArgument(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if !(self.kink_band >= 0.0 && self.kink_band.is_finite()) {
            return Err(MprError::InvalidArgument(format!(
                "kink_band must be nonnegative, got {}",
                self.kink_band
            )));
        }
        if !(self.reg_lambda >= 0.0 && self.reg_lambda.is_finite()) {
            return Err(MprError::InvalidArgument(format!(
                "reg_lambda must be nonnegative, got {}",
                self.reg_lambda
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct TuneConfig {
    pub params: TuneParams,
    pub reference: ReferenceSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryRecord {
    /// Iterations completed at this evaluation.
    pub iteration: usize,
    /// Fresh-sample MPR of the generator against the reference.
    pub mpr: f64,
    pub loss_mpr: f64,
    pub loss_drift: f64,
    /// Expectation-form objective before and after this iteration's step,
    /// both with the function buffer of this iteration.
    pub objective_before: f64,
    pub objective: f64,
    pub witness: serde_json::Value,
}

#[derive(Debug, Clone)]
pub struct TuneTrajectory {
    pub records: Vec<TrajectoryRecord>,
    pub generator: GeneratorModel,
}

impl TuneTrajectory {
    pub fn final_record(&self) -> &TrajectoryRecord {
        self.records.last().expect("a run evaluates at least once")
    }

    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("iteration,mpr,loss_mpr,loss_drift,objective_before,objective\n");
        for r in &self.records {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r.iteration, r.mpr, r.loss_mpr, r.loss_drift, r.objective_before, r.objective
            );
        }
        out
    }
}

/// MPR of `n_samples` fresh draws from the generator against the reference
/// (exact reference means when the reference is a distribution).
pub fn evaluate_checkpoint(
    gen: &GeneratorModel,
    reference: &ReferenceSpec,
    spec: &FunctionClassSpec,
    n_samples: usize,
    seed: u64,
) -> Result<MprEstimate> {
    let g = sample_batch(gen, n_samples, seed)?;
    mpr(&g, &reference.to_sample_set(), spec)
}

/// Run the buffered fine-tuning loop. Single-threaded: the order of buffer
/// updates is part of the result.
pub fn finetune(mut gen: GeneratorModel, config: &TuneConfig) -> Result<TuneTrajectory> {
    let p = &config.params;
    p.validate()?;
    if gen.schema() != config.reference.schema() {
        return Err(MprError::SchemaMismatch);
    }
    p.spec.validate(gen.schema())?;

    let schema = Arc::clone(gen.schema_arc());
    let reference_set = config.reference.to_sample_set();
    let mut samples = SampleBuffer::new(p.sample_buffer)?;
    let mut functions = FunctionBuffer::new(p.function_buffer, p.dedupe)?;
    let mut records = Vec::with_capacity(p.iterations.div_ceil(p.eval_every));

    for t in 0..p.iterations {
        let batch = sample_batch(
            &gen,
            p.batch_size,
            derive_seed(p.seed, stream::TUNE_BATCH, t as u64),
        )?;
        samples.extend(batch.rows().map(<[f64]>::to_vec));

        let buffered = SampleSet::from_rows(
            Arc::clone(&schema),
            samples.rows().map(<[f64]>::to_vec).collect(),
            None,
            "buffer",
        )?;
        let estimate = mpr(&buffered, &reference_set, &p.spec)?;
        let key = estimate.witness.describe(&schema).to_string();
        functions.push(estimate.witness, key, gen.encodings());

        let objective = Objective::new(&gen, &functions, &config.reference, p.reg_lambda)?;
        let theta = gen.logits().to_vec();
        let current = objective.value(&theta);
        let mut grad = objective.descent_direction(&theta, p.kink_band);
        clip_gradient(&mut grad, p.grad_clip_norm);

        let mut step = p.learning_rate;
        let mut after = current;
        for _ in 0..=MAX_HALVINGS {
            let candidate: Vec<f64> = theta.iter().zip(&grad).map(|(x, g)| x - step * g).collect();
            let value = objective.value(&candidate);
            if value <= current {
                gen.set_logits(candidate)?;
                after = value;
                break;
            }
            step *= 0.5;
        }

        if (t + 1) % p.eval_every == 0 || t + 1 == p.iterations {
            let eval = evaluate_checkpoint(
                &gen,
                &config.reference,
                &p.spec,
                p.eval_samples,
                derive_seed(p.seed, stream::TUNE_EVAL, t as u64),
            )?;
            records.push(TrajectoryRecord {
                iteration: t + 1,
                mpr: eval.value,
                loss_mpr: loss_mpr(&samples, &functions, &config.reference)?,
                loss_drift: loss_drift(&gen),
                objective_before: current,
                objective: after,
                witness: eval.witness.describe(&schema),
            });
        }
    }
    Ok(TuneTrajectory {
        records,
        generator: gen,
    })
}
