use crate::attributes::{ReferenceSpec, SampleSet};
use crate::error::{MprError, Result};

use super::buffers::{FunctionBuffer, SampleBuffer};
use super::generator::{softmax, GeneratorModel};

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn tv(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

fn check_functions(functions: &FunctionBuffer) -> Result<()> {
    if functions.is_empty() {
        return Err(MprError::InvalidArgument("function buffer is empty".into()));
    }
    Ok(())
}

/// `E_R[c]` for every buffered witness, in buffer order.
pub fn reference_means(functions: &FunctionBuffer, reference: &ReferenceSpec) -> Vec<f64> {
    let set: SampleSet = reference.to_sample_set();
    functions
        .entries()
        .map(|e| {
            set.rows()
                .enumerate()
                .map(|(i, x)| set.weight(i) * e.witness.evaluate_unchecked(x))
                .sum()
        })
        .collect()
}

/// Sample form `Σ_{c∈Ĉ} |mean_{x∈P̂} c(x) − E_R[c]|`.
pub fn loss_mpr(
    samples: &SampleBuffer,
    functions: &FunctionBuffer,
    reference: &ReferenceSpec,
) -> Result<f64> {
    check_functions(functions)?;
    if samples.is_empty() {
        return Err(MprError::EmptySampleSet);
    }
    let targets = reference_means(functions, reference);
    let n = samples.len() as f64;
    Ok(functions
        .entries()
        .zip(targets)
        .map(|(e, r)| {
            let g: f64 = samples
                .rows()
                .map(|x| e.witness.evaluate_unchecked(x))
                .sum::<f64>()
                / n;
            (g - r).abs()
        })
        .sum())
}

/// `TV(softmax(θ), softmax(θ₀))`.
pub fn loss_drift(gen: &GeneratorModel) -> f64 {
    tv(&gen.probabilities(), &gen.base_probabilities())
}

/// The expectation-form objective
/// `Σ_c |Σ_i p_i c(x_i) − E_R[c]| + λ·TV(p, p₀)` with `p = softmax(θ)`, frozen
/// at one state of the function buffer.
#[derive(Debug, Clone)]
pub struct Objective {
    cell_values: Vec<Vec<f64>>,
    targets: Vec<f64>,
    base: Vec<f64>,
    lambda: f64,
}

impl Objective {
    pub fn new(
        gen: &GeneratorModel,
        functions: &FunctionBuffer,
        reference: &ReferenceSpec,
        lambda: f64,
    ) -> Result<Self> {
        check_functions(functions)?;
        if gen.schema() != reference.schema() {
            return Err(MprError::SchemaMismatch);
        }
        Ok(Self {
            cell_values: functions.entries().map(|e| e.cell_values.clone()).collect(),
            targets: reference_means(functions, reference),
            base: gen.base_probabilities(),
            lambda,
        })
    }

    /// Signed generated-minus-reference mean for every witness.
    pub fn gaps(&self, p: &[f64]) -> Vec<f64> {
        self.cell_values
            .iter()
            .zip(&self.targets)
            .map(|(c, r)| c.iter().zip(p).map(|(a, b)| a * b).sum::<f64>() - r)
            .collect()
    }

    pub fn mpr_term(&self, p: &[f64]) -> f64 {
        self.gaps(p).iter().map(|d| d.abs()).sum()
    }

    pub fn value(&self, logits: &[f64]) -> f64 {
        let p = softmax(logits);
        self.mpr_term(&p) + self.lambda * tv(&p, &self.base)
    }

    /// Gradient with respect to the logits; kinks of `|·|` contribute 0.
    pub fn gradient(&self, logits: &[f64]) -> Vec<f64> {
        self.direction(logits, 0.0)
    }

    /// Steepest-descent direction (as a gradient, so step against it) for the
    /// nonsmooth objective. Gaps within `band` of zero are held fixed: the
    /// gradient of the other terms is projected off their logit gradients.
    /// With `band = 0` this is [`Objective::gradient`].
    pub fn descent_direction(&self, logits: &[f64], band: f64) -> Vec<f64> {
        self.direction(logits, band)
    }

    fn direction(&self, logits: &[f64], band: f64) -> Vec<f64> {
        let p = softmax(logits);
        // chain rule through the softmax: ∂/∂θ_j = p_j (g_j − Σ_i p_i g_i)
        let to_logits = |dp: &[f64]| -> Vec<f64> {
            let mean: f64 = p.iter().zip(dp).map(|(a, b)| a * b).sum();
            p.iter().zip(dp).map(|(pi, gi)| pi * (gi - mean)).collect()
        };
        let mut dp: Vec<f64> = p
            .iter()
            .zip(&self.base)
            .map(|(a, b)| 0.5 * self.lambda * sign(a - b))
            .collect();
        let mut held: Vec<Vec<f64>> = Vec::new();
        for (c, gap) in self.cell_values.iter().zip(self.gaps(&p)) {
            if band > 0.0 && gap.abs() <= band {
                held.push(to_logits(c));
                continue;
            }
            let s = sign(gap);
            if s != 0.0 {
                for (d, v) in dp.iter_mut().zip(c) {
                    *d += s * v;
                }
            }
        }
        let mut grad = to_logits(&dp);
        for q in orthonormal_basis(held) {
            let dot: f64 = grad.iter().zip(&q).map(|(a, b)| a * b).sum();
            grad.iter_mut().zip(&q).for_each(|(g, b)| *g -= dot * b);
        }
        grad
    }
}

/// Modified Gram–Schmidt; near-dependent vectors are dropped.
fn orthonormal_basis(vectors: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for mut v in vectors {
        let scale = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        for q in &basis {
            let dot: f64 = v.iter().zip(q).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(q).for_each(|(x, b)| *x -= dot * b);
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-9 * scale.max(1e-300) && norm > 0.0 {
            v.iter_mut().for_each(|x| *x /= norm);
            basis.push(v);
        }
    }
    basis
}

/// Expectation-form objective at the generator's current logits.
pub fn objective(
    gen: &GeneratorModel,
    functions: &FunctionBuffer,
    reference: &ReferenceSpec,
    lambda: f64,
) -> Result<f64> {
    Ok(Objective::new(gen, functions, reference, lambda)?.value(gen.logits()))
}

pub fn grad_loss(
    gen: &GeneratorModel,
    functions: &FunctionBuffer,
    reference: &ReferenceSpec,
    lambda: f64,
) -> Result<Vec<f64>> {
    Ok(Objective::new(gen, functions, reference, lambda)?.gradient(gen.logits()))
}

/// Rescale `grad` to Euclidean norm at most `max_norm`.
pub fn clip_gradient(grad: &mut [f64], max_norm: f64) {
    let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
    if norm > max_norm && norm > 0.0 {
        let scale = max_norm / norm;
        grad.iter_mut().for_each(|g| *g *= scale);
    }
}
