//! Buffered fine-tuning of a categorical generator towards a reference.
//!
//! The generator is a softmax distribution over joint attribute cells. Each
//! iteration draws a batch, pushes it into a FIFO sample buffer, computes the
//! MPR witness of the buffer against the reference, pushes that witness into a
//! FIFO function buffer and takes a clipped gradient step on
//! `Σ_{c∈Ĉ} |E_θ[c] − E_R[c]| + λ·TV(θ, θ₀)`.

mod buffers;
mod finetune;
mod generator;
mod loss;

pub use buffers::{FunctionBuffer, FunctionEntry, SampleBuffer};
pub use finetune::{
    evaluate_checkpoint, finetune, TrajectoryRecord, TuneConfig, TuneParams, TuneTrajectory,
};
pub use generator::{sample_batch, softmax, GeneratorModel};
pub use loss::{
    clip_gradient, grad_loss, loss_drift, loss_mpr, objective, reference_means, Objective,
};
