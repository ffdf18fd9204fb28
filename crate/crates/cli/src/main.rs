//! `mpr`: command-line audits of multi-group proportional representation.

mod commands;
mod error;
mod inputs;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{CliError, CliResult};
use crate::inputs::ClassKind;
use crate::report::{write_file, AuditRunReport, Inputs};

/// Environment variable holding the worker thread count.
const THREADS_ENV: &str = "MPR_THREADS";

#[derive(Parser, Debug)]
#[command(
    name = "mpr",
    version,
    about = "Measure, bound and reduce multi-group representation gaps"
)]
struct Cli {
    /// Also write the JSON report to this file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct DataArgs {
    /// Attribute schema (JSON).
    #[arg(long)]
    schema: PathBuf,
    /// Generated samples (CSV).
    #[arg(long)]
    generated: PathBuf,
    /// Reference samples (CSV).
    #[arg(
        long,
        conflicts_with = "proportions",
        required_unless_present = "proportions"
    )]
    reference: Option<PathBuf>,
    /// Exact reference proportions (JSON object of joint cell → probability).
    #[arg(long)]
    proportions: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ClassArgs {
    #[arg(long, value_enum, default_value = "tree")]
    class: ClassKind,
    /// Tree depth (number of features read).
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    depth: Option<u32>,
    /// Indicator list (JSON) for `--class explicit`.
    #[arg(long)]
    indicators: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BoundKind {
    Prop1,
    Prop2,
    Bernstein,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ExperimentKind {
    Gap,
    Heatmap,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// MPR of generated samples against a reference, with its witness.
    Measure {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        class: ClassArgs,
    },
    /// Bootstrap mean, standard deviation and percentile interval of MPR.
    Bootstrap {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        class: ClassArgs,
        /// Size of each resample of the generated set.
        #[arg(long, default_value_t = 1000, conflicts_with = "full_size")]
        resamples: usize,
        /// Resample to the generated set's own size instead of `--resamples`.
        #[arg(long)]
        full_size: bool,
        /// Number of bootstrap repetitions.
        #[arg(long, default_value_t = 100)]
        reps: usize,
        /// Resample the reference as well.
        #[arg(long)]
        joint: bool,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Evaluate a generalisation or prompt-averaging bound.
    Bound(BoundArgs),
    /// t-test on bootstrap replicates.
    Test {
        /// Threshold ρ: test H₀ mean ≥ ρ against mean < ρ.
        #[arg(long, requires = "replicates", conflicts_with = "compare")]
        threshold: Option<f64>,
        #[arg(long)]
        replicates: Option<PathBuf>,
        /// Two replicate files for a two-sided Welch comparison.
        #[arg(long, num_args = 2, value_names = ["A", "B"], required_unless_present = "threshold")]
        compare: Option<Vec<PathBuf>>,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
    },
    /// Fine-tune a categorical generator towards the reference.
    Tune {
        #[arg(long)]
        config: PathBuf,
        /// Trajectory CSV output.
        #[arg(long)]
        trajectory: Option<PathBuf>,
        /// Final generator JSON output.
        #[arg(long)]
        generator: Option<PathBuf>,
        /// Overrides the seed in the config.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Sample-size experiments on synthetic or pooled populations.
    Experiment {
        #[arg(long, value_enum)]
        kind: ExperimentKind,
        #[arg(long)]
        config: PathBuf,
        /// Summary table CSV output.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Per-replicate CSV output (gap experiment only).
        #[arg(long)]
        replicates_csv: Option<PathBuf>,
        /// Overrides the seed in the config.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Aggregate per-prompt run reports.
    Report {
        /// Directory of JSON run reports.
        #[arg(long)]
        runs: PathBuf,
    },
}

#[derive(Args, Debug)]
struct BoundArgs {
    #[arg(long, value_enum)]
    which: BoundKind,
    /// Range constant B; derived from the class when omitted.
    #[arg(long)]
    range: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    rad_generated: f64,
    #[arg(long, default_value_t = 0.0)]
    rad_reference: f64,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    /// Number of prompts N.
    #[arg(long, default_value_t = 1)]
    prompts: usize,
    /// λ = sup_Q ℛ_Ĝ + ℛ_R̂; defaults to the plug-in sum when data is given.
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    #[arg(long, conflicts_with = "variance_file")]
    variance: Option<f64>,
    /// Per-prompt MPR values; their sample variance becomes σ².
    #[arg(long)]
    variance_file: Option<PathBuf>,
    /// Squared second exponent in the prompt bound.
    #[arg(long)]
    squared: bool,
    #[arg(long, requires = "generated")]
    schema: Option<PathBuf>,
    /// Generated samples for Rademacher plug-ins.
    #[arg(long, requires = "schema")]
    generated: Option<PathBuf>,
    #[arg(long, requires = "generated", conflicts_with = "proportions")]
    reference: Option<PathBuf>,
    #[arg(long, requires = "generated")]
    proportions: Option<PathBuf>,
    #[arg(long, value_enum)]
    class: Option<ClassKind>,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    depth: Option<u32>,
    #[arg(long)]
    indicators: Option<PathBuf>,
    /// Monte-Carlo sign draws per Rademacher estimate.
    #[arg(long, default_value_t = 100)]
    rad_trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// What a command hands back for the report envelope.
pub struct Outcome {
    pub seed: Option<u64>,
    pub results: serde_json::Value,
}

fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize =
        raw.trim().parse().ok().filter(|n| *n > 0).ok_or_else(|| {
            CliError::Usage(format!("{THREADS_ENV}={raw} is not a positive integer"))
        })?;
    // a pool may already exist when embedded; the first configuration wins
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global();
    Ok(())
}

fn dispatch(command: Command, inputs: &mut Inputs) -> CliResult<Outcome> {
    match command {
        Command::Measure { data, class } => commands::measure(inputs, &data, &class),
        Command::Bootstrap {
            data,
            class,
            resamples,
            full_size,
            reps,
            joint,
            alpha,
            seed,
        } => {
            let config = mpr_core::BootstrapConfig {
                resample_size: (!full_size).then_some(resamples),
                repetitions: reps,
                joint,
                alpha,
            };
            commands::bootstrap(inputs, &data, &class, config, seed)
        }
        Command::Bound(args) => commands::bound(inputs, &args),
        Command::Test {
            threshold,
            replicates,
            compare,
            alpha,
        } => commands::test(
            inputs,
            threshold,
            replicates.as_deref(),
            compare.as_deref(),
            alpha,
        ),
        Command::Tune {
            config,
            trajectory,
            generator,
            seed,
        } => commands::tune(
            inputs,
            &config,
            trajectory.as_deref(),
            generator.as_deref(),
            seed,
        ),
        Command::Experiment {
            kind,
            config,
            csv,
            replicates_csv,
            seed,
        } => match kind {
            ExperimentKind::Gap => commands::gap(
                inputs,
                &config,
                csv.as_deref(),
                replicates_csv.as_deref(),
                seed,
            ),
            ExperimentKind::Heatmap => commands::heatmap(inputs, &config, csv.as_deref(), seed),
        },
        Command::Report { runs } => commands::report(inputs, &runs),
    }
}

fn run(cli: Cli) -> CliResult<()> {
    configure_threads()?;
    let started = Instant::now();
    let command: Vec<String> = std::iter::once("mpr".to_string())
        .chain(std::env::args().skip(1))
        .collect();
    let mut inputs = Inputs::default();
    let out = cli.out.clone();
    let outcome = dispatch(cli.command, &mut inputs)?;
    let report = AuditRunReport {
        command,
        tool_version: env!("CARGO_PKG_VERSION"),
        seed: outcome.seed,
        seed_scheme: mpr_core::rng::DERIVATION_SCHEME,
        schema_digest: inputs.schema_digest,
        input_digests: inputs.digests,
        results: outcome.results,
        wall_clock_ms: started.elapsed().as_millis(),
    };
    let text = serde_json::to_string_pretty(&report).expect("report serialises");
    println!("{text}");
    if let Some(path) = out {
        write_file(&path, &format!("{text}\n"))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
