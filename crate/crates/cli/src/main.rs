//! `exq` — command-line pipeline for skeleton exercise-quality
//! classification.
//!
//! Subcommands chain through files:
//! `generate -> preprocess -> featurize -> train`, or
//! `generate -> preprocess -> eval -> roc`, plus a one-shot `reproduce`
//! that runs the full benchmark grid on synthetic data.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 flag validation failure.
//! All randomness flows from `--seed` (default 42); outputs are written
//! atomically (temp file + rename).

mod commands;
mod util;

use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "exq", version, about = "Exercise-quality classification toolkit")]
struct Cli {
    /// Seed for all randomness (splits, training, generation).
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,

    /// Suppress progress messages on stderr.
    #[arg(long, global = true)]
    quiet: bool,

    /// Dataset file format for --in/--out/--data paths.
    #[arg(long, global = true, value_enum, default_value_t = DataFormat::Jsonl)]
    format: DataFormat,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DataFormat {
    Jsonl,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub(crate) enum RepArg {
    #[value(name = "joint-time")]
    JointTime,
    #[value(name = "angle-time")]
    AngleTime,
    #[value(name = "joint-freq")]
    JointFreq,
    #[value(name = "angle-freq")]
    AngleFreq,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub(crate) enum ModelArg {
    Svm,
    Svdd,
    Adaboost,
    Dtw,
    Nn,
    Mnn,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a labeled synthetic dataset for one exercise.
    Generate {
        /// Exercise name (e.g. blast-off).
        #[arg(long, default_value = "blast-off")]
        exercise: String,
        /// Number of subjects.
        #[arg(long, default_value_t = 5)]
        subjects: usize,
        /// Comma-separated positive counts per subject.
        #[arg(long, default_value = "11,13,10,14,15")]
        pos: String,
        /// Comma-separated negative counts per subject.
        #[arg(long, default_value = "10,13,10,14,15")]
        neg: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Resample, height-scale, and hip-center a raw dataset.
    Preprocess {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 160)]
        frames: usize,
        #[arg(long, default_value_t = 1.0)]
        scale_lo: f64,
        #[arg(long, default_value_t = 3.0)]
        scale_hi: f64,
        /// Scale each axis independently instead of one uniform factor.
        #[arg(long)]
        per_axis_scaling: bool,
    },
    /// Extract one feature representation to CSV (subject_id, label, v0..).
    Featurize {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum)]
        rep: RepArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a single model on a feature CSV and write it as JSON.
    Train {
        #[arg(long)]
        features: PathBuf,
        #[arg(long, value_enum)]
        model: ModelArg,
        /// Representation the features were extracted with.
        #[arg(long, value_enum)]
        rep: RepArg,
        /// Frame count the features were extracted at.
        #[arg(long, default_value_t = 160)]
        frames: usize,
        /// Boosting rounds (adaboost).
        #[arg(long, default_value_t = 300)]
        rounds: usize,
        /// Regularization strength (svm).
        #[arg(long, default_value_t = 2e-3)]
        lambda: f64,
        /// Training epochs (svm, nn, mnn).
        #[arg(long)]
        epochs: Option<usize>,
        /// Rejection fraction (svdd).
        #[arg(long, default_value_t = 0.1)]
        nu: f64,
        /// Learning rate (nn, mnn).
        #[arg(long, default_value_t = 0.3)]
        lr: f64,
        /// Mini-batch size (nn, mnn).
        #[arg(long, default_value_t = 20)]
        batch: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run an evaluation protocol and write a JSON report.
    Eval {
        /// Preprocessed dataset path.
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_enum)]
        rep: RepArg,
        #[arg(long, value_enum)]
        model: ModelArg,
        /// "holdout:1,2,3/4,5" or "random:80".
        #[arg(long)]
        protocol: String,
        #[arg(long, default_value_t = 1)]
        runs: usize,
        #[arg(long)]
        out: PathBuf,
        /// Also write the median-run ROC curve as CSV.
        #[arg(long)]
        roc: Option<PathBuf>,
        #[arg(long, default_value_t = 300)]
        rounds: usize,
        #[arg(long, default_value_t = 2e-3)]
        lambda: f64,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long, default_value_t = 0.1)]
        nu: f64,
        #[arg(long, default_value_t = 0.3)]
        lr: f64,
        #[arg(long, default_value_t = 20)]
        batch: usize,
    },
    /// Compute a ROC curve from an eval report.
    Roc {
        #[arg(long)]
        report: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the full benchmark grid on synthetic data.
    Reproduce {
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let ctx = commands::Ctx {
        seed: cli.seed,
        quiet: cli.quiet,
        jsonl: cli.format == DataFormat::Jsonl,
    };
    let result = match cli.command {
        Command::Generate {
            exercise,
            subjects,
            pos,
            neg,
            out,
        } => commands::generate(&ctx, &exercise, subjects, &pos, &neg, &out),
        Command::Preprocess {
            input,
            out,
            frames,
            scale_lo,
            scale_hi,
            per_axis_scaling,
        } => commands::preprocess(&ctx, &input, &out, frames, scale_lo, scale_hi, per_axis_scaling),
        Command::Featurize { input, rep, out } => {
            commands::featurize(&ctx, &input, rep.into(), &out)
        }
        Command::Train {
            features,
            model,
            rep,
            frames,
            rounds,
            lambda,
            epochs,
            nu,
            lr,
            batch,
            out,
        } => commands::train(
            &ctx,
            &features,
            commands::trainer_spec(model, rounds, lambda, epochs, nu, lr, batch),
            rep.into(),
            frames,
            &out,
        ),
        Command::Eval {
            data,
            rep,
            model,
            protocol,
            runs,
            out,
            roc,
            rounds,
            lambda,
            epochs,
            nu,
            lr,
            batch,
        } => commands::eval(
            &ctx,
            &data,
            rep.into(),
            commands::trainer_spec(model, rounds, lambda, epochs, nu, lr, batch),
            &protocol,
            runs,
            &out,
            roc.as_deref(),
        ),
        Command::Roc { report, out } => commands::roc(&ctx, &report, &out),
        Command::Reproduce { out } => commands::reproduce(&ctx, &out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(commands::CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(commands::CliError::Runtime(err)) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

impl From<RepArg> for exq_core::features::RepKind {
    fn from(r: RepArg) -> Self {
        use exq_core::features::RepKind::*;
        match r {
            RepArg::JointTime => JointTime,
            RepArg::AngleTime => AngleTime,
            RepArg::JointFreq => JointFreq,
            RepArg::AngleFreq => AngleFreq,
        }
    }
}
