//! Subcommand implementations.

use crate::util::{atomic_write, read_features_csv, write_features_csv};
use crate::ModelArg;
use anyhow::{anyhow, Context, Result};
use exq_core::eval::{
    roc_curve, run_protocol, train_model, EvalData, EvalReport, NnTrainerSpec, Protocol,
    ProtocolResult, RocCurve, TrainerSpec,
};
use exq_core::features::{featurize_dataset, RepKind, Representation};
use exq_core::preprocess::{preprocess_dataset, PreprocessConfig, PreprocessError};
use exq_core::skeleton::{load_dataset, write_dataset, Dataset, FileFormat};
use exq_core::syndata::{builtin_template, generate_dataset, GenError, SubjectCounts};
use rayon::prelude::*;
use std::collections::BTreeSet;
use std::path::Path;

pub enum CliError {
    /// Bad flags or flag combinations; exit 2.
    Usage(String),
    /// Everything else; exit 1.
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Runtime(e)
    }
}

pub struct Ctx {
    pub seed: u64,
    pub quiet: bool,
    pub jsonl: bool,
}

impl Ctx {
    fn format(&self) -> FileFormat {
        if self.jsonl {
            FileFormat::Jsonl
        } else {
            FileFormat::Csv
        }
    }

    fn log(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("{}", msg.as_ref());
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn stage<E: Into<anyhow::Error>>(name: &str) -> impl Fn(E) -> anyhow::Error + '_ {
    move |e| e.into().context(format!("[{name}]"))
}

fn load_stage(ctx: &Ctx, path: &Path, name: &str) -> Result<Dataset, CliError> {
    Ok(load_dataset(path, ctx.format()).map_err(stage(name))?)
}

fn dataset_bytes(ds: &Dataset, format: FileFormat) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_dataset(ds, &mut buf, format)?;
    Ok(buf)
}

fn parse_counts(text: &str, what: &str) -> Result<Vec<usize>, CliError> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| usage(format!("bad {what} count {t:?}")))
        })
        .collect()
}

pub fn generate(
    ctx: &Ctx,
    exercise: &str,
    subjects: usize,
    pos: &str,
    neg: &str,
    out: &Path,
) -> Result<(), CliError> {
    let template = builtin_template(exercise).map_err(|e| match e {
        GenError::UnknownExercise(_) => usage(e.to_string()),
        other => CliError::Runtime(anyhow!(other).context("[generate]")),
    })?;
    let pos = parse_counts(pos, "positive")?;
    let neg = parse_counts(neg, "negative")?;
    if pos.len() != subjects || neg.len() != subjects {
        return Err(usage(format!(
            "--pos and --neg must list {subjects} counts (got {} and {})",
            pos.len(),
            neg.len()
        )));
    }
    let counts: Vec<SubjectCounts> = pos
        .iter()
        .zip(&neg)
        .map(|(&positives, &negatives)| SubjectCounts {
            positives,
            negatives,
        })
        .collect();
    let ds = generate_dataset(&template, &counts, ctx.seed).map_err(stage("generate"))?;
    let bytes = dataset_bytes(&ds, ctx.format()).map_err(stage("generate"))?;
    atomic_write(out, &bytes)?;
    ctx.log(format!(
        "generated {} samples for {} -> {}",
        ds.len(),
        template.exercise,
        out.display()
    ));
    Ok(())
}

pub fn preprocess(
    ctx: &Ctx,
    input: &Path,
    out: &Path,
    frames: usize,
    scale_lo: f64,
    scale_hi: f64,
    per_axis: bool,
) -> Result<(), CliError> {
    let cfg = PreprocessConfig {
        target_frames: frames,
        scale_lo,
        scale_hi,
        per_axis,
    };
    if let Err(e @ PreprocessError::BadConfig(_)) = cfg.validate() {
        return Err(usage(e.to_string()));
    }
    let ds = load_stage(ctx, input, "preprocess")?;
    let prep = preprocess_dataset(&ds, &cfg).map_err(stage("preprocess"))?;
    let bytes = dataset_bytes(&prep, ctx.format()).map_err(stage("preprocess"))?;
    atomic_write(out, &bytes)?;
    ctx.log(format!(
        "preprocessed {} samples to {} frames -> {}",
        prep.len(),
        frames,
        out.display()
    ));
    Ok(())
}

pub fn featurize(ctx: &Ctx, input: &Path, rep: RepKind, out: &Path) -> Result<(), CliError> {
    let ds = load_stage(ctx, input, "featurize")?;
    let set = featurize_dataset(&ds, rep).map_err(stage("featurize"))?;
    let bytes = write_features_csv(&set.subjects, &set.labels, &set.vectors);
    atomic_write(out, &bytes)?;
    ctx.log(format!(
        "extracted {} x {} {} features -> {}",
        set.len(),
        set.dim(),
        rep,
        out.display()
    ));
    Ok(())
}

pub fn trainer_spec(
    model: ModelArg,
    rounds: usize,
    lambda: f64,
    epochs: Option<usize>,
    nu: f64,
    lr: f64,
    batch: usize,
) -> TrainerSpec {
    match model {
        ModelArg::Svm => TrainerSpec::Svm {
            lambda,
            epochs: epochs.unwrap_or(200),
        },
        ModelArg::Svdd => TrainerSpec::Svdd { nu },
        ModelArg::Adaboost => TrainerSpec::AdaBoost { rounds },
        ModelArg::Dtw => TrainerSpec::Dtw,
        ModelArg::Nn => TrainerSpec::Nn(NnTrainerSpec {
            hidden_sizes: vec![500],
            learning_rate: lr,
            epochs: epochs.unwrap_or(4),
            batch_size: batch,
        }),
        ModelArg::Mnn => TrainerSpec::Nn(NnTrainerSpec {
            hidden_sizes: vec![500, 100],
            learning_rate: lr,
            epochs: epochs.unwrap_or(4),
            batch_size: batch,
        }),
    }
}

/// Reshapes flat feature rows into an [`EvalData`], deriving per-frame
/// sequences for time-domain representations.
fn eval_data_from_rows(
    rep: Representation,
    vectors: Vec<Vec<f64>>,
    labels: Vec<exq_core::skeleton::Label>,
    subjects: Vec<u32>,
) -> EvalData {
    let sequences = if rep.kind.is_frequency() {
        None
    } else {
        let channels = rep.kind.channels();
        Some(
            vectors
                .iter()
                .map(|row| row.chunks_exact(channels).map(|c| c.to_vec()).collect())
                .collect(),
        )
    };
    EvalData {
        rep,
        vectors,
        sequences,
        labels,
        subjects,
    }
}

pub fn train(
    ctx: &Ctx,
    features: &Path,
    trainer: TrainerSpec,
    rep: RepKind,
    frames: usize,
    out: &Path,
) -> Result<(), CliError> {
    if trainer.needs_sequences() && rep.is_frequency() {
        return Err(usage(format!("dtw cannot train on the {rep} representation")));
    }
    let rows = read_features_csv(features).map_err(|e| e.context("[train]"))?;
    let representation = Representation::new(rep, frames);
    let got = rows.vectors[0].len();
    if got != representation.dim() {
        return Err(CliError::Runtime(anyhow!(
            "[train] feature dimension {got} does not match representation {rep} at {frames} \
             frames (expected {})",
            representation.dim()
        )));
    }
    let data = eval_data_from_rows(representation, rows.vectors, rows.labels, rows.subjects);
    let all: Vec<usize> = (0..data.len()).collect();
    let model = train_model(&data, &all, &trainer, ctx.seed).map_err(stage("train"))?;
    atomic_write(out, model.to_json().as_bytes())?;
    ctx.log(format!(
        "trained {} on {} samples -> {}",
        model.family_name(),
        data.len(),
        out.display()
    ));
    Ok(())
}

fn parse_protocol(text: &str) -> Result<Protocol, CliError> {
    let (kind, rest) = text
        .split_once(':')
        .ok_or_else(|| usage(format!("bad protocol {text:?}; use holdout:1,2,3/4,5 or random:80")))?;
    match kind {
        "random" => {
            let n_train: usize = rest
                .parse()
                .map_err(|_| usage(format!("bad random train size {rest:?}")))?;
            Ok(Protocol::Random { n_train })
        }
        "holdout" => {
            let (train, test) = rest
                .split_once('/')
                .ok_or_else(|| usage(format!("bad holdout spec {rest:?}; use 1,2,3/4,5")))?;
            let parse_set = |s: &str| -> Result<BTreeSet<u32>, CliError> {
                s.split(',')
                    .map(|t| {
                        t.trim()
                            .parse::<u32>()
                            .map_err(|_| usage(format!("bad subject id {t:?}")))
                    })
                    .collect()
            };
            Ok(Protocol::SubjectHoldout {
                train_subjects: parse_set(train)?,
                test_subjects: parse_set(test)?,
            })
        }
        other => Err(usage(format!("unknown protocol kind {other:?}"))),
    }
}

fn roc_csv(curve: &RocCurve) -> Vec<u8> {
    let mut out = String::from("threshold,fpr,tpr\n");
    for p in &curve.points {
        out.push_str(&format!("{},{},{}\n", p.threshold, p.fpr, p.tpr));
    }
    out.into_bytes()
}

#[allow(clippy::too_many_arguments)]
pub fn eval(
    ctx: &Ctx,
    data_path: &Path,
    rep: RepKind,
    trainer: TrainerSpec,
    protocol_text: &str,
    runs: usize,
    out: &Path,
    roc_out: Option<&Path>,
) -> Result<(), CliError> {
    let protocol = parse_protocol(protocol_text)?;
    if matches!(protocol, Protocol::SubjectHoldout { .. }) && runs != 1 {
        return Err(usage(format!(
            "holdout is a single deterministic split; --runs must be 1, got {runs}"
        )));
    }
    if runs == 0 {
        return Err(usage("--runs must be >= 1"));
    }
    if trainer.needs_sequences() && rep.is_frequency() {
        return Err(usage(format!("dtw cannot evaluate the {rep} representation")));
    }
    let ds = load_stage(ctx, data_path, "eval")?;
    if !ds.preprocessed {
        return Err(CliError::Runtime(anyhow!(
            "[eval] dataset {} is not preprocessed; run `exq preprocess` first",
            data_path.display()
        )));
    }
    let data = EvalData::prepare(&ds, rep).map_err(stage("eval"))?;
    let result = run_protocol(&data, &trainer, &protocol, runs, ctx.seed).map_err(stage("eval"))?;
    let report = EvalReport {
        family: trainer.family_name().to_string(),
        rep: data.rep,
        protocol: protocol.describe(),
        n_runs: runs,
        base_seed: ctx.seed,
        aggregate: result.aggregate,
        runs: result.runs,
    };
    let json = serde_json::to_string_pretty(&report).map_err(stage("eval"))?;
    atomic_write(out, json.as_bytes())?;
    if let Some(roc_path) = roc_out {
        let curve = roc_curve(&report.runs).map_err(stage("eval"))?;
        atomic_write(roc_path, &roc_csv(&curve))?;
    }
    ctx.log(format!(
        "{} on {} [{}]: mean accuracy {:.4} over {} run(s) -> {}",
        report.family,
        rep,
        report.protocol,
        report.aggregate.mean_accuracy,
        runs,
        out.display()
    ));
    Ok(())
}

pub fn roc(ctx: &Ctx, report_path: &Path, out: &Path) -> Result<(), CliError> {
    let text = std::fs::read_to_string(report_path)
        .with_context(|| format!("[roc] reading {}", report_path.display()))
        .map_err(CliError::Runtime)?;
    let report: EvalReport = serde_json::from_str(&text).map_err(stage("roc"))?;
    let curve = roc_curve(&report.runs).map_err(stage("roc"))?;
    atomic_write(out, &roc_csv(&curve))?;
    ctx.log(format!(
        "roc of median run {} ({} points) -> {}",
        curve.run_index,
        curve.points.len(),
        out.display()
    ));
    Ok(())
}

// ---------------------------------------------------------------------------
// reproduce

const GRID_FAMILIES: [&str; 5] = ["svm", "snn", "mnn", "adaboost", "dtw"];
const GRID_REPS: [RepKind; 4] = [
    RepKind::JointTime,
    RepKind::AngleTime,
    RepKind::JointFreq,
    RepKind::AngleFreq,
];

fn grid_trainer(family: &str, adaboost_rounds: usize) -> TrainerSpec {
    match family {
        "svm" => TrainerSpec::Svm {
            lambda: 2e-3,
            epochs: 200,
        },
        "snn" => TrainerSpec::Nn(NnTrainerSpec {
            hidden_sizes: vec![500],
            learning_rate: 0.3,
            epochs: 4,
            batch_size: 20,
        }),
        "mnn" => TrainerSpec::Nn(NnTrainerSpec {
            hidden_sizes: vec![500, 100],
            learning_rate: 0.3,
            epochs: 4,
            batch_size: 20,
        }),
        "adaboost" => TrainerSpec::AdaBoost {
            rounds: adaboost_rounds,
        },
        "dtw" => TrainerSpec::Dtw,
        _ => unreachable!(),
    }
}

fn accuracy_table(results: &[(usize, usize, Option<ProtocolResult>)]) -> Vec<u8> {
    let mut out = String::from(
        "# synthetic benchmark data; accuracies are generator-specific and not comparable to \
         results on real recordings\n",
    );
    out.push_str("family");
    for rep in GRID_REPS {
        out.push(',');
        out.push_str(rep.as_str());
    }
    out.push('\n');
    for (fi, family) in GRID_FAMILIES.iter().enumerate() {
        out.push_str(family);
        for ri in 0..GRID_REPS.len() {
            let cell = results
                .iter()
                .find(|(f, r, _)| *f == fi && *r == ri)
                .and_then(|(_, _, res)| res.as_ref());
            match cell {
                Some(res) => {
                    out.push_str(&format!(",{:.2}", res.aggregate.mean_accuracy * 100.0))
                }
                None => out.push_str(",-"),
            }
        }
        out.push('\n');
    }
    out.into_bytes()
}

pub fn reproduce(ctx: &Ctx, out_dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(out_dir.join("roc"))
        .with_context(|| format!("[reproduce] creating {}", out_dir.join("roc").display()))
        .map_err(CliError::Runtime)?;
    std::fs::create_dir_all(out_dir.join("reports"))
        .with_context(|| format!("[reproduce] creating {}", out_dir.join("reports").display()))
        .map_err(CliError::Runtime)?;

    ctx.log("generating synthetic Blast-Off dataset (125 samples)");
    let template = builtin_template("Blast-Off").map_err(stage("generate"))?;
    let raw = generate_dataset(&template, &exq_core::syndata::reference_counts(), ctx.seed)
        .map_err(stage("generate"))?;
    let prep =
        preprocess_dataset(&raw, &PreprocessConfig::default()).map_err(stage("preprocess"))?;

    ctx.log("extracting the four representations");
    let data: Vec<EvalData> = GRID_REPS
        .iter()
        .map(|&rep| EvalData::prepare(&prep, rep))
        .collect::<Result<_, _>>()
        .map_err(stage("featurize"))?;

    let random = Protocol::Random { n_train: 80 };
    let holdout = Protocol::SubjectHoldout {
        train_subjects: [3, 4, 5].into_iter().collect(),
        test_subjects: [1, 2].into_iter().collect(),
    };
    // boosting rounds per protocol: more rounds pay off on random splits
    let protocols: [(&str, &Protocol, usize, usize); 2] = [
        ("random", &random, 51, 300),
        ("holdout", &holdout, 1, 90),
    ];

    let cells: Vec<(usize, usize)> = (0..GRID_FAMILIES.len())
        .flat_map(|f| (0..GRID_REPS.len()).map(move |r| (f, r)))
        .collect();

    for (proto_name, protocol, runs, rounds) in protocols {
        ctx.log(format!("running {proto_name} protocol grid ({runs} run(s) per cell)"));
        let results: Vec<(usize, usize, Option<ProtocolResult>)> = cells
            .par_iter()
            .map(|&(fi, ri)| -> Result<_, anyhow::Error> {
                let family = GRID_FAMILIES[fi];
                let rep = GRID_REPS[ri];
                let trainer = grid_trainer(family, rounds);
                if trainer.needs_sequences() && rep.is_frequency() {
                    return Ok((fi, ri, None));
                }
                let result = run_protocol(&data[ri], &trainer, protocol, runs, ctx.seed)
                    .map_err(stage(&format!("eval {family} {rep} ({proto_name})")))?;
                Ok((fi, ri, Some(result)))
            })
            .collect::<Result<_, _>>()
            .map_err(CliError::Runtime)?;

        let table = accuracy_table(&results);
        atomic_write(&out_dir.join(format!("{proto_name}_accuracy.csv")), &table)?;

        for (fi, ri, result) in &results {
            let Some(result) = result else { continue };
            let family = GRID_FAMILIES[*fi];
            let rep = GRID_REPS[*ri];
            let report = EvalReport {
                family: family.to_string(),
                rep: data[*ri].rep,
                protocol: protocol.describe(),
                n_runs: runs,
                base_seed: ctx.seed,
                aggregate: result.aggregate,
                runs: result.runs.clone(),
            };
            let json = serde_json::to_string_pretty(&report).map_err(stage("reproduce"))?;
            atomic_write(
                &out_dir
                    .join("reports")
                    .join(format!("{proto_name}_{family}_{rep}.json")),
                json.as_bytes(),
            )?;
            if proto_name == "random" {
                let curve = roc_curve(&result.runs)
                    .map_err(stage(&format!("roc {family} {rep}")))?;
                atomic_write(
                    &out_dir.join("roc").join(format!("{family}_{rep}.csv")),
                    &roc_csv(&curve),
                )?;
            }
        }
    }
    ctx.log(format!("wrote benchmark grid to {}", out_dir.display()));
    Ok(())
}
