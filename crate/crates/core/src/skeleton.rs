//! Core data types for skeleton samples and dataset ingestion.
//!
//! A sample is one repetition of an exercise, recorded as an ordered list
//! of frames, each holding 20 tracked joint positions. Raw samples have
//! variable length; preprocessing (see [`crate::preprocess`]) produces the
//! canonical fixed-length, normalized form.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use thiserror::Error;

/// Number of tracked joints per frame.
pub const JOINT_COUNT: usize = 20;

/// The 20 tracked joints, in their stable index order (0..20).
///
/// Feature layouts and file formats depend on this order never changing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[repr(u8)]
pub enum JointId {
    HipCenter = 0,
    Spine,
    ShoulderCenter,
    Head,
    ShoulderLeft,
    ElbowLeft,
    WristLeft,
    HandLeft,
    ShoulderRight,
    ElbowRight,
    WristRight,
    HandRight,
    HipLeft,
    KneeLeft,
    AnkleLeft,
    FootLeft,
    HipRight,
    KneeRight,
    AnkleRight,
    FootRight,
}

impl JointId {
    /// All joints in index order.
    pub const ALL: [JointId; JOINT_COUNT] = [
        JointId::HipCenter,
        JointId::Spine,
        JointId::ShoulderCenter,
        JointId::Head,
        JointId::ShoulderLeft,
        JointId::ElbowLeft,
        JointId::WristLeft,
        JointId::HandLeft,
        JointId::ShoulderRight,
        JointId::ElbowRight,
        JointId::WristRight,
        JointId::HandRight,
        JointId::HipLeft,
        JointId::KneeLeft,
        JointId::AnkleLeft,
        JointId::FootLeft,
        JointId::HipRight,
        JointId::KneeRight,
        JointId::AnkleRight,
        JointId::FootRight,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<JointId> {
        Self::ALL.get(i).copied()
    }
}

impl fmt::Display for JointId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// A 3D position as `[x, y, z]`.
pub type Vec3 = [f64; 3];

/// One time step: the positions of all 20 joints, indexed by [`JointId`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Frame {
    pub positions: [Vec3; JOINT_COUNT],
}

impl Frame {
    pub fn zero() -> Frame {
        Frame {
            positions: [[0.0; 3]; JOINT_COUNT],
        }
    }

    pub fn position(&self, joint: JointId) -> Vec3 {
        self.positions[joint.index()]
    }

    pub fn is_finite(&self) -> bool {
        self.positions
            .iter()
            .all(|p| p.iter().all(|c| c.is_finite()))
    }
}

/// Sample label. `Good` is the positive class (+1), `Bad` the negative (-1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Good,
    Bad,
}

impl Label {
    /// Sign encoding used by the classifiers: Good = +1, Bad = -1.
    pub fn sign(self) -> f64 {
        match self {
            Label::Good => 1.0,
            Label::Bad => -1.0,
        }
    }

    pub fn from_sign(s: f64) -> Label {
        if s > 0.0 {
            Label::Good
        } else {
            Label::Bad
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Good => "good",
            Label::Bad => "bad",
        }
    }

    pub fn parse(s: &str) -> Option<Label> {
        match s {
            "good" => Some(Label::Good),
            "bad" => Some(Label::Bad),
            _ => None,
        }
    }
}

/// The five exercise names a sample may carry.
pub const EXERCISE_NAMES: [&str; 5] = [
    "Blast-Off",
    "Body-Builder",
    "Finish-Line",
    "Reach-For-The-Stars",
    "Take-A-Bow",
];

/// One labeled exercise repetition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkeletonSample {
    pub subject_id: u32,
    pub exercise: String,
    pub label: Label,
    pub frames: Vec<Frame>,
}

impl SkeletonSample {
    pub fn num_frames(&self) -> usize {
        self.frames.len()
    }
}

/// A violation found by [`validate_sample`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    EmptyFrameList,
    NonFiniteCoordinate { frame: usize, joint: JointId },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyFrameList => write!(f, "empty frame list"),
            Violation::NonFiniteCoordinate { frame, joint } => {
                write!(f, "non-finite coordinate at frame {frame}, joint {joint}")
            }
        }
    }
}

/// Checks every invariant of a sample; violations are returned, not thrown.
pub fn validate_sample(sample: &SkeletonSample) -> Result<(), Vec<Violation>> {
    let mut violations = Vec::new();
    if sample.frames.is_empty() {
        violations.push(Violation::EmptyFrameList);
    }
    for (fi, frame) in sample.frames.iter().enumerate() {
        for (ji, pos) in frame.positions.iter().enumerate() {
            if !pos.iter().all(|c| c.is_finite()) {
                violations.push(Violation::NonFiniteCoordinate {
                    frame: fi,
                    joint: JointId::from_index(ji).unwrap(),
                });
            }
        }
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(violations)
    }
}

/// A list of samples sharing one coordinate convention.
///
/// `preprocessed` distinguishes raw recordings from pipeline output; it is
/// inferred on load (equal lengths and a zeroed hip center) and set
/// explicitly by the preprocessing pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub samples: Vec<SkeletonSample>,
    pub provenance: String,
    pub preprocessed: bool,
}

impl Dataset {
    pub fn new(samples: Vec<SkeletonSample>, provenance: impl Into<String>) -> Dataset {
        let preprocessed = looks_preprocessed(&samples);
        Dataset {
            samples,
            provenance: provenance.into(),
            preprocessed,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Counts samples per (subject, label).
    pub fn counts_by_subject(&self) -> Vec<(u32, usize, usize)> {
        let mut subjects: Vec<u32> = self.samples.iter().map(|s| s.subject_id).collect();
        subjects.sort_unstable();
        subjects.dedup();
        subjects
            .into_iter()
            .map(|subj| {
                let pos = self
                    .samples
                    .iter()
                    .filter(|s| s.subject_id == subj && s.label == Label::Good)
                    .count();
                let neg = self
                    .samples
                    .iter()
                    .filter(|s| s.subject_id == subj && s.label == Label::Bad)
                    .count();
                (subj, pos, neg)
            })
            .collect()
    }
}

fn looks_preprocessed(samples: &[SkeletonSample]) -> bool {
    if samples.is_empty() {
        return false;
    }
    let len0 = samples[0].num_frames();
    samples.iter().all(|s| {
        s.num_frames() == len0
            && s.frames
                .iter()
                .all(|f| f.position(JointId::HipCenter) == [0.0, 0.0, 0.0])
    })
}

/// Dataset file format.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FileFormat {
    Jsonl,
    Csv,
}

#[derive(Debug, Error)]
pub enum DataError {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: malformed record: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("line {line}: frame {frame} has {got} joints, expected {expected}")]
    JointCount {
        line: usize,
        frame: usize,
        got: usize,
        expected: usize,
    },
    #[error("line {line}: {violation} (subject {subject})")]
    InvalidSample {
        line: usize,
        subject: u32,
        violation: String,
    },
    #[error("line {line}: unknown label {got:?} (expected \"good\" or \"bad\")")]
    UnknownLabel { line: usize, got: String },
    #[error("no samples in {path}")]
    Empty { path: String },
}

fn io_err(path: &Path, source: std::io::Error) -> DataError {
    DataError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Loads a dataset, validating every sample. Sample order is preserved.
pub fn load_dataset(path: &Path, format: FileFormat) -> Result<Dataset, DataError> {
    let samples = match format {
        FileFormat::Jsonl => load_jsonl(path)?,
        FileFormat::Csv => load_csv(path)?,
    };
    if samples.is_empty() {
        return Err(DataError::Empty {
            path: path.display().to_string(),
        });
    }
    Ok(Dataset::new(samples, path.display().to_string()))
}

/// Writes a dataset in the given format. `load_dataset` of the result
/// reproduces the samples bit-exactly.
pub fn save_dataset(dataset: &Dataset, path: &Path, format: FileFormat) -> Result<(), DataError> {
    let file = std::fs::File::create(path).map_err(|e| io_err(path, e))?;
    let mut out = BufWriter::new(file);
    write_dataset(dataset, &mut out, format).map_err(|e| io_err(path, e))?;
    out.flush().map_err(|e| io_err(path, e))
}

/// Serializes a dataset to any writer; `save_dataset` and the CLI's
/// atomic writes share this path, so their bytes are identical.
pub fn write_dataset(
    dataset: &Dataset,
    out: &mut impl Write,
    format: FileFormat,
) -> std::io::Result<()> {
    match format {
        FileFormat::Jsonl => write_jsonl(dataset, out),
        FileFormat::Csv => write_csv(dataset, out),
    }
}

fn load_jsonl(path: &Path) -> Result<Vec<SkeletonSample>, DataError> {
    let file = std::fs::File::open(path).map_err(|e| io_err(path, e))?;
    let reader = BufReader::new(file);
    let mut samples = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| io_err(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let sample: SkeletonSample = serde_json::from_str(&line).map_err(|e| {
            // serde reports a 20-element mismatch as an invalid-length error;
            // surface it as the joint-count case with the offending line.
            let msg = e.to_string();
            if msg.contains("invalid length") {
                DataError::Malformed {
                    line: line_no,
                    msg: format!("frame does not have {JOINT_COUNT} joints: {msg}"),
                }
            } else if msg.contains("unknown variant") {
                DataError::UnknownLabel {
                    line: line_no,
                    got: msg,
                }
            } else {
                DataError::Malformed { line: line_no, msg }
            }
        })?;
        check_sample(&sample, line_no)?;
        samples.push(sample);
    }
    Ok(samples)
}

fn write_jsonl(dataset: &Dataset, out: &mut impl Write) -> std::io::Result<()> {
    for sample in &dataset.samples {
        let json = serde_json::to_string(sample).expect("sample serializes");
        writeln!(out, "{json}")?;
    }
    Ok(())
}

fn check_sample(sample: &SkeletonSample, line: usize) -> Result<(), DataError> {
    if let Err(violations) = validate_sample(sample) {
        return Err(DataError::InvalidSample {
            line,
            subject: sample.subject_id,
            violation: violations[0].to_string(),
        });
    }
    Ok(())
}

const CSV_HEADER_PREFIX: [&str; 5] = ["subject_id", "exercise", "label", "sample_idx", "frame_idx"];

fn csv_header() -> Vec<String> {
    let mut cols: Vec<String> = CSV_HEADER_PREFIX.iter().map(|s| s.to_string()).collect();
    for j in 0..JOINT_COUNT {
        for axis in ["x", "y", "z"] {
            cols.push(format!("j{j}{axis}"));
        }
    }
    cols
}

fn write_csv(dataset: &Dataset, out: &mut impl Write) -> std::io::Result<()> {
    writeln!(out, "{}", csv_header().join(","))?;
    for (si, sample) in dataset.samples.iter().enumerate() {
        for (fi, frame) in sample.frames.iter().enumerate() {
            write!(
                out,
                "{},{},{},{},{}",
                sample.subject_id,
                sample.exercise,
                sample.label.as_str(),
                si,
                fi
            )?;
            for pos in &frame.positions {
                write!(out, ",{},{},{}", pos[0], pos[1], pos[2])?;
            }
            writeln!(out)?;
        }
    }
    Ok(())
}

fn load_csv(path: &Path) -> Result<Vec<SkeletonSample>, DataError> {
    let file = std::fs::File::open(path).map_err(|e| io_err(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(BufReader::new(file));

    let expected_cols = 5 + JOINT_COUNT * 3;
    let mut samples: Vec<SkeletonSample> = Vec::new();
    let mut current_idx: Option<u64> = None;

    for record in reader.records() {
        let record = record.map_err(|e| DataError::Malformed {
            line: e
                .position()
                .map(|p| p.line() as usize)
                .unwrap_or_default(),
            msg: e.to_string(),
        })?;
        let line = record
            .position()
            .map(|p| p.line() as usize)
            .unwrap_or_default();
        if record.len() != expected_cols {
            return Err(DataError::Malformed {
                line,
                msg: format!("expected {expected_cols} columns, found {}", record.len()),
            });
        }
        let field = |i: usize| record.get(i).unwrap();
        let parse_num = |i: usize, what: &str| -> Result<f64, DataError> {
            field(i).parse::<f64>().map_err(|_| DataError::Malformed {
                line,
                msg: format!("bad {what}: {:?}", field(i)),
            })
        };
        let subject_id: u32 = field(0).parse().map_err(|_| DataError::Malformed {
            line,
            msg: format!("bad subject_id: {:?}", field(0)),
        })?;
        let exercise = field(1).to_string();
        let label = Label::parse(field(2)).ok_or_else(|| DataError::UnknownLabel {
            line,
            got: field(2).to_string(),
        })?;
        let sample_idx: u64 = field(3).parse().map_err(|_| DataError::Malformed {
            line,
            msg: format!("bad sample_idx: {:?}", field(3)),
        })?;

        let mut frame = Frame::zero();
        for j in 0..JOINT_COUNT {
            for a in 0..3 {
                frame.positions[j][a] = parse_num(5 + j * 3 + a, "coordinate")?;
            }
        }
        if !frame.is_finite() {
            return Err(DataError::Malformed {
                line,
                msg: "non-finite coordinate".into(),
            });
        }

        if current_idx != Some(sample_idx) {
            current_idx = Some(sample_idx);
            samples.push(SkeletonSample {
                subject_id,
                exercise,
                label,
                frames: Vec::new(),
            });
        }
        samples.last_mut().unwrap().frames.push(frame);
    }
    Ok(samples)
}
