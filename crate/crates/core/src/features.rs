//! Feature extraction: joint positions and joint angles, in the time
//! domain or as per-channel orthonormal DCT-II coefficients.
//!
//! Layouts are fixed so indices are deterministic:
//!
//! * time-domain vectors are frame-major (`frame k`, then channel);
//! * frequency-domain vectors are channel-major (all coefficients of
//!   channel 0, then channel 1, ...).
//!
//! A joint frame contributes 60 channels (20 joints x 3 axes, in
//! [`JointId`] order), an angle frame 10 channels in [`ANGLE_TRIPLES`]
//! order.

use crate::skeleton::{Dataset, JointId, Label, SkeletonSample, Vec3, JOINT_COUNT};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEGENERATE_RAY_EPS: f64 = 1e-9;

/// The four feature representations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RepKind {
    JointTime,
    AngleTime,
    JointFreq,
    AngleFreq,
}

impl RepKind {
    pub const ALL: [RepKind; 4] = [
        RepKind::JointTime,
        RepKind::AngleTime,
        RepKind::JointFreq,
        RepKind::AngleFreq,
    ];

    pub fn is_frequency(self) -> bool {
        matches!(self, RepKind::JointFreq | RepKind::AngleFreq)
    }

    pub fn is_angle(self) -> bool {
        matches!(self, RepKind::AngleTime | RepKind::AngleFreq)
    }

    /// The time-domain representation this kind is derived from.
    pub fn time_domain(self) -> RepKind {
        match self {
            RepKind::JointTime | RepKind::JointFreq => RepKind::JointTime,
            RepKind::AngleTime | RepKind::AngleFreq => RepKind::AngleTime,
        }
    }

    /// Number of channels per frame (60 for joints, 10 for angles).
    pub fn channels(self) -> usize {
        if self.is_angle() {
            ANGLE_TRIPLES.len()
        } else {
            JOINT_COUNT * 3
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            RepKind::JointTime => "joint-time",
            RepKind::AngleTime => "angle-time",
            RepKind::JointFreq => "joint-freq",
            RepKind::AngleFreq => "angle-freq",
        }
    }

    pub fn parse(s: &str) -> Option<RepKind> {
        RepKind::ALL.iter().copied().find(|r| r.as_str() == s)
    }
}

impl std::fmt::Display for RepKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A representation pinned to a frame count, which fixes its dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Representation {
    pub kind: RepKind,
    pub frames: usize,
}

impl Representation {
    pub fn new(kind: RepKind, frames: usize) -> Representation {
        Representation { kind, frames }
    }

    pub fn dim(&self) -> usize {
        self.kind.channels() * self.frames
    }
}

/// A fixed-length real feature vector extracted from one sample.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub rep: Representation,
    /// Index of the source sample within its dataset.
    pub source: usize,
}

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("sample has {got} frames, expected {expected}")]
    WrongFrameCount { got: usize, expected: usize },
    #[error("degenerate ray at frame {frame}: joints {a}-{b}-{c} coincide at the vertex")]
    DegenerateRay {
        frame: usize,
        a: JointId,
        b: JointId,
        c: JointId,
    },
    #[error("{0} is not a time-domain representation")]
    NotTimeDomain(RepKind),
    #[error("dataset is not preprocessed; extract features from pipeline output")]
    NotPreprocessed,
}

/// The 10 tracked angles as (ray endpoint, vertex, ray endpoint) triples,
/// in feature-channel order.
pub const ANGLE_TRIPLES: [(JointId, JointId, JointId); 10] = [
    (JointId::HipLeft, JointId::KneeLeft, JointId::AnkleLeft),
    (JointId::HipRight, JointId::KneeRight, JointId::AnkleRight),
    (JointId::ShoulderLeft, JointId::ElbowLeft, JointId::WristLeft),
    (JointId::ShoulderRight, JointId::ElbowRight, JointId::WristRight),
    (JointId::KneeLeft, JointId::HipLeft, JointId::Spine),
    (JointId::KneeRight, JointId::HipRight, JointId::Spine),
    (JointId::ElbowLeft, JointId::ShoulderLeft, JointId::HipCenter),
    (JointId::ElbowRight, JointId::ShoulderRight, JointId::HipCenter),
    (JointId::ElbowLeft, JointId::ShoulderLeft, JointId::ShoulderRight),
    (JointId::ElbowRight, JointId::ShoulderRight, JointId::ShoulderLeft),
];

/// Angle at vertex `b` between rays to `a` and to `c`, in radians `[0, pi]`.
///
/// The cosine is clamped to `[-1, 1]` before `acos`, so collinear triples
/// are exact. Fails only when an endpoint coincides with the vertex.
pub fn angle_between(a: Vec3, b: Vec3, c: Vec3) -> Option<f64> {
    let u = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    let v = [c[0] - b[0], c[1] - b[1], c[2] - b[2]];
    let nu = (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt();
    let nv = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    if nu <= DEGENERATE_RAY_EPS || nv <= DEGENERATE_RAY_EPS {
        return None;
    }
    let cos = (u[0] * v[0] + u[1] * v[1] + u[2] * v[2]) / (nu * nv);
    Some(cos.clamp(-1.0, 1.0).acos())
}

fn expect_frames(sample: &SkeletonSample, expected: usize) -> Result<(), FeatureError> {
    if sample.frames.len() != expected {
        return Err(FeatureError::WrongFrameCount {
            got: sample.frames.len(),
            expected,
        });
    }
    Ok(())
}

/// Concatenates all joint coordinates frame-major: for frame `k`, joint `j`
/// in [`JointId`] order, emit `(x, y, z)`. Index of (k, j, x) is
/// `3 * (20 * k + j)`.
pub fn flatten_joints(
    sample: &SkeletonSample,
    source: usize,
    target_frames: usize,
) -> Result<FeatureVector, FeatureError> {
    expect_frames(sample, target_frames)?;
    let rep = Representation::new(RepKind::JointTime, target_frames);
    let mut values = Vec::with_capacity(rep.dim());
    for frame in &sample.frames {
        for pos in &frame.positions {
            values.extend_from_slice(pos);
        }
    }
    assert_eq!(values.len(), rep.dim());
    Ok(FeatureVector { values, rep, source })
}

/// Computes the 10 angles per frame, frame-major, in [`ANGLE_TRIPLES`]
/// order.
pub fn compute_angles(
    sample: &SkeletonSample,
    source: usize,
    target_frames: usize,
) -> Result<FeatureVector, FeatureError> {
    expect_frames(sample, target_frames)?;
    let rep = Representation::new(RepKind::AngleTime, target_frames);
    let mut values = Vec::with_capacity(rep.dim());
    for (fi, frame) in sample.frames.iter().enumerate() {
        for &(a, b, c) in &ANGLE_TRIPLES {
            let angle = angle_between(frame.position(a), frame.position(b), frame.position(c))
                .ok_or(FeatureError::DegenerateRay { frame: fi, a, b, c })?;
            values.push(angle);
        }
    }
    assert_eq!(values.len(), rep.dim());
    Ok(FeatureVector { values, rep, source })
}

/// Orthonormal DCT-II of a single channel:
/// `X[m] = c(m) * sum_k x[k] cos(pi (2k+1) m / (2T))`, with
/// `c(0) = sqrt(1/T)` and `c(m>0) = sqrt(2/T)`.
pub fn dct2_channel(x: &[f64]) -> Vec<f64> {
    let t = x.len();
    let tf = t as f64;
    let c0 = (1.0 / tf).sqrt();
    let cm = (2.0 / tf).sqrt();
    (0..t)
        .map(|m| {
            let sum: f64 = x
                .iter()
                .enumerate()
                .map(|(k, &v)| v * (std::f64::consts::PI * (2 * k + 1) as f64 * m as f64 / (2.0 * tf)).cos())
                .sum();
            if m == 0 {
                c0 * sum
            } else {
                cm * sum
            }
        })
        .collect()
}

/// Transforms a time-domain feature vector into its frequency counterpart
/// by applying the orthonormal DCT-II to each channel's time series.
///
/// Output layout is channel-major.
pub fn dct_transform(fv: &FeatureVector) -> Result<FeatureVector, FeatureError> {
    let kind = fv.rep.kind;
    if kind.is_frequency() {
        return Err(FeatureError::NotTimeDomain(kind));
    }
    let channels = kind.channels();
    let t = fv.rep.frames;
    debug_assert_eq!(fv.values.len(), channels * t);
    let out_kind = match kind {
        RepKind::JointTime => RepKind::JointFreq,
        RepKind::AngleTime => RepKind::AngleFreq,
        _ => unreachable!(),
    };
    // cosine table shared across channels; summation order matches
    // dct2_channel exactly, so the results are bit-identical to it
    let tf = t as f64;
    let basis: Vec<f64> = (0..t * t)
        .map(|i| {
            let (m, k) = (i / t, i % t);
            (std::f64::consts::PI * (2 * k + 1) as f64 * m as f64 / (2.0 * tf)).cos()
        })
        .collect();
    let c0 = (1.0 / tf).sqrt();
    let cm = (2.0 / tf).sqrt();

    let mut values = vec![0.0; channels * t];
    let mut series = vec![0.0; t];
    for ch in 0..channels {
        for k in 0..t {
            series[k] = fv.values[k * channels + ch];
        }
        for m in 0..t {
            let row = &basis[m * t..(m + 1) * t];
            let sum: f64 = series.iter().zip(row).map(|(&v, &b)| v * b).sum();
            values[ch * t + m] = if m == 0 { c0 * sum } else { cm * sum };
        }
    }
    let rep = Representation::new(out_kind, t);
    assert_eq!(values.len(), rep.dim());
    Ok(FeatureVector {
        values,
        rep,
        source: fv.source,
    })
}

/// Per-frame channel vectors of a preprocessed sample (60-D joint rows or
/// 10-D angle rows). This is the sequence form consumed by DTW; its
/// frame-major concatenation equals the corresponding time-domain vector.
pub fn frame_vectors(
    sample: &SkeletonSample,
    kind: RepKind,
    target_frames: usize,
) -> Result<Vec<Vec<f64>>, FeatureError> {
    if kind.is_frequency() {
        return Err(FeatureError::NotTimeDomain(kind));
    }
    let fv = match kind {
        RepKind::JointTime => flatten_joints(sample, 0, target_frames)?,
        RepKind::AngleTime => compute_angles(sample, 0, target_frames)?,
        _ => unreachable!(),
    };
    let channels = kind.channels();
    Ok(fv.values.chunks_exact(channels).map(|c| c.to_vec()).collect())
}

/// Features for a whole dataset in one representation, with the labels and
/// subject ids needed by the evaluation protocols.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSet {
    pub rep: Representation,
    pub vectors: Vec<Vec<f64>>,
    pub labels: Vec<Label>,
    pub subjects: Vec<u32>,
}

impl FeatureSet {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.rep.dim()
    }
}

/// Extracts one representation for every sample of a preprocessed dataset.
pub fn featurize_dataset(dataset: &Dataset, kind: RepKind) -> Result<FeatureSet, FeatureError> {
    if !dataset.preprocessed {
        return Err(FeatureError::NotPreprocessed);
    }
    let frames = dataset.samples.first().map(|s| s.num_frames()).unwrap_or(0);
    let mut vectors = Vec::with_capacity(dataset.len());
    for (i, sample) in dataset.samples.iter().enumerate() {
        let time = match kind.time_domain() {
            RepKind::JointTime => flatten_joints(sample, i, frames)?,
            RepKind::AngleTime => compute_angles(sample, i, frames)?,
            _ => unreachable!(),
        };
        let fv = if kind.is_frequency() { dct_transform(&time)? } else { time };
        vectors.push(fv.values);
    }
    Ok(FeatureSet {
        rep: Representation::new(kind, frames),
        vectors,
        labels: dataset.samples.iter().map(|s| s.label).collect(),
        subjects: dataset.samples.iter().map(|s| s.subject_id).collect(),
    })
}
