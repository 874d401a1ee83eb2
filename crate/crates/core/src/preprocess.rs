//! Canonical preprocessing: resample to a fixed frame count, normalize
//! body height, and express joints relative to the hip center.
//!
//! The pipeline order is resample, then scale, then hip-center-relative.
//! Scaling before the relative step preserves the height information the
//! scale factor is derived from; resampling first minimizes work on long
//! recordings and commutes with the other two stages.

use crate::skeleton::{Dataset, Frame, JointId, SkeletonSample, JOINT_COUNT};
use thiserror::Error;

/// Vertical extents below this are treated as degenerate.
pub const EXTENT_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct PreprocessConfig {
    /// Output length of every sample.
    pub target_frames: usize,
    /// Lower bound of the normalized vertical extent.
    pub scale_lo: f64,
    /// Upper bound of the normalized vertical extent.
    pub scale_hi: f64,
    /// Scale each axis to [lo, hi] independently instead of applying one
    /// uniform factor anchored to the vertical extent.
    pub per_axis: bool,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        PreprocessConfig {
            target_frames: 160,
            scale_lo: 1.0,
            scale_hi: 3.0,
            per_axis: false,
        }
    }
}

impl PreprocessConfig {
    pub fn validate(&self) -> Result<(), PreprocessError> {
        if self.target_frames < 2 {
            return Err(PreprocessError::BadConfig(format!(
                "target_frames must be >= 2, got {}",
                self.target_frames
            )));
        }
        if !(self.scale_lo < self.scale_hi) {
            return Err(PreprocessError::BadConfig(format!(
                "scale_lo ({}) must be < scale_hi ({})",
                self.scale_lo, self.scale_hi
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum PreprocessError {
    #[error("sample has {got} frames; resampling needs at least 2")]
    TooFewFrames { got: usize },
    #[error("degenerate vertical extent ({extent:e}); cannot height-scale")]
    DegenerateExtent { extent: f64 },
    #[error("invalid preprocess config: {0}")]
    BadConfig(String),
}

/// Resamples a sample to exactly `target_frames` frames by per-coordinate
/// piecewise-linear interpolation over normalized time.
///
/// Output frame `k` sits at `t = k / (target_frames - 1)`; the first and
/// last frames reproduce the input endpoints exactly.
pub fn resample(
    sample: &SkeletonSample,
    target_frames: usize,
) -> Result<SkeletonSample, PreprocessError> {
    let n = sample.frames.len();
    if n < 2 {
        return Err(PreprocessError::TooFewFrames { got: n });
    }
    if target_frames < 2 {
        return Err(PreprocessError::BadConfig(format!(
            "target_frames must be >= 2, got {target_frames}"
        )));
    }
    let mut frames = Vec::with_capacity(target_frames);
    let last = (target_frames - 1) as f64;
    for k in 0..target_frames {
        let pos = (k as f64 / last) * (n - 1) as f64;
        let i0 = (pos.floor() as usize).min(n - 2);
        let u = pos - i0 as f64;
        let (a, b) = (&sample.frames[i0], &sample.frames[i0 + 1]);
        let mut frame = Frame::zero();
        for j in 0..JOINT_COUNT {
            for axis in 0..3 {
                frame.positions[j][axis] =
                    (1.0 - u) * a.positions[j][axis] + u * b.positions[j][axis];
            }
        }
        frames.push(frame);
    }
    Ok(SkeletonSample {
        frames,
        ..sample.clone()
    })
}

/// Applies one uniform scale and translation to all joints in all frames
/// so the sample's vertical (Y) extent maps exactly onto `[lo, hi]`.
///
/// X and Z are scaled by the same factor, preserving limb proportions, and
/// translated so their midpoints land on `(lo + hi) / 2`.
pub fn height_scale(
    sample: &SkeletonSample,
    lo: f64,
    hi: f64,
) -> Result<SkeletonSample, PreprocessError> {
    let (min, max) = coordinate_extents(sample);
    let extent = max[1] - min[1];
    if !(extent > EXTENT_EPS) {
        return Err(PreprocessError::DegenerateExtent { extent });
    }
    let s = (hi - lo) / extent;
    let mid = (lo + hi) / 2.0;
    let mid_x = (min[0] + max[0]) / 2.0;
    let mid_z = (min[2] + max[2]) / 2.0;
    Ok(map_coords(sample, |axis, v| match axis {
        0 => mid + s * (v - mid_x),
        1 => lo + s * (v - min[1]),
        _ => mid + s * (v - mid_z),
    }))
}

/// Min-max scales each axis to `[lo, hi]` independently. Axes with
/// degenerate extent collapse to the interval midpoint.
pub fn per_axis_scale(
    sample: &SkeletonSample,
    lo: f64,
    hi: f64,
) -> Result<SkeletonSample, PreprocessError> {
    let (min, max) = coordinate_extents(sample);
    if !(max[1] - min[1] > EXTENT_EPS) {
        return Err(PreprocessError::DegenerateExtent {
            extent: max[1] - min[1],
        });
    }
    let mid = (lo + hi) / 2.0;
    Ok(map_coords(sample, |axis, v| {
        let extent = max[axis] - min[axis];
        if extent > EXTENT_EPS {
            lo + (hi - lo) * (v - min[axis]) / extent
        } else {
            mid
        }
    }))
}

/// Subtracts the hip-center position from all joints, per frame. The hip
/// center becomes exactly (0, 0, 0) everywhere. Idempotent.
pub fn hip_center_relative(sample: &SkeletonSample) -> SkeletonSample {
    let hip = JointId::HipCenter.index();
    let mut out = sample.clone();
    for frame in &mut out.frames {
        let origin = frame.positions[hip];
        for pos in &mut frame.positions {
            for axis in 0..3 {
                pos[axis] -= origin[axis];
            }
        }
        frame.positions[hip] = [0.0, 0.0, 0.0];
    }
    out
}

/// Full pipeline: resample, height-scale, hip-center-relative.
pub fn preprocess_pipeline(
    sample: &SkeletonSample,
    cfg: &PreprocessConfig,
) -> Result<SkeletonSample, PreprocessError> {
    cfg.validate()?;
    let resampled = resample(sample, cfg.target_frames)?;
    let scaled = if cfg.per_axis {
        per_axis_scale(&resampled, cfg.scale_lo, cfg.scale_hi)?
    } else {
        height_scale(&resampled, cfg.scale_lo, cfg.scale_hi)?
    };
    Ok(hip_center_relative(&scaled))
}

/// Preprocesses every sample of a dataset and marks the result.
pub fn preprocess_dataset(
    dataset: &Dataset,
    cfg: &PreprocessConfig,
) -> Result<Dataset, PreprocessError> {
    let samples = dataset
        .samples
        .iter()
        .map(|s| preprocess_pipeline(s, cfg))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Dataset {
        samples,
        provenance: dataset.provenance.clone(),
        preprocessed: true,
    })
}

fn coordinate_extents(sample: &SkeletonSample) -> ([f64; 3], [f64; 3]) {
    let mut min = [f64::INFINITY; 3];
    let mut max = [f64::NEG_INFINITY; 3];
    for frame in &sample.frames {
        for pos in &frame.positions {
            for axis in 0..3 {
                min[axis] = min[axis].min(pos[axis]);
                max[axis] = max[axis].max(pos[axis]);
            }
        }
    }
    (min, max)
}

fn map_coords(sample: &SkeletonSample, f: impl Fn(usize, f64) -> f64) -> SkeletonSample {
    let mut out = sample.clone();
    for frame in &mut out.frames {
        for pos in &mut frame.positions {
            for axis in 0..3 {
                pos[axis] = f(axis, pos[axis]);
            }
        }
    }
    out
}
