//! Synthetic exercise generator.
//!
//! Produces labeled repetitions from hand-authored keyframe templates:
//! clean trajectories for Good samples, and error-injected variants
//! (restricted arm extension, incomplete phase transitions, tempo jitter)
//! for Bad ones. Subjects differ in stature, camera placement, and sensor
//! noise. Everything is driven by derived seeds, so a dataset regenerates
//! byte-identically from its base seed.
//!
//! Only the Blast-Off template follows a documented three-phase structure
//! (seated arms-front, arms swung back, explosive stand with arms up);
//! the other four exercises use invented but plausible phase sequences.

use crate::features::angle_between;
use crate::rng::{self, derive_seed};
use crate::skeleton::{Dataset, Frame, JointId, Label, SkeletonSample, Vec3, EXERCISE_NAMES};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GenError {
    #[error("unknown exercise {0:?}")]
    UnknownExercise(String),
    #[error("invalid template: {0}")]
    BadTemplate(String),
    #[error("invalid error spec: {0}")]
    BadErrorSpec(String),
    #[error("invalid profile: {0}")]
    BadProfile(String),
    #[error("n_frames must be >= 2, got {0}")]
    TooFewFrames(usize),
    #[error("subject counts must be >= 1")]
    BadCounts,
}

/// Jitter magnitudes above this could fold the time axis.
pub const MAX_JITTER: f64 = 0.25;

#[derive(Debug, Clone, PartialEq)]
pub struct Keyframe {
    /// Normalized phase time in [0, 1].
    pub phase_time: f64,
    pub pose: Frame,
}

/// A keyframed motion with smoothstep easing between poses.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionTemplate {
    pub exercise: String,
    pub keyframes: Vec<Keyframe>,
}

impl MotionTemplate {
    pub fn validate(&self) -> Result<(), GenError> {
        if self.keyframes.len() < 2 {
            return Err(GenError::BadTemplate("need at least 2 keyframes".into()));
        }
        if self.keyframes[0].phase_time != 0.0 {
            return Err(GenError::BadTemplate("first phase_time must be 0".into()));
        }
        if self.keyframes.last().unwrap().phase_time != 1.0 {
            return Err(GenError::BadTemplate("last phase_time must be 1".into()));
        }
        for pair in self.keyframes.windows(2) {
            if !(pair[0].phase_time < pair[1].phase_time) {
                return Err(GenError::BadTemplate("phase_times must strictly increase".into()));
            }
        }
        if !self.keyframes.iter().all(|k| k.pose.is_finite()) {
            return Err(GenError::BadTemplate("non-finite keyframe pose".into()));
        }
        Ok(())
    }

    /// Pose at normalized time `t` (clamped to [0, 1]), smoothstep-eased
    /// between the bracketing keyframes.
    pub fn pose_at(&self, t: f64) -> Frame {
        let t = t.clamp(0.0, 1.0);
        let kfs = &self.keyframes;
        let seg = kfs
            .windows(2)
            .position(|pair| t <= pair[1].phase_time)
            .unwrap_or(kfs.len() - 2);
        let (a, b) = (&kfs[seg], &kfs[seg + 1]);
        let s = (t - a.phase_time) / (b.phase_time - a.phase_time);
        let w = s * s * (3.0 - 2.0 * s);
        let mut frame = Frame::zero();
        for j in 0..frame.positions.len() {
            for axis in 0..3 {
                frame.positions[j][axis] =
                    (1.0 - w) * a.pose.positions[j][axis] + w * b.pose.positions[j][axis];
            }
        }
        frame
    }
}

/// Which arm a restriction applies to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Limb {
    ArmLeft,
    ArmRight,
    Both,
}

/// One injected exercise error; a Bad sample carries at least one.
#[derive(Debug, Clone, PartialEq)]
pub enum ErrorSpec {
    /// Scales the shoulder-to-wrist displacement by `factor` (hand follows
    /// the wrist), shortening the reach of the affected arm(s).
    RestrictedExtension { limb: Limb, factor: f64 },
    /// Blends keyframe `phase_index` toward its predecessor so the pose is
    /// only reached to `completion`.
    IncompletePhase { phase_index: usize, completion: f64 },
    /// Smooth monotone warp of the sampling times.
    TempoJitter { magnitude: f64 },
}

impl ErrorSpec {
    fn validate(&self, n_keyframes: usize) -> Result<(), GenError> {
        match self {
            ErrorSpec::RestrictedExtension { factor, .. } => {
                if !(*factor > 0.0 && *factor < 1.0) {
                    return Err(GenError::BadErrorSpec(format!(
                        "restriction factor must be in (0,1), got {factor}"
                    )));
                }
            }
            ErrorSpec::IncompletePhase {
                phase_index,
                completion,
            } => {
                if !(*completion > 0.0 && *completion < 1.0) {
                    return Err(GenError::BadErrorSpec(format!(
                        "completion must be in (0,1), got {completion}"
                    )));
                }
                if *phase_index == 0 || *phase_index >= n_keyframes {
                    return Err(GenError::BadErrorSpec(format!(
                        "phase_index must be in 1..{n_keyframes}, got {phase_index}"
                    )));
                }
            }
            ErrorSpec::TempoJitter { magnitude } => {
                if !(*magnitude >= 0.0 && *magnitude <= MAX_JITTER) {
                    return Err(GenError::BadErrorSpec(format!(
                        "jitter magnitude must be in [0, {MAX_JITTER}], got {magnitude}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Per-subject rendering parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SubjectProfile {
    pub subject_id: u32,
    pub height_scale: f64,
    pub camera_offset: Vec3,
    pub noise_sd: f64,
    pub seed: u64,
}

impl SubjectProfile {
    /// A profile that reproduces the template trajectory exactly.
    pub fn identity(subject_id: u32) -> SubjectProfile {
        SubjectProfile {
            subject_id,
            height_scale: 1.0,
            camera_offset: [0.0, 0.0, 0.0],
            noise_sd: 0.0,
            seed: 0,
        }
    }

    fn validate(&self) -> Result<(), GenError> {
        if !(self.height_scale > 0.0) {
            return Err(GenError::BadProfile(format!(
                "height_scale must be > 0, got {}",
                self.height_scale
            )));
        }
        if !(self.noise_sd >= 0.0) {
            return Err(GenError::BadProfile(format!(
                "noise_sd must be >= 0, got {}",
                self.noise_sd
            )));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Pose construction

const HIP_HALF_WIDTH: f64 = 0.11;
const HIP_DROP: f64 = 0.06;
const SPINE_UP: f64 = 0.26;
const SHOULDER_CENTER_UP: f64 = 0.50;
const HEAD_UP: f64 = 0.72;
const SHOULDER_HALF: f64 = 0.19;
const SHOULDER_DROP: f64 = 0.03;
const UPPER_ARM: f64 = 0.28;
const FOREARM: f64 = 0.25;
const HAND: f64 = 0.09;
const THIGH: f64 = 0.42;
const SHIN: f64 = 0.40;
const STAND_PELVIS: f64 = 0.98;
const SIT_PELVIS: f64 = 0.52;

/// Arm directions in the torso frame, unnormalized; the builder
/// normalizes. `upper` points shoulder->elbow, `fore` elbow->wrist.
#[derive(Debug, Clone, Copy)]
struct ArmSpec {
    upper: Vec3,
    fore: Vec3,
}

#[derive(Debug, Clone, Copy)]
struct PoseSpec {
    pelvis_height: f64,
    /// Forward lean of the whole upper body, radians.
    torso_pitch: f64,
    /// Thigh rotation forward from straight down, radians.
    hip_flex: f64,
    /// Knee flexion relative to the thigh, radians.
    knee_bend: f64,
    arm_left: ArmSpec,
    arm_right: ArmSpec,
}

fn normalize(v: Vec3) -> Vec3 {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

fn pitch_forward(p: Vec3, theta: f64) -> Vec3 {
    let (s, c) = theta.sin_cos();
    [p[0], p[1] * c - p[2] * s, p[1] * s + p[2] * c]
}

fn add(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

fn scaled(v: Vec3, s: f64) -> Vec3 {
    [v[0] * s, v[1] * s, v[2] * s]
}

fn build_pose(spec: &PoseSpec) -> Frame {
    let mut f = Frame::zero();
    let mut set = |j: JointId, p: Vec3| f.positions[j.index()] = p;
    let hip_center = [0.0, spec.pelvis_height, 0.0];
    let pitch = |v: Vec3| pitch_forward(v, spec.torso_pitch);

    set(JointId::HipCenter, hip_center);
    set(JointId::Spine, add(hip_center, pitch([0.0, SPINE_UP, 0.0])));
    set(
        JointId::ShoulderCenter,
        add(hip_center, pitch([0.0, SHOULDER_CENTER_UP, 0.0])),
    );
    set(JointId::Head, add(hip_center, pitch([0.0, HEAD_UP, 0.0])));

    for (side, arm, shoulder_j, elbow_j, wrist_j, hand_j) in [
        (
            -1.0,
            &spec.arm_left,
            JointId::ShoulderLeft,
            JointId::ElbowLeft,
            JointId::WristLeft,
            JointId::HandLeft,
        ),
        (
            1.0,
            &spec.arm_right,
            JointId::ShoulderRight,
            JointId::ElbowRight,
            JointId::WristRight,
            JointId::HandRight,
        ),
    ] {
        let shoulder = add(
            hip_center,
            pitch([side * SHOULDER_HALF, SHOULDER_CENTER_UP - SHOULDER_DROP, 0.0]),
        );
        let upper = pitch(normalize(arm.upper));
        let fore = pitch(normalize(arm.fore));
        let elbow = add(shoulder, scaled(upper, UPPER_ARM));
        let wrist = add(elbow, scaled(fore, FOREARM));
        let hand = add(wrist, scaled(fore, HAND));
        set(shoulder_j, shoulder);
        set(elbow_j, elbow);
        set(wrist_j, wrist);
        set(hand_j, hand);
    }

    for (side, hip_j, knee_j, ankle_j, foot_j) in [
        (
            -1.0,
            JointId::HipLeft,
            JointId::KneeLeft,
            JointId::AnkleLeft,
            JointId::FootLeft,
        ),
        (
            1.0,
            JointId::HipRight,
            JointId::KneeRight,
            JointId::AnkleRight,
            JointId::FootRight,
        ),
    ] {
        let hip = add(hip_center, [side * HIP_HALF_WIDTH, -HIP_DROP, 0.0]);
        // thigh rotates forward by hip_flex; shin un-rotates by knee_bend
        let thigh_dir = [0.0, -spec.hip_flex.cos(), spec.hip_flex.sin()];
        let shin_angle = spec.hip_flex - spec.knee_bend;
        let shin_dir = [0.0, -shin_angle.cos(), shin_angle.sin()];
        let knee = add(hip, scaled(thigh_dir, THIGH));
        let ankle = add(knee, scaled(shin_dir, SHIN));
        let foot = add(ankle, [0.0, -0.04, 0.13]);
        set(hip_j, hip);
        set(knee_j, knee);
        set(ankle_j, ankle);
        set(foot_j, foot);
    }
    f
}

fn arms_down() -> (ArmSpec, ArmSpec) {
    let left = ArmSpec {
        upper: [-0.14, -0.99, 0.02],
        fore: [-0.10, -0.99, 0.12],
    };
    let right = ArmSpec {
        upper: [0.14, -0.99, 0.02],
        fore: [0.10, -0.99, 0.12],
    };
    (left, right)
}

fn arms_front() -> (ArmSpec, ArmSpec) {
    let left = ArmSpec {
        upper: [-0.08, -0.12, 0.99],
        fore: [-0.08, 0.05, 0.99],
    };
    let right = ArmSpec {
        upper: [0.08, -0.12, 0.99],
        fore: [0.08, 0.05, 0.99],
    };
    (left, right)
}

fn arms_back() -> (ArmSpec, ArmSpec) {
    let left = ArmSpec {
        upper: [-0.16, -0.50, -0.85],
        fore: [-0.14, -0.35, -0.92],
    };
    let right = ArmSpec {
        upper: [0.16, -0.50, -0.85],
        fore: [0.14, -0.35, -0.92],
    };
    (left, right)
}

fn arms_up() -> (ArmSpec, ArmSpec) {
    let left = ArmSpec {
        upper: [-0.13, 0.99, 0.06],
        fore: [-0.03, 0.99, -0.02],
    };
    let right = ArmSpec {
        upper: [0.13, 0.99, 0.06],
        fore: [0.03, 0.99, -0.02],
    };
    (left, right)
}

fn arms_out() -> (ArmSpec, ArmSpec) {
    let left = ArmSpec {
        upper: [-0.99, 0.05, 0.03],
        fore: [-0.99, 0.14, 0.05],
    };
    let right = ArmSpec {
        upper: [0.99, 0.05, 0.03],
        fore: [0.99, 0.14, 0.05],
    };
    (left, right)
}

fn arms_flexed() -> (ArmSpec, ArmSpec) {
    let left = ArmSpec {
        upper: [-0.99, 0.02, 0.05],
        fore: [-0.12, 0.99, 0.08],
    };
    let right = ArmSpec {
        upper: [0.99, 0.02, 0.05],
        fore: [0.12, 0.99, 0.08],
    };
    (left, right)
}

fn standing(pitch: f64, arms: (ArmSpec, ArmSpec)) -> Frame {
    build_pose(&PoseSpec {
        pelvis_height: STAND_PELVIS,
        torso_pitch: pitch,
        hip_flex: 0.0,
        knee_bend: 0.08,
        arm_left: arms.0,
        arm_right: arms.1,
    })
}

fn sitting(pitch: f64, arms: (ArmSpec, ArmSpec)) -> Frame {
    build_pose(&PoseSpec {
        pelvis_height: SIT_PELVIS,
        torso_pitch: pitch,
        hip_flex: 1.35,
        knee_bend: 1.35,
        arm_left: arms.0,
        arm_right: arms.1,
    })
}

fn keyframe(phase_time: f64, pose: Frame) -> Keyframe {
    Keyframe { phase_time, pose }
}

/// Hand-authored template for one of the five exercises. Names are
/// matched case-insensitively.
pub fn builtin_template(exercise: &str) -> Result<MotionTemplate, GenError> {
    let canonical = EXERCISE_NAMES
        .iter()
        .find(|n| n.eq_ignore_ascii_case(exercise))
        .ok_or_else(|| GenError::UnknownExercise(exercise.to_string()))?;

    let keyframes = match *canonical {
        // seated arms-front, arms swung behind, explosive stand arms up
        "Blast-Off" => vec![
            keyframe(0.0, sitting(0.12, arms_front())),
            keyframe(0.5, sitting(0.22, arms_back())),
            keyframe(1.0, standing(0.0, arms_up())),
        ],
        "Body-Builder" => vec![
            keyframe(0.0, standing(0.0, arms_down())),
            keyframe(0.35, standing(0.0, arms_out())),
            keyframe(0.7, standing(0.0, arms_flexed())),
            keyframe(1.0, standing(0.0, arms_down())),
        ],
        "Finish-Line" => vec![
            keyframe(0.0, standing(0.05, arms_down())),
            keyframe(0.5, standing(0.3, arms_back())),
            keyframe(1.0, standing(-0.05, arms_up())),
        ],
        "Reach-For-The-Stars" => {
            let reach_left = (arms_up().0, arms_down().1);
            let reach_right = (arms_down().0, arms_up().1);
            vec![
                keyframe(0.0, standing(0.0, arms_down())),
                keyframe(0.33, standing(0.0, reach_left)),
                keyframe(0.66, standing(0.0, reach_right)),
                keyframe(1.0, standing(0.0, arms_down())),
            ]
        }
        "Take-A-Bow" => vec![
            keyframe(0.0, standing(0.0, arms_down())),
            keyframe(0.5, standing(0.9, arms_down())),
            keyframe(1.0, standing(0.0, arms_down())),
        ],
        _ => unreachable!(),
    };
    let template = MotionTemplate {
        exercise: canonical.to_string(),
        keyframes,
    };
    template.validate().expect("builtin templates are valid");
    Ok(template)
}

// ---------------------------------------------------------------------------
// Sample generation

/// Monotone time warp: a rush/drag bias plus a smaller sinusoidal wobble,
/// both vanishing at the endpoints so the repetition still starts and
/// ends on time.
///
/// The displacement is `1.5 m t(1-t) (bias + 0.6 sin(2 pi t + phase))`
/// with bias +/-1; its slope is bounded by `3.82 m`, so the warp stays
/// strictly increasing for every magnitude up to [`MAX_JITTER`].
fn smooth_time_warp(t: f64, magnitude: f64, bias: f64, phase: f64) -> f64 {
    let wobble = bias + 0.6 * (std::f64::consts::TAU * t + phase).sin();
    t + 1.5 * magnitude * t * (1.0 - t) * wobble
}

/// Renders one sample from a template: error-adjusted keyframes, warped
/// sampling times, stature scaling about foot level, restriction of arm
/// reach, sensor noise, and camera offset, in that order.
pub fn generate_sample(
    template: &MotionTemplate,
    profile: &SubjectProfile,
    errors: &[ErrorSpec],
    n_frames: usize,
) -> Result<SkeletonSample, GenError> {
    template.validate()?;
    profile.validate()?;
    if n_frames < 2 {
        return Err(GenError::TooFewFrames(n_frames));
    }
    for e in errors {
        e.validate(template.keyframes.len())?;
    }

    // keyframe-level errors
    let mut effective = template.clone();
    for e in errors {
        if let ErrorSpec::IncompletePhase {
            phase_index,
            completion,
        } = e
        {
            let prev = effective.keyframes[phase_index - 1].pose.clone();
            let target = &mut effective.keyframes[*phase_index].pose;
            for j in 0..target.positions.len() {
                for axis in 0..3 {
                    target.positions[j][axis] = prev.positions[j][axis]
                        + completion * (target.positions[j][axis] - prev.positions[j][axis]);
                }
            }
        }
    }

    // time warps, each with a seeded direction and phase
    let mut warps: Vec<(f64, f64, f64)> = Vec::new();
    let mut jitter_rng = rng::seeded(derive_seed(profile.seed, &[1]));
    for e in errors {
        if let ErrorSpec::TempoJitter { magnitude } = e {
            let bias = if jitter_rng.gen::<bool>() { 1.0 } else { -1.0 };
            let phase = jitter_rng.gen::<f64>() * std::f64::consts::TAU;
            warps.push((*magnitude, bias, phase));
        }
    }

    let mut frames: Vec<Frame> = (0..n_frames)
        .map(|k| {
            let mut t = k as f64 / (n_frames - 1) as f64;
            for &(magnitude, bias, phase) in &warps {
                t = smooth_time_warp(t, magnitude, bias, phase);
            }
            effective.pose_at(t)
        })
        .collect();

    // stature: uniform scale about the foot level of the first frame
    if profile.height_scale != 1.0 {
        let anchor_y = frames[0]
            .position(JointId::FootLeft)[1]
            .min(frames[0].position(JointId::FootRight)[1]);
        let s = profile.height_scale;
        for frame in &mut frames {
            for pos in &mut frame.positions {
                pos[0] *= s;
                pos[1] = anchor_y + s * (pos[1] - anchor_y);
                pos[2] *= s;
            }
        }
    }

    // restricted arm extension: wrist pulled toward the shoulder, hand
    // following by the same displacement
    for e in errors {
        if let ErrorSpec::RestrictedExtension { limb, factor } = e {
            let sides: &[(JointId, JointId, JointId)] = match limb {
                Limb::ArmLeft => &[(JointId::ShoulderLeft, JointId::WristLeft, JointId::HandLeft)],
                Limb::ArmRight => {
                    &[(JointId::ShoulderRight, JointId::WristRight, JointId::HandRight)]
                }
                Limb::Both => &[
                    (JointId::ShoulderLeft, JointId::WristLeft, JointId::HandLeft),
                    (JointId::ShoulderRight, JointId::WristRight, JointId::HandRight),
                ],
            };
            for frame in &mut frames {
                for &(shoulder_j, wrist_j, hand_j) in sides {
                    let shoulder = frame.position(shoulder_j);
                    let wrist = frame.position(wrist_j);
                    let new_wrist = [
                        shoulder[0] + factor * (wrist[0] - shoulder[0]),
                        shoulder[1] + factor * (wrist[1] - shoulder[1]),
                        shoulder[2] + factor * (wrist[2] - shoulder[2]),
                    ];
                    let delta = [
                        new_wrist[0] - wrist[0],
                        new_wrist[1] - wrist[1],
                        new_wrist[2] - wrist[2],
                    ];
                    frame.positions[wrist_j.index()] = new_wrist;
                    let hand = &mut frame.positions[hand_j.index()];
                    hand[0] += delta[0];
                    hand[1] += delta[1];
                    hand[2] += delta[2];
                }
            }
        }
    }

    if profile.noise_sd > 0.0 {
        let mut noise_rng = rng::seeded(derive_seed(profile.seed, &[0]));
        for frame in &mut frames {
            for pos in &mut frame.positions {
                for axis in 0..3 {
                    let n: f64 = StandardNormal.sample(&mut noise_rng);
                    pos[axis] += profile.noise_sd * n;
                }
            }
        }
    }

    if profile.camera_offset != [0.0, 0.0, 0.0] {
        for frame in &mut frames {
            for pos in &mut frame.positions {
                for axis in 0..3 {
                    pos[axis] += profile.camera_offset[axis];
                }
            }
        }
    }

    Ok(SkeletonSample {
        subject_id: profile.subject_id,
        exercise: template.exercise.clone(),
        label: if errors.is_empty() { Label::Good } else { Label::Bad },
        frames,
    })
}

/// Requested (positive, negative) sample counts for one subject.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SubjectCounts {
    pub positives: usize,
    pub negatives: usize,
}

/// Documented parameter ranges for generated subjects and errors.
pub mod ranges {
    pub const HEIGHT_SCALE: (f64, f64) = (0.85, 1.3);
    pub const CAMERA_X: (f64, f64) = (-0.6, 0.6);
    pub const CAMERA_Y: (f64, f64) = (-0.15, 0.15);
    pub const CAMERA_Z: (f64, f64) = (-0.5, 0.5);
    pub const NOISE_SD: (f64, f64) = (0.0015, 0.005);
    pub const RESTRICTION_FACTOR: (f64, f64) = (0.4, 0.8);
    pub const COMPLETION: (f64, f64) = (0.3, 0.7);
    pub const JITTER: (f64, f64) = (0.05, 0.2);
    pub const RAW_FRAMES: (usize, usize) = (90, 240);
}

fn uniform_in(rng: &mut rng::ChaCha8Rng, range: (f64, f64)) -> f64 {
    range.0 + (range.1 - range.0) * rng.gen::<f64>()
}

/// Draws a subject profile from the documented ranges; the per-sample seed
/// is filled in later.
fn draw_profile(subject_idx: usize, base_seed: u64) -> SubjectProfile {
    let mut rng = rng::seeded(derive_seed(base_seed, &[subject_idx as u64, 100]));
    SubjectProfile {
        subject_id: subject_idx as u32 + 1,
        height_scale: uniform_in(&mut rng, ranges::HEIGHT_SCALE),
        camera_offset: [
            uniform_in(&mut rng, ranges::CAMERA_X),
            uniform_in(&mut rng, ranges::CAMERA_Y),
            uniform_in(&mut rng, ranges::CAMERA_Z),
        ],
        noise_sd: uniform_in(&mut rng, ranges::NOISE_SD),
        seed: 0,
    }
}

fn draw_error(rng: &mut rng::ChaCha8Rng, n_keyframes: usize) -> ErrorSpec {
    match rng.gen_range(0..3u32) {
        0 => ErrorSpec::RestrictedExtension {
            limb: match rng.gen_range(0..3u32) {
                0 => Limb::ArmLeft,
                1 => Limb::ArmRight,
                _ => Limb::Both,
            },
            factor: uniform_in(rng, ranges::RESTRICTION_FACTOR),
        },
        1 => ErrorSpec::IncompletePhase {
            phase_index: rng.gen_range(1..n_keyframes),
            completion: uniform_in(rng, ranges::COMPLETION),
        },
        _ => ErrorSpec::TempoJitter {
            magnitude: uniform_in(rng, ranges::JITTER),
        },
    }
}

/// Generates a full labeled dataset: positives first, then negatives, per
/// subject in order. Raw frame counts vary per sample.
pub fn generate_dataset(
    template: &MotionTemplate,
    counts: &[SubjectCounts],
    base_seed: u64,
) -> Result<Dataset, GenError> {
    template.validate()?;
    if counts.is_empty() || counts.iter().any(|c| c.positives == 0 || c.negatives == 0) {
        return Err(GenError::BadCounts);
    }

    let mut samples = Vec::new();
    for (si, count) in counts.iter().enumerate() {
        let profile = draw_profile(si, base_seed);
        for (kind, total) in [(0u64, count.positives), (1, count.negatives)] {
            for j in 0..total {
                let path = [si as u64, kind, j as u64];
                let mut sample_rng = rng::seeded(derive_seed(base_seed, &path));
                let n_frames = sample_rng.gen_range(ranges::RAW_FRAMES.0..=ranges::RAW_FRAMES.1);
                let errors = if kind == 0 {
                    Vec::new()
                } else {
                    vec![draw_error(&mut sample_rng, template.keyframes.len())]
                };
                let sample_profile = SubjectProfile {
                    seed: derive_seed(base_seed, &[si as u64, kind, j as u64, 7]),
                    ..profile.clone()
                };
                samples.push(generate_sample(template, &sample_profile, &errors, n_frames)?);
            }
        }
    }
    Ok(Dataset::new(
        samples,
        format!("generated:{}:seed={base_seed}", template.exercise),
    ))
}

/// The per-subject counts of the reference Blast-Off collection
/// (63 positives, 62 negatives over five subjects).
pub fn reference_counts() -> Vec<SubjectCounts> {
    [(11, 10), (13, 13), (10, 10), (14, 14), (15, 15)]
        .iter()
        .map(|&(positives, negatives)| SubjectCounts {
            positives,
            negatives,
        })
        .collect()
}

/// Largest clean-pose elbow extension angle over a sample, in radians.
/// Used to verify that restriction errors actually reduce extension.
pub fn max_elbow_angle(sample: &SkeletonSample, left: bool) -> f64 {
    let (s, e, w) = if left {
        (JointId::ShoulderLeft, JointId::ElbowLeft, JointId::WristLeft)
    } else {
        (JointId::ShoulderRight, JointId::ElbowRight, JointId::WristRight)
    };
    sample
        .frames
        .iter()
        .filter_map(|f| angle_between(f.position(s), f.position(e), f.position(w)))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::compute_angles;
    use crate::preprocess::{preprocess_pipeline, PreprocessConfig};
    use crate::skeleton::validate_sample;

    #[test]
    fn blast_off_has_three_phases_at_expected_times() {
        let t = builtin_template("Blast-Off").unwrap();
        assert_eq!(t.keyframes.len(), 3);
        let times: Vec<f64> = t.keyframes.iter().map(|k| k.phase_time).collect();
        assert_eq!(times, vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn blast_off_final_pose_has_wrists_above_head() {
        let t = builtin_template("blast-off").unwrap();
        let last = &t.keyframes.last().unwrap().pose;
        let head_y = last.position(JointId::Head)[1];
        assert!(last.position(JointId::WristLeft)[1] > head_y);
        assert!(last.position(JointId::WristRight)[1] > head_y);
    }

    #[test]
    fn unknown_exercise_is_rejected() {
        assert!(matches!(
            builtin_template("jumping"),
            Err(GenError::UnknownExercise(_))
        ));
    }

    #[test]
    fn all_five_templates_build_and_validate() {
        for name in EXERCISE_NAMES {
            let t = builtin_template(name).unwrap();
            t.validate().unwrap();
            assert!(t.keyframes.len() >= 2);
        }
    }

    #[test]
    fn identity_profile_reproduces_template_exactly() {
        let t = builtin_template("Blast-Off").unwrap();
        let profile = SubjectProfile::identity(1);
        let sample = generate_sample(&t, &profile, &[], 97).unwrap();
        assert_eq!(sample.label, Label::Good);
        for (k, frame) in sample.frames.iter().enumerate() {
            let expected = t.pose_at(k as f64 / 96.0);
            for (a, b) in frame.positions.iter().zip(&expected.positions) {
                for axis in 0..3 {
                    assert!((a[axis] - b[axis]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let t = builtin_template("Blast-Off").unwrap();
        let profile = SubjectProfile {
            subject_id: 2,
            height_scale: 1.1,
            camera_offset: [0.3, 0.0, -0.2],
            noise_sd: 0.01,
            seed: 1234,
        };
        let errors = vec![ErrorSpec::TempoJitter { magnitude: 0.1 }];
        let a = generate_sample(&t, &profile, &errors, 120).unwrap();
        let b = generate_sample(&t, &profile, &errors, 120).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn restriction_lowers_wrist_during_extension() {
        let t = builtin_template("Blast-Off").unwrap();
        let profile = SubjectProfile {
            subject_id: 1,
            height_scale: 1.05,
            camera_offset: [0.1, -0.02, 0.2],
            noise_sd: 0.005,
            seed: 77,
        };
        let clean = generate_sample(&t, &profile, &[], 160).unwrap();
        let errors = vec![ErrorSpec::RestrictedExtension {
            limb: Limb::Both,
            factor: 0.6,
        }];
        let bad = generate_sample(&t, &profile, &errors, 160).unwrap();
        assert_eq!(bad.label, Label::Bad);

        let mut checked = 0;
        for (cf, bf) in clean.frames.iter().zip(&bad.frames) {
            let c_rise = cf.position(JointId::WristRight)[1] - cf.position(JointId::ShoulderRight)[1];
            let b_rise = bf.position(JointId::WristRight)[1] - bf.position(JointId::ShoulderRight)[1];
            // wherever the clean arm reaches clearly above the shoulder,
            // the restricted twin reaches strictly less
            if c_rise > 0.05 {
                assert!(b_rise < c_rise, "clean {c_rise} vs restricted {b_rise}");
                checked += 1;
            }
        }
        assert!(checked > 20, "extension window too small ({checked} frames)");
    }

    #[test]
    fn restriction_strictly_reduces_max_elbow_angle() {
        let t = builtin_template("Blast-Off").unwrap();
        for factor in [0.4, 0.6, 0.8] {
            let profile = SubjectProfile {
                subject_id: 1,
                height_scale: 0.95,
                camera_offset: [0.0, 0.0, 0.0],
                noise_sd: 0.002,
                seed: 31,
            };
            let clean = generate_sample(&t, &profile, &[], 160).unwrap();
            let bad = generate_sample(
                &t,
                &profile,
                &[ErrorSpec::RestrictedExtension {
                    limb: Limb::Both,
                    factor,
                }],
                160,
            )
            .unwrap();
            for left in [true, false] {
                let clean_max = max_elbow_angle(&clean, left);
                let bad_max = max_elbow_angle(&bad, left);
                assert!(
                    bad_max < clean_max,
                    "factor {factor}: {bad_max} !< {clean_max}"
                );
            }
        }
    }

    #[test]
    fn incomplete_phase_keeps_final_pose_short_of_target() {
        let t = builtin_template("Blast-Off").unwrap();
        let profile = SubjectProfile::identity(1);
        let clean = generate_sample(&t, &profile, &[], 160).unwrap();
        let bad = generate_sample(
            &t,
            &profile,
            &[ErrorSpec::IncompletePhase {
                phase_index: 2,
                completion: 0.5,
            }],
            160,
        )
        .unwrap();
        // the final frame should not rise as high as the clean standing pose
        let clean_head = clean.frames.last().unwrap().position(JointId::Head)[1];
        let bad_head = bad.frames.last().unwrap().position(JointId::Head)[1];
        assert!(bad_head < clean_head - 0.05);
    }

    #[test]
    fn tempo_jitter_preserves_frame_validity_and_endpoints() {
        let t = builtin_template("Blast-Off").unwrap();
        let profile = SubjectProfile {
            seed: 5,
            ..SubjectProfile::identity(1)
        };
        let bad = generate_sample(
            &t,
            &profile,
            &[ErrorSpec::TempoJitter { magnitude: 0.2 }],
            160,
        )
        .unwrap();
        assert!(validate_sample(&bad).is_ok());
        // warp fixes t=0 and t=1
        let clean = generate_sample(&t, &profile, &[], 160).unwrap();
        assert_eq!(bad.frames[0], clean.frames[0]);
        assert_eq!(bad.frames[159], clean.frames[159]);
    }

    #[test]
    fn reference_dataset_counts_and_labels() {
        let t = builtin_template("Blast-Off").unwrap();
        let ds = generate_dataset(&t, &reference_counts(), 42).unwrap();
        assert_eq!(ds.len(), 125);
        let pos = ds.samples.iter().filter(|s| s.label == Label::Good).count();
        let neg = ds.samples.iter().filter(|s| s.label == Label::Bad).count();
        assert_eq!(pos, 63);
        assert_eq!(neg, 62);
        assert_eq!(
            ds.counts_by_subject(),
            vec![(1, 11, 10), (2, 13, 13), (3, 10, 10), (4, 14, 14), (5, 15, 15)]
        );
        for s in &ds.samples {
            assert!(validate_sample(s).is_ok());
            assert!(s.num_frames() >= 90 && s.num_frames() <= 240);
        }
        assert!(!ds.preprocessed);
    }

    #[test]
    fn dataset_regeneration_is_bit_identical() {
        let t = builtin_template("Blast-Off").unwrap();
        let a = generate_dataset(&t, &reference_counts(), 7).unwrap();
        let b = generate_dataset(&t, &reference_counts(), 7).unwrap();
        assert_eq!(a, b);
        let c = generate_dataset(&t, &reference_counts(), 8).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn clean_samples_survive_preprocess_and_angles() {
        let cfg = PreprocessConfig::default();
        for name in EXERCISE_NAMES {
            let t = builtin_template(name).unwrap();
            let sample = generate_sample(&t, &SubjectProfile::identity(1), &[], 120).unwrap();
            let prep = preprocess_pipeline(&sample, &cfg).unwrap();
            compute_angles(&prep, 0, 160).unwrap();
        }
    }
}
