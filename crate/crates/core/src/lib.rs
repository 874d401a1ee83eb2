//! Classifies 20-joint skeleton recordings of exercise repetitions as
//! "good" or "bad".
//!
//! The crate is organized as a pipeline:
//!
//! 1. [`skeleton`] — sample/dataset types and JSONL/CSV ingestion
//! 2. [`preprocess`] — resampling to a fixed length, height normalization,
//!    hip-center-relative coordinates
//! 3. [`features`] — four representations: joint positions and joint angles,
//!    each in the time domain and as per-channel DCT coefficients
//! 4. [`classifiers`] — linear SVM, one-class hypersphere (SVDD), AdaBoost
//!    over decision stumps, DTW template matching, and feedforward nets,
//!    all sharing one signed-score decision contract
//! 5. [`eval`] — subject-holdout and repeated random-split protocols,
//!    confusion metrics, and ROC curves
//! 6. [`syndata`] — a deterministic keyframe-based motion generator that
//!    produces labeled good/bad repetitions for benchmarking
//!
//! All randomness flows through seeded ChaCha8 generators, so every
//! training run, split, and generated dataset is bit-reproducible.

pub mod classifiers;
pub mod eval;
pub mod features;
pub mod preprocess;
pub mod rng;
pub mod skeleton;
pub mod syndata;

pub use skeleton::{Dataset, Frame, JointId, Label, SkeletonSample};
