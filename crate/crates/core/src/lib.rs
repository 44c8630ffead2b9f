//! Quantifying the magnitude of AI editing applied to text.
//!
//! The crate covers the whole desk-scale pipeline: similarity metrics over
//! source/edited pairs, continuous edit-magnitude targets, bucket
//! discretization with weighted-average decoding, a hashed n-gram linear
//! scorer trained on those targets, binary/ternary threshold calibration,
//! and the evaluation statistics used to report results (confusion/F1,
//! Pearson correlation, Krippendorff's alpha with bootstrap SE, paired
//! differences, trajectories).
//!
//! The numeric core is generic over the scalar type via [`scalar::Real`]
//! (`f32` or `f64`); the pipeline layers are fixed at `f64` through the
//! aliases below.

pub mod error;
pub mod scalar;

pub mod agreement;
pub mod calibration;
pub mod embedding;
pub mod evalmetrics;
pub mod labeler;
pub mod lexicon;
pub mod segmentation;
pub mod perturb;
pub mod simmetrics;

pub use error::{Error, Result};
pub use scalar::Real;

/// Scalar used by every pipeline-level structure.
pub type Scalar = f64;
/// Embedding vector at pipeline precision.
pub type Vector = embedding::EmbeddingVector<Scalar>;
/// Scale thresholds at pipeline precision.
pub type Scale = simmetrics::ScaleSpec<Scalar>;
/// Bucket discretization at pipeline precision.
pub type Buckets = simmetrics::BucketSpec<Scalar>;
