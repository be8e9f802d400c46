//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A 3D point with non-positive depth was projected or reconstructed.
    #[error("point behind camera: z = {0}")]
    BehindCamera(f64),

    /// Text-format parse failure with the offending line number.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// Binary-format failure (bad magic, truncated payload, version mismatch).
    #[error("format error: {0}")]
    Format(String),

    /// A mesh violated its invariants (empty, out-of-range indices).
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    /// Viewpoint-model generation could not produce a usable model.
    #[error("model generation failed: {0}")]
    ModelGeneration(String),

    /// Synthetic-sequence generation failed at a specific frame.
    #[error("scene generation failed at frame {frame}: {msg}")]
    SceneGeneration { frame: usize, msg: String },

    /// A parameter was outside its documented range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An operation that requires data received an empty input.
    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
