//! Textureless 6DoF object tracking that fuses region-based correspondence
//! lines with depth-based correspondence points in a regularized Newton
//! optimization, plus the synthetic-scene harness used to evaluate it.
//!
//! The crate is organized along the tracking pipeline:
//!
//! - [`geometry`]: SE(3) poses, pinhole projection, pose variations and the
//!   exponential-map update.
//! - [`mesh`]: triangle meshes, an OBJ subset loader, and shape generators.
//! - [`image`]: color/depth/silhouette buffers with PPM/PGM serialization.
//! - [`render`]: a deterministic software z-buffer rasterizer.
//! - [`viewpoint`]: the sparse viewpoint model (precomputed contour and
//!   surface points indexed by view direction).
//! - [`region`]: color histograms, correspondence lines in scale space, and
//!   their gradient/Hessian contributions.
//! - [`depth`]: projective correspondence-point search, point-to-plane
//!   derivatives, and depth-based occlusion rejection.
//! - [`tracker`]: gradient/Hessian assembly, regularized Newton steps, the
//!   per-frame iteration schedule, and the pose-refinement mode.
//! - [`metrics`]: pose-error metrics (ADD, ADD-S, AUC, RMS, success rate)
//!   and trajectory file IO.
//! - [`scene`]: deterministic synthetic RGB-D sequence generation.
//!
//! Data-parallel inner loops (view rendering, frame synthesis, per-line and
//! per-point evaluation) run on rayon when the default `parallel` feature is
//! enabled and fall back to sequential iteration otherwise; results are
//! bit-identical either way.

pub mod depth;
pub mod error;
pub mod geometry;
pub mod image;
pub mod mesh;
pub mod metrics;
mod par;
pub mod region;
pub mod render;
pub mod rng;
pub mod scene;
pub mod tracker;
pub mod viewpoint;

pub use error::Error;
pub use geometry::{CameraIntrinsics, PoseSE3, PoseVariation, Vec2, Vec3};

/// Convenience result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
