//! Depth modality: projective correspondence-point search, the point-to-plane
//! probability derivatives, and depth-based occlusion rejection.
//!
//! A surface point is projected into the depth image; candidates on a
//! quadratic grid (stride and radius converted from meters to pixels at the
//! predicted depth) are reconstructed and the 3D-closest one within the
//! correspondence threshold becomes the measurement. The measurement stays in
//! the depth-camera frame so derivative evaluation can re-express it in the
//! model frame at the current pose.

use crate::geometry::{CameraIntrinsics, Mat6, PoseSE3, Vec3, Vec6};
use crate::image::DepthImage;
use crate::viewpoint::SurfacePoint;

/// A matched surface point / depth measurement pair.
#[derive(Debug, Clone)]
pub struct CorrespondencePoint {
    /// Model surface point X, model frame.
    pub model_point: Vec3,
    /// Unit surface normal N, model frame.
    pub model_normal: Vec3,
    /// Measured point P in the depth-camera frame.
    pub measured_depth_frame: Vec3,
    /// Depth d_Z of the measurement (meters, depth-camera frame).
    pub depth: f64,
}

impl CorrespondencePoint {
    /// Measurement expressed in the model frame for a given pose.
    pub fn measured_in_model(&self, model_from_depth: &PoseSE3) -> Vec3 {
        model_from_depth.transform_point(&self.measured_depth_frame)
    }
}

/// Occlusion-check parameters.
#[derive(Debug, Clone, Copy)]
pub struct OcclusionConfig {
    /// Side length of the quadratic sampling region, meters.
    pub region_extent: f64,
    /// Samples per axis (gives samples^2 depth values).
    pub samples_per_axis: u32,
    /// Tolerance subtracted before comparing against the window minimum.
    pub threshold: f64,
}

impl Default for OcclusionConfig {
    fn default() -> Self {
        Self { region_extent: 0.020, samples_per_axis: 5, threshold: 0.030 }
    }
}

/// Searches the depth image for the measurement closest to the predicted
/// surface point.
///
/// `radius` is the correspondence threshold r_t (meters); `stride` is the
/// grid spacing (meters). Both are converted to pixels at the predicted
/// depth. Returns `None` when the projection leaves the image, the window
/// holds no valid depth, or the best candidate is farther than `radius`.
pub fn find_correspondence(
    depth: &DepthImage,
    sp: &SurfacePoint,
    depth_from_model: &PoseSE3,
    intr: &CameraIntrinsics,
    radius: f64,
    stride: f64,
) -> Option<CorrespondencePoint> {
    let predicted = depth_from_model.transform_point(&sp.point);
    if predicted.z <= 0.0 {
        return None;
    }
    let pixel = intr.project(&predicted).ok()?;
    if !intr.contains(&pixel) {
        return None;
    }

    let px_per_m = intr.focal_mean() / predicted.z;
    let stride_px = (stride * px_per_m).round().max(1.0);
    let radius_px = radius * px_per_m;
    let steps = (radius_px / stride_px).floor() as i64;

    let mut best_dist_sq = f64::INFINITY;
    let mut best: Option<Vec3> = None;
    for j in -steps..=steps {
        let y = (pixel.y + j as f64 * stride_px).floor() as i64;
        if y < 0 || y >= depth.height as i64 {
            continue;
        }
        for i in -steps..=steps {
            let x = (pixel.x + i as f64 * stride_px).floor() as i64;
            if x < 0 || x >= depth.width as i64 {
                continue;
            }
            let Some(z) = depth.depth_m(x as u32, y as u32) else { continue };
            // |dz| lower-bounds the 3D distance; skip hopeless candidates.
            let dz = z - predicted.z;
            if dz * dz >= best_dist_sq {
                continue;
            }
            let candidate = Vec3::new(
                (x as f64 + 0.5 - intr.px) / intr.fx * z,
                (y as f64 + 0.5 - intr.py) / intr.fy * z,
                z,
            );
            let dist_sq = (candidate - predicted).norm_squared();
            if dist_sq < best_dist_sq {
                best_dist_sq = dist_sq;
                best = Some(candidate);
            }
        }
    }

    let measured = best?;
    if best_dist_sq.sqrt() > radius {
        return None;
    }
    Some(CorrespondencePoint {
        model_point: sp.point,
        model_normal: sp.normal,
        measured_depth_frame: measured,
        depth: measured.z,
    })
}

/// Point-to-plane gradient and Hessian for one correspondence.
///
/// `sigma_d` is in millimeters; the effective standard deviation scales with
/// the measured depth (`sigma_eff = d_Z * sigma_d / 1000` meters). With
/// `J = [P x N; N]` in the model frame the log-probability is exactly
/// quadratic in theta, so gradient and Hessian are exact.
pub fn depth_grad_hess(
    cp: &CorrespondencePoint,
    model_from_depth: &PoseSE3,
    sigma_d: f64,
) -> (Vec6, Mat6) {
    let p = cp.measured_in_model(model_from_depth);
    let n = &cp.model_normal;
    let sigma_eff = cp.depth * sigma_d * 1e-3;
    let weight = 1.0 / (sigma_eff * sigma_eff);
    let residual = n.dot(&(cp.model_point - p));
    let pxn = p.cross(n);
    let jac = Vec6::new(pxn.x, pxn.y, pxn.z, n.x, n.y, n.z);
    let g = jac * (-weight * residual);
    let h = (jac * jac.transpose()) * (-weight);
    (g, h)
}

/// Depth-based occlusion test for a 3D point in the depth-camera frame.
///
/// Samples `n x n` depth values over a square window whose metric side is
/// `cfg.region_extent` at the point's depth and reports occlusion when
/// `point depth - occlusion_offset - threshold` exceeds the measured minimum.
/// Missing measurements never cause rejection: an all-invalid window reports
/// "not occluded".
pub fn is_occluded(
    depth: &DepthImage,
    point_depth_frame: &Vec3,
    occlusion_offset: f64,
    intr: &CameraIntrinsics,
    cfg: &OcclusionConfig,
) -> bool {
    let d = point_depth_frame.z;
    debug_assert!(d > 0.0);
    let Ok(pixel) = intr.project(point_depth_frame) else { return false };

    let extent_px = cfg.region_extent * intr.focal_mean() / d;
    let n = cfg.samples_per_axis.max(2);
    let mut min_depth = f64::INFINITY;
    for j in 0..n {
        let fy = j as f64 / (n - 1) as f64 - 0.5;
        let y = (pixel.y + fy * extent_px).floor() as i64;
        if y < 0 || y >= depth.height as i64 {
            continue;
        }
        for i in 0..n {
            let fx = i as f64 / (n - 1) as f64 - 0.5;
            let x = (pixel.x + fx * extent_px).floor() as i64;
            if x < 0 || x >= depth.width as i64 {
                continue;
            }
            if let Some(z) = depth.depth_m(x as u32, y as u32) {
                min_depth = min_depth.min(z);
            }
        }
    }
    if !min_depth.is_finite() {
        return false;
    }
    d - occlusion_offset - cfg.threshold > min_depth
}
