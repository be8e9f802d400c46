//! Pose-error metrics and trajectory files.
//!
//! Errors are computed from the relative transform between the estimated and
//! ground-truth model pose. ADD averages per-vertex displacements, ADD-S the
//! nearest-vertex displacements (tolerant to symmetry). Trajectory files are
//! ASCII with one line per frame: the frame index followed by the 16
//! row-major values of the 4x4 pose.

use std::io::{BufRead, Write};

use crate::error::Error;
use crate::geometry::{PoseSE3, Vec3};
use crate::Result;

/// Estimated or ground-truth poses indexed by frame.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PoseTrajectory {
    entries: Vec<(u64, PoseSE3)>,
}

impl PoseTrajectory {
    pub fn new() -> Self {
        Self { entries: Vec::new() }
    }

    /// Appends a pose; frame indices must be strictly increasing.
    pub fn push(&mut self, frame: u64, pose: PoseSE3) -> Result<()> {
        if let Some(&(last, _)) = self.entries.last() {
            if frame <= last {
                return Err(Error::InvalidParameter(format!(
                    "frame indices must increase: {frame} after {last}"
                )));
            }
        }
        self.entries.push((frame, pose));
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[(u64, PoseSE3)] {
        &self.entries
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<()> {
        for (frame, pose) in &self.entries {
            write!(w, "{frame}")?;
            for v in pose.to_matrix_rows() {
                write!(w, " {v}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn read_from<R: BufRead>(r: &mut R) -> Result<Self> {
        let mut traj = Self::new();
        for (idx, line) in r.lines().enumerate() {
            let line = line?;
            let line_no = idx + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let tokens: Vec<&str> = trimmed.split_whitespace().collect();
            if tokens.len() != 17 {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("expected 17 fields, got {}", tokens.len()),
                });
            }
            let frame: u64 = tokens[0].parse().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("bad frame index `{}`", tokens[0]),
            })?;
            let mut m = [0.0f64; 16];
            for (k, tok) in tokens[1..].iter().enumerate() {
                m[k] = tok.parse().map_err(|_| Error::Parse {
                    line: line_no,
                    msg: format!("bad matrix value `{tok}`"),
                })?;
            }
            let pose = PoseSE3::from_matrix_rows(&m)
                .map_err(|e| Error::Parse { line: line_no, msg: e.to_string() })?;
            traj.push(frame, pose)
                .map_err(|e| Error::Parse { line: line_no, msg: e.to_string() })?;
        }
        Ok(traj)
    }
}

/// Relative model pose `estimate^-1 * ground_truth`: maps ground-truth model
/// coordinates into the estimated model frame.
pub fn relative_pose(estimate: &PoseSE3, ground_truth: &PoseSE3) -> PoseSE3 {
    estimate.inverse().compose(ground_truth)
}

/// Mean vertex displacement under the relative pose.
pub fn add_error(vertices: &[Vec3], t_rel: &PoseSE3) -> f64 {
    assert!(!vertices.is_empty());
    let sum: f64 = vertices.iter().map(|v| (v - t_rel.transform_point(v)).norm()).sum();
    sum / vertices.len() as f64
}

/// Mean nearest-vertex displacement (symmetric variant), brute force.
pub fn adds_error(vertices: &[Vec3], t_rel: &PoseSE3) -> f64 {
    assert!(!vertices.is_empty());
    let transformed: Vec<Vec3> = vertices.iter().map(|v| t_rel.transform_point(v)).collect();
    let sum: f64 = vertices
        .iter()
        .map(|v| {
            transformed
                .iter()
                .map(|t| (v - t).norm_squared())
                .fold(f64::INFINITY, f64::min)
                .sqrt()
        })
        .sum();
    sum / vertices.len() as f64
}

/// Mean clamped linear score `max(1 - e/e_t, 0)` over the per-frame errors.
pub fn auc_score(errors: &[f64], e_t: f64) -> Result<f64> {
    if errors.is_empty() {
        return Err(Error::EmptyInput("auc_score needs at least one error".into()));
    }
    if e_t <= 0.0 {
        return Err(Error::InvalidParameter(format!("threshold must be positive, got {e_t}")));
    }
    let sum: f64 = errors.iter().map(|e| (1.0 - e / e_t).max(0.0)).sum();
    Ok(sum / errors.len() as f64)
}

/// AUC with the threshold tied to the model diameter (`e_t = 0.2 d`) and the
/// result scaled to [0, 20].
pub fn auc_score_scaled(errors: &[f64], diameter: f64) -> Result<f64> {
    Ok(20.0 * auc_score(errors, 0.2 * diameter)?)
}

/// Root-mean-square parameter errors: translations in millimeters, intrinsic
/// z-y'-x'' (yaw-pitch-roll) angles in degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RmsErrors {
    pub x_mm: f64,
    pub y_mm: f64,
    pub z_mm: f64,
    pub roll_deg: f64,
    pub pitch_deg: f64,
    pub yaw_deg: f64,
    /// Frames skipped because the ground-truth pitch was gimbal-adjacent.
    pub excluded_frames: usize,
}

/// Intrinsic z-y'-x'' Euler angles (yaw, pitch, roll) of a rotation matrix.
fn euler_zyx(pose: &PoseSE3) -> (f64, f64, f64) {
    let r = &pose.rotation;
    let pitch = (-r[(2, 0)]).clamp(-1.0, 1.0).asin();
    let yaw = r[(1, 0)].atan2(r[(0, 0)]);
    let roll = r[(2, 1)].atan2(r[(2, 2)]);
    (yaw, pitch, roll)
}

fn wrap_degrees(d: f64) -> f64 {
    let mut v = d % 360.0;
    if v > 180.0 {
        v -= 360.0;
    }
    if v <= -180.0 {
        v += 360.0;
    }
    v
}

/// RMS of per-frame parameter differences between estimate and ground truth.
///
/// Frames whose ground-truth pitch magnitude exceeds 89 degrees are excluded
/// (Euler decomposition is unstable there) and counted in the result.
pub fn rms_errors(estimate: &PoseTrajectory, ground_truth: &PoseTrajectory) -> Result<RmsErrors> {
    let pairs = paired(estimate, ground_truth)?;
    let mut sums = [0.0f64; 6];
    let mut used = 0usize;
    let mut excluded = 0usize;
    for (est, gt) in &pairs {
        let (gt_yaw, gt_pitch, gt_roll) = euler_zyx(gt);
        if gt_pitch.to_degrees().abs() > 89.0 {
            excluded += 1;
            continue;
        }
        let (est_yaw, est_pitch, est_roll) = euler_zyx(est);
        let dt = est.translation - gt.translation;
        sums[0] += (dt.x * 1000.0).powi(2);
        sums[1] += (dt.y * 1000.0).powi(2);
        sums[2] += (dt.z * 1000.0).powi(2);
        sums[3] += wrap_degrees((est_roll - gt_roll).to_degrees()).powi(2);
        sums[4] += wrap_degrees((est_pitch - gt_pitch).to_degrees()).powi(2);
        sums[5] += wrap_degrees((est_yaw - gt_yaw).to_degrees()).powi(2);
        used += 1;
    }
    if used == 0 {
        return Err(Error::EmptyInput("all frames excluded from RMS computation".into()));
    }
    let n = used as f64;
    Ok(RmsErrors {
        x_mm: (sums[0] / n).sqrt(),
        y_mm: (sums[1] / n).sqrt(),
        z_mm: (sums[2] / n).sqrt(),
        roll_deg: (sums[3] / n).sqrt(),
        pitch_deg: (sums[4] / n).sqrt(),
        yaw_deg: (sums[5] / n).sqrt(),
        excluded_frames: excluded,
    })
}

/// Translational and rotational error of a relative pose: the translation
/// norm and the axis-angle magnitude from the clamped trace.
pub fn pose_errors(rel: &PoseSE3) -> (f64, f64) {
    let e_t = rel.translation.norm();
    let e_r = ((rel.rotation.trace() - 1.0) / 2.0).clamp(-1.0, 1.0).acos();
    (e_t, e_r)
}

/// Strict per-frame success test: both errors must be strictly below the
/// 5 cm / 5 degree thresholds, so landing exactly on a bound is a failure.
pub fn frame_success(e_t: f64, e_r: f64) -> bool {
    e_t < 0.05 && e_r < 5.0f64.to_radians()
}

/// Fraction of frames passing the strict 5 cm / 5 degree test.
pub fn tracking_success(estimate: &PoseTrajectory, ground_truth: &PoseTrajectory) -> Result<f64> {
    let pairs = paired(estimate, ground_truth)?;
    let mut successes = 0usize;
    for (est, gt) in &pairs {
        let rel = relative_pose(est, gt);
        let (e_t, e_r) = pose_errors(&rel);
        if frame_success(e_t, e_r) {
            successes += 1;
        }
    }
    Ok(successes as f64 / pairs.len() as f64)
}

fn paired(
    estimate: &PoseTrajectory,
    ground_truth: &PoseTrajectory,
) -> Result<Vec<(PoseSE3, PoseSE3)>> {
    if estimate.is_empty() || ground_truth.is_empty() {
        return Err(Error::EmptyInput("trajectories must be non-empty".into()));
    }
    if estimate.len() != ground_truth.len() {
        return Err(Error::InvalidParameter(format!(
            "trajectory lengths differ: {} vs {}",
            estimate.len(),
            ground_truth.len()
        )));
    }
    estimate
        .entries
        .iter()
        .zip(&ground_truth.entries)
        .map(|(&(fe, pe), &(fg, pg))| {
            if fe != fg {
                return Err(Error::InvalidParameter(format!(
                    "frame indices differ: {fe} vs {fg}"
                )));
            }
            Ok((pe, pg))
        })
        .collect()
}
