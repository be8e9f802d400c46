//! SE(3) poses, pinhole projection, and the minimal pose variation.
//!
//! Poses keep an explicit 3x3 rotation matrix because every derivative in the
//! optimization consumes the matrix directly. The pose variation is the
//! 6-vector `[theta_r, theta_t]` (axis-angle radians, meters); applying it
//! first-order uses [`variate_point`], applying it exactly uses
//! [`PoseSE3::exp_update`] with the closed-form Rodrigues exponential.

use nalgebra::{Matrix3, Vector2, Vector3, Vector6};

use crate::error::Error;
use crate::Result;

pub type Vec2 = Vector2<f64>;
pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;
pub type Vec6 = Vector6<f64>;
pub type Mat6 = nalgebra::Matrix6<f64>;

/// Orthonormality drift above which a pose is re-orthonormalized.
const ORTHONORMALITY_DRIFT: f64 = 1e-6;

/// Pinhole camera intrinsics for an undistorted image.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraIntrinsics {
    pub fx: f64,
    pub fy: f64,
    pub px: f64,
    pub py: f64,
    pub width: u32,
    pub height: u32,
}

impl CameraIntrinsics {
    pub fn new(fx: f64, fy: f64, px: f64, py: f64, width: u32, height: u32) -> Result<Self> {
        if fx <= 0.0 || fy <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "focal lengths must be positive, got fx={fx}, fy={fy}"
            )));
        }
        if width == 0 || height == 0 {
            return Err(Error::InvalidParameter("image dimensions must be positive".into()));
        }
        if px < 0.0 || px >= width as f64 || py < 0.0 || py >= height as f64 {
            return Err(Error::InvalidParameter(format!(
                "principal point ({px}, {py}) outside {width}x{height} image"
            )));
        }
        Ok(Self { fx, fy, px, py, width, height })
    }

    /// Projects a 3D point in the camera frame to pixel coordinates.
    ///
    /// The result is continuous and may lie outside the image bounds.
    pub fn project(&self, point: &Vec3) -> Result<Vec2> {
        if point.z <= 0.0 {
            return Err(Error::BehindCamera(point.z));
        }
        Ok(Vec2::new(
            point.x / point.z * self.fx + self.px,
            point.y / point.z * self.fy + self.py,
        ))
    }

    /// Mean focal length, used to convert metric sizes to pixels at a depth.
    pub fn focal_mean(&self) -> f64 {
        0.5 * (self.fx + self.fy)
    }

    /// True if the continuous pixel position falls inside the image.
    pub fn contains(&self, pixel: &Vec2) -> bool {
        pixel.x >= 0.0
            && pixel.y >= 0.0
            && pixel.x < self.width as f64
            && pixel.y < self.height as f64
    }
}

/// Rigid transform: rotation is orthonormal with determinant +1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseSE3 {
    pub rotation: Mat3,
    pub translation: Vec3,
}

impl PoseSE3 {
    pub fn identity() -> Self {
        Self { rotation: Mat3::identity(), translation: Vec3::zeros() }
    }

    /// Builds a pose, checking the rotation invariants.
    pub fn new(rotation: Mat3, translation: Vec3) -> Result<Self> {
        let pose = Self { rotation, translation };
        if !pose.rotation_valid(1e-9) {
            return Err(Error::InvalidParameter(
                "rotation is not orthonormal with determinant +1".into(),
            ));
        }
        Ok(pose)
    }

    pub fn from_translation(translation: Vec3) -> Self {
        Self { rotation: Mat3::identity(), translation }
    }

    /// Rotation about `axis` (normalized internally) by `angle` radians.
    pub fn from_axis_angle(axis: Vec3, angle: f64, translation: Vec3) -> Self {
        let theta = axis.normalize() * angle;
        Self { rotation: rodrigues(&theta), translation }
    }

    pub fn transform_point(&self, point: &Vec3) -> Vec3 {
        self.rotation * point + self.translation
    }

    /// Rotates a direction vector (no translation).
    pub fn rotate(&self, dir: &Vec3) -> Vec3 {
        self.rotation * dir
    }

    /// Composition: `self` applied after `other` (`self * other`).
    pub fn compose(&self, other: &PoseSE3) -> PoseSE3 {
        PoseSE3 {
            rotation: self.rotation * other.rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }

    pub fn inverse(&self) -> PoseSE3 {
        let rt = self.rotation.transpose();
        PoseSE3 { rotation: rt, translation: -(rt * self.translation) }
    }

    /// Right-multiplies by the update block `[exp([theta_r]x), theta_t; 0, 1]`.
    ///
    /// The rotational part goes through the closed-form axis-angle
    /// exponential; the translation is applied directly. The result is
    /// re-orthonormalized when accumulated drift exceeds 1e-6.
    pub fn exp_update(&self, theta: &PoseVariation) -> PoseSE3 {
        let update = PoseSE3 { rotation: rodrigues(&theta.rotation), translation: theta.translation };
        let mut next = self.compose(&update);
        if !next.rotation_valid(ORTHONORMALITY_DRIFT) {
            next.rotation = reorthonormalize(&next.rotation);
        }
        next
    }

    /// Checks `R^T R = I` and `det R = +1` within `tol`.
    pub fn rotation_valid(&self, tol: f64) -> bool {
        let gram = self.rotation.transpose() * self.rotation;
        let drift = (gram - Mat3::identity()).abs().max();
        drift <= tol && (self.rotation.determinant() - 1.0).abs() <= 3.0 * tol.max(1e-12)
    }

    /// Row-major 4x4 homogeneous matrix entries.
    pub fn to_matrix_rows(&self) -> [f64; 16] {
        let r = &self.rotation;
        let t = &self.translation;
        [
            r[(0, 0)], r[(0, 1)], r[(0, 2)], t.x,
            r[(1, 0)], r[(1, 1)], r[(1, 2)], t.y,
            r[(2, 0)], r[(2, 1)], r[(2, 2)], t.z,
            0.0, 0.0, 0.0, 1.0,
        ]
    }

    /// Builds a pose from row-major 4x4 entries, validating the rotation.
    pub fn from_matrix_rows(m: &[f64; 16]) -> Result<Self> {
        let rotation = Mat3::new(m[0], m[1], m[2], m[4], m[5], m[6], m[8], m[9], m[10]);
        let translation = Vec3::new(m[3], m[7], m[11]);
        if m[12] != 0.0 || m[13] != 0.0 || m[14] != 0.0 || m[15] != 1.0 {
            return Err(Error::InvalidParameter("last row of a rigid transform must be 0 0 0 1".into()));
        }
        // Tolerate textual round-off from trajectory files.
        let pose = Self { rotation, translation };
        if !pose.rotation_valid(1e-6) {
            return Err(Error::InvalidParameter(
                "rotation is not orthonormal with determinant +1".into(),
            ));
        }
        Ok(pose)
    }
}

/// Minimal pose variation: axis-angle rotation and translation, model frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseVariation {
    pub rotation: Vec3,
    pub translation: Vec3,
}

impl PoseVariation {
    pub fn zero() -> Self {
        Self { rotation: Vec3::zeros(), translation: Vec3::zeros() }
    }

    pub fn new(rotation: Vec3, translation: Vec3) -> Self {
        Self { rotation, translation }
    }

    /// Packs as `[theta_r, theta_t]`, matching gradient/Hessian ordering.
    pub fn from_vec6(v: &Vec6) -> Self {
        Self {
            rotation: Vec3::new(v[0], v[1], v[2]),
            translation: Vec3::new(v[3], v[4], v[5]),
        }
    }

    pub fn to_vec6(&self) -> Vec6 {
        Vec6::new(
            self.rotation.x,
            self.rotation.y,
            self.rotation.z,
            self.translation.x,
            self.translation.y,
            self.translation.z,
        )
    }

    pub fn norm(&self) -> f64 {
        self.to_vec6().norm()
    }
}

/// First-order variation `(I + [theta_r]x) p + theta_t`.
///
/// This is the linearization used by the derivatives, not the exact rotation.
pub fn variate_point(theta: &PoseVariation, point: &Vec3) -> Vec3 {
    point + theta.rotation.cross(point) + theta.translation
}

/// Skew-symmetric matrix `[v]x` with `[v]x w = v x w`.
pub fn skew(v: &Vec3) -> Mat3 {
    Mat3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Closed-form axis-angle exponential `exp([theta]x)`.
///
/// Falls back to the second-order Taylor expansion below 1e-8 radians where
/// the sin(a)/a terms lose precision.
pub fn rodrigues(theta: &Vec3) -> Mat3 {
    let angle = theta.norm();
    let k = skew(theta);
    if angle < 1e-8 {
        return Mat3::identity() + k + (k * k) * 0.5;
    }
    let a = angle.sin() / angle;
    let b = (1.0 - angle.cos()) / (angle * angle);
    Mat3::identity() + k * a + (k * k) * b
}

/// Nearest rotation matrix in the Frobenius sense (polar decomposition).
pub fn reorthonormalize(m: &Mat3) -> Mat3 {
    let svd = m.svd(true, true);
    let u = svd.u.expect("svd with u");
    let vt = svd.v_t.expect("svd with v_t");
    let mut r = u * vt;
    if r.determinant() < 0.0 {
        // Flip the singular direction with the smallest singular value.
        let mut u = u;
        u.column_mut(2).neg_mut();
        r = u * vt;
    }
    r
}
