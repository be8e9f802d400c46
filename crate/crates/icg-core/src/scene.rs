//! Deterministic synthetic RGB-D sequences with ground truth.
//!
//! Frames are rendered with the software rasterizer at seeded ground-truth
//! poses: flat foreground/background colors plus per-pixel Gaussian color
//! noise, and rendered depth plus depth-scaled Gaussian noise quantized to
//! millimeters. An optional planar occluder is drawn into both images over a
//! frame range. Everything derives from substreams of one seed, so sequences
//! are bit-identical across runs and thread counts.

use crate::error::Error;
use crate::geometry::{CameraIntrinsics, PoseSE3, Vec3};
use crate::image::{ColorImage, DepthImage};
use crate::mesh::TriangleMesh;
use crate::metrics::PoseTrajectory;
use crate::par;
use crate::render;
use crate::rng::SplitMix64;
use crate::Result;

/// Rectangular occluder, axis-aligned in the color-camera frame.
#[derive(Debug, Clone)]
pub struct OccluderConfig {
    /// Quad center in the color-camera frame, meters.
    pub center: Vec3,
    /// Half extents along camera x and y, meters.
    pub half_extents: (f64, f64),
    pub color: [u8; 3],
    /// Active frame range `[start, end)`.
    pub frames: (usize, usize),
}

impl OccluderConfig {
    fn mesh(&self) -> TriangleMesh {
        let (hx, hy) = self.half_extents;
        let c = self.center;
        TriangleMesh::new(
            vec![
                c + Vec3::new(-hx, -hy, 0.0),
                c + Vec3::new(hx, -hy, 0.0),
                c + Vec3::new(hx, hy, 0.0),
                c + Vec3::new(-hx, hy, 0.0),
            ],
            vec![[0, 1, 2], [0, 2, 3]],
        )
        .expect("occluder quad is valid")
    }

    fn active(&self, frame: usize) -> bool {
        frame >= self.frames.0 && frame < self.frames.1
    }
}

#[derive(Debug, Clone)]
pub struct SceneConfig {
    pub n_frames: usize,
    /// Color camera.
    pub intrinsics: CameraIntrinsics,
    /// Depth camera.
    pub intrinsics_depth: CameraIntrinsics,
    /// Fixed depth-from-color extrinsics.
    pub depth_from_color: PoseSE3,
    /// Ground-truth pose of frame 0 (color camera from model).
    pub start_pose: PoseSE3,
    /// Per-frame translation step magnitude, meters.
    pub step_translation: f64,
    /// Per-frame rotation step magnitude, radians.
    pub step_rotation: f64,
    /// Containment half-box around the start translation; random-walk steps
    /// reflect at its faces so the object stays in view.
    pub wander_bound: f64,
    pub fg_color: [u8; 3],
    pub bg_color: [u8; 3],
    /// Per-channel Gaussian color noise (0-255 units).
    pub color_noise_sigma: f64,
    /// Depth noise at 1 m in millimeters; scales linearly with depth.
    pub depth_noise_mm_at_1m: f64,
    /// Constant background depth plane (noised); `None` leaves background
    /// pixels invalid.
    pub background_depth: Option<f64>,
    pub occluder: Option<OccluderConfig>,
    pub seed: u64,
}

impl Default for SceneConfig {
    fn default() -> Self {
        let intr = CameraIntrinsics::new(525.0, 525.0, 319.5, 239.5, 640, 480)
            .expect("default intrinsics are valid");
        Self {
            n_frames: 100,
            intrinsics: intr,
            intrinsics_depth: intr,
            depth_from_color: PoseSE3::identity(),
            start_pose: PoseSE3::from_axis_angle(
                Vec3::new(1.0, 1.0, 0.0),
                20.0f64.to_radians(),
                Vec3::new(0.0, 0.0, 0.6),
            ),
            step_translation: 0.005,
            step_rotation: 3.0f64.to_radians(),
            wander_bound: 0.08,
            fg_color: [200, 60, 50],
            bg_color: [45, 55, 160],
            color_noise_sigma: 8.0,
            depth_noise_mm_at_1m: 2.0,
            background_depth: None,
            occluder: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticFrame {
    pub color: ColorImage,
    pub depth: DepthImage,
}

#[derive(Debug, Clone)]
pub struct SyntheticSequence {
    pub frames: Vec<SyntheticFrame>,
    pub ground_truth: PoseTrajectory,
}

impl SyntheticSequence {
    pub fn ground_truth_pose(&self, frame: usize) -> &PoseSE3 {
        &self.ground_truth.entries()[frame].1
    }
}

/// Renders the full sequence. Fails when the object leaves the color
/// camera's frustum, naming the offending frame.
pub fn generate_sequence(mesh: &TriangleMesh, cfg: &SceneConfig) -> Result<SyntheticSequence> {
    if cfg.n_frames == 0 {
        return Err(Error::InvalidParameter("scene needs at least one frame".into()));
    }
    if cfg.color_noise_sigma < 0.0 || cfg.depth_noise_mm_at_1m < 0.0 {
        return Err(Error::InvalidParameter("noise sigmas must be non-negative".into()));
    }

    let poses = ground_truth_poses(cfg);
    for (frame, pose) in poses.iter().enumerate() {
        check_in_frustum(mesh, pose, &cfg.intrinsics, frame)?;
    }

    let occluder_mesh = cfg.occluder.as_ref().map(|o| o.mesh());
    let frames: Vec<Result<SyntheticFrame>> = par::map_indices(cfg.n_frames, |frame| {
        render_frame(mesh, cfg, &poses[frame], occluder_mesh.as_ref(), frame)
    });

    let mut out = Vec::with_capacity(cfg.n_frames);
    for frame in frames {
        out.push(frame?);
    }
    let mut ground_truth = PoseTrajectory::new();
    for (k, pose) in poses.iter().enumerate() {
        ground_truth.push(k as u64, *pose)?;
    }
    Ok(SyntheticSequence { frames: out, ground_truth })
}

/// Seeded random-walk ground truth: fixed-magnitude translation steps with
/// reflection at the wander bound, fixed-magnitude rotations about random axes.
fn ground_truth_poses(cfg: &SceneConfig) -> Vec<PoseSE3> {
    let mut rng = SplitMix64::substream(cfg.seed, u64::MAX);
    let mut poses = Vec::with_capacity(cfg.n_frames);
    let mut pose = cfg.start_pose;
    poses.push(pose);
    let home = cfg.start_pose.translation;
    for _ in 1..cfg.n_frames {
        let mut delta = Vec3::from(rng.unit_vec3()) * cfg.step_translation;
        for k in 0..3 {
            if (pose.translation[k] + delta[k] - home[k]).abs() > cfg.wander_bound {
                delta[k] = -delta[k];
            }
        }
        let axis = Vec3::from(rng.unit_vec3());
        pose = PoseSE3 {
            rotation: pose.rotation * crate::geometry::rodrigues(&(axis * cfg.step_rotation)),
            translation: pose.translation + delta,
        };
        poses.push(pose);
    }
    poses
}

fn check_in_frustum(
    mesh: &TriangleMesh,
    pose: &PoseSE3,
    intr: &CameraIntrinsics,
    frame: usize,
) -> Result<()> {
    for v in &mesh.vertices {
        let cam = pose.transform_point(v);
        if cam.z <= 0.0 {
            return Err(Error::SceneGeneration {
                frame,
                msg: "object vertex behind the camera".into(),
            });
        }
        let px = intr.project(&cam)?;
        if !intr.contains(&px) {
            return Err(Error::SceneGeneration {
                frame,
                msg: format!("object leaves the frustum at pixel ({:.1}, {:.1})", px.x, px.y),
            });
        }
    }
    Ok(())
}

fn render_frame(
    mesh: &TriangleMesh,
    cfg: &SceneConfig,
    pose: &PoseSE3,
    occluder_mesh: Option<&TriangleMesh>,
    frame: usize,
) -> Result<SyntheticFrame> {
    let occluder_active =
        cfg.occluder.as_ref().map(|o| o.active(frame)).unwrap_or(false) && occluder_mesh.is_some();

    // Color camera pass.
    let mut color_instances: Vec<(&TriangleMesh, PoseSE3)> = vec![(mesh, *pose)];
    if occluder_active {
        // Occluder vertices are already in the color-camera frame.
        color_instances.push((occluder_mesh.unwrap(), PoseSE3::identity()));
    }
    let color_out = render::render_scene(&color_instances, &cfg.intrinsics)?;

    let occluder_color = cfg.occluder.as_ref().map(|o| o.color).unwrap_or([0, 0, 0]);
    let mut color = ColorImage::filled(cfg.intrinsics.width, cfg.intrinsics.height, cfg.bg_color);
    let mut rng_color = SplitMix64::substream(cfg.seed, 2 * frame as u64);
    for y in 0..cfg.intrinsics.height {
        for x in 0..cfg.intrinsics.width {
            let base = match color_out.instance_at(x, y) {
                Some(0) => cfg.fg_color,
                Some(_) => occluder_color,
                None => cfg.bg_color,
            };
            let noised = if cfg.color_noise_sigma > 0.0 {
                let mut px = [0u8; 3];
                for (c, b) in px.iter_mut().zip(base) {
                    let v = b as f64 + rng_color.next_gauss() * cfg.color_noise_sigma;
                    *c = v.round().clamp(0.0, 255.0) as u8;
                }
                px
            } else {
                base
            };
            color.set(x, y, noised);
        }
    }

    // Depth camera pass.
    let depth_pose = cfg.depth_from_color.compose(pose);
    let mut depth_instances: Vec<(&TriangleMesh, PoseSE3)> = vec![(mesh, depth_pose)];
    if occluder_active {
        depth_instances.push((occluder_mesh.unwrap(), cfg.depth_from_color));
    }
    let depth_out = render::render_scene(&depth_instances, &cfg.intrinsics_depth)?;

    let mut depth = DepthImage::empty(cfg.intrinsics_depth.width, cfg.intrinsics_depth.height);
    let mut rng_depth = SplitMix64::substream(cfg.seed, 2 * frame as u64 + 1);
    for y in 0..cfg.intrinsics_depth.height {
        for x in 0..cfg.intrinsics_depth.width {
            // One draw per pixel keeps the noise stream aligned regardless of
            // which pixels are valid (e.g. with and without the occluder).
            let noise = rng_depth.next_gauss();
            let rendered = depth_out.depth.depth_m(x, y).or(cfg.background_depth);
            if let Some(d) = rendered {
                depth.set_meters(x, y, d + noise * cfg.depth_noise_mm_at_1m * 1e-3 * d);
            }
        }
    }

    Ok(SyntheticFrame { color, depth })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh;

    fn quick_config() -> SceneConfig {
        SceneConfig {
            n_frames: 4,
            intrinsics: CameraIntrinsics::new(260.0, 260.0, 159.5, 119.5, 320, 240).unwrap(),
            intrinsics_depth: CameraIntrinsics::new(260.0, 260.0, 159.5, 119.5, 320, 240).unwrap(),
            ..SceneConfig::default()
        }
    }

    #[test]
    fn zero_noise_static_scene_repeats_frames() {
        let cfg = SceneConfig {
            step_translation: 0.0,
            step_rotation: 0.0,
            color_noise_sigma: 0.0,
            depth_noise_mm_at_1m: 0.0,
            ..quick_config()
        };
        let seq = generate_sequence(&mesh::cube(0.1), &cfg).unwrap();
        for frame in &seq.frames[1..] {
            assert_eq!(frame.color, seq.frames[0].color);
            assert_eq!(frame.depth, seq.frames[0].depth);
        }
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let cfg = quick_config();
        let a = generate_sequence(&mesh::cube(0.1), &cfg).unwrap();
        let b = generate_sequence(&mesh::cube(0.1), &cfg).unwrap();
        for (fa, fb) in a.frames.iter().zip(&b.frames) {
            assert_eq!(fa.color, fb.color);
            assert_eq!(fa.depth, fb.depth);
        }
        assert_eq!(a.ground_truth, b.ground_truth);
    }

    #[test]
    fn step_magnitudes_are_exact() {
        let cfg = SceneConfig { n_frames: 20, ..quick_config() };
        let seq = generate_sequence(&mesh::cube(0.1), &cfg).unwrap();
        let entries = seq.ground_truth.entries();
        for w in entries.windows(2) {
            let dt = (w[1].1.translation - w[0].1.translation).norm();
            assert!((dt - cfg.step_translation).abs() < 1e-12, "translation step {dt}");
            let rel = w[0].1.rotation.transpose() * w[1].1.rotation;
            let angle = ((rel.trace() - 1.0) / 2.0).clamp(-1.0, 1.0).acos();
            assert!((angle - cfg.step_rotation).abs() < 1e-9, "rotation step {angle}");
        }
    }

    #[test]
    fn trajectory_stays_within_wander_bound() {
        let cfg = SceneConfig { n_frames: 300, ..quick_config() };
        let seq = generate_sequence(&mesh::cube(0.1), &cfg).unwrap();
        let home = cfg.start_pose.translation;
        for (_, pose) in seq.ground_truth.entries() {
            for k in 0..3 {
                assert!((pose.translation[k] - home[k]).abs() <= cfg.wander_bound + 1e-9);
            }
        }
    }

    #[test]
    fn object_leaving_frustum_names_the_frame() {
        let cfg = SceneConfig {
            start_pose: PoseSE3::from_translation(Vec3::new(0.35, 0.0, 0.6)),
            ..quick_config()
        };
        match generate_sequence(&mesh::cube(0.1), &cfg) {
            Err(Error::SceneGeneration { frame, .. }) => assert_eq!(frame, 0),
            other => panic!("expected frustum error, got {other:?}"),
        }
    }

    #[test]
    fn background_depth_plane_fills_invalid_pixels() {
        let cfg = SceneConfig {
            background_depth: Some(1.5),
            depth_noise_mm_at_1m: 0.0,
            ..quick_config()
        };
        let seq = generate_sequence(&mesh::cube(0.1), &cfg).unwrap();
        let depth = &seq.frames[0].depth;
        assert_eq!(depth.depth_m(0, 0), Some(1.5));
    }

    #[test]
    fn occluder_changes_object_depth_pixels() {
        let mesh = mesh::cube(0.1);
        let base_cfg = SceneConfig {
            n_frames: 3,
            step_translation: 0.0,
            step_rotation: 0.0,
            ..quick_config()
        };
        let occluded_cfg = SceneConfig {
            occluder: Some(OccluderConfig {
                center: Vec3::new(-0.03, 0.0, 0.45),
                half_extents: (0.045, 0.12),
                color: [90, 180, 90],
                frames: (1, 3),
            }),
            ..base_cfg.clone()
        };
        let plain = generate_sequence(&mesh, &base_cfg).unwrap();
        let occluded = generate_sequence(&mesh, &occluded_cfg).unwrap();

        // Frame 0: occluder inactive, bit-identical.
        assert_eq!(plain.frames[0].depth, occluded.frames[0].depth);

        // Frames 1..: a large fraction of object pixels must change.
        let (w, h) = (base_cfg.intrinsics.width, base_cfg.intrinsics.height);
        let mut object_px = 0usize;
        let mut differing = 0usize;
        for y in 0..h {
            for x in 0..w {
                if plain.frames[1].depth.depth_m(x, y).is_some() {
                    object_px += 1;
                    if occluded.frames[1].depth.millimeters(x, y)
                        != plain.frames[1].depth.millimeters(x, y)
                    {
                        differing += 1;
                    }
                }
            }
        }
        let fraction = differing as f64 / object_px as f64;
        assert!(fraction >= 0.40, "only {:.1}% of object pixels occluded", 100.0 * fraction);
        assert!(fraction <= 0.75, "occluder covers too much: {:.1}%", 100.0 * fraction);
    }
}
