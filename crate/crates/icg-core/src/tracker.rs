//! Pose tracker: assembles gradients and Hessians from both modalities and
//! takes regularized Newton steps on a per-frame iteration schedule.
//!
//! Each frame runs several correspondence iterations. An iteration queries
//! the closest viewpoint, builds correspondence lines (region) and points
//! (depth), rejecting occluded ones, and then performs two Newton updates:
//! the region modality uses global derivatives in the first and local ones in
//! the second, the depth modality is identical in both. Correspondences are
//! established once per iteration; only the pose-dependent quantities are
//! re-evaluated between the two updates. Histograms update once per frame at
//! the final pose; the refinement mode instead rebuilds them from scratch at
//! the start of every iteration.

use std::sync::Arc;
use std::time::Instant;

use crate::depth::{self, CorrespondencePoint, OcclusionConfig};
use crate::geometry::{CameraIntrinsics, Mat6, PoseSE3, PoseVariation, Vec3, Vec6};
use crate::image::{ColorImage, DepthImage};
use crate::par;
use crate::region::{
    self, ColorHistogramPair, CorrespondenceLine, HistogramLine, OptimizationMode,
    StepFunctionTable,
};
use crate::viewpoint::SparseViewpointModel;
use crate::{Error, Result};

/// Per-iteration parameters; iterations beyond the listed entries reuse the
/// last entry.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationSchedule {
    /// Region standard deviations, pixels.
    pub sigma_r: Vec<f64>,
    /// Depth standard deviations, millimeters.
    pub sigma_d: Vec<f64>,
    /// Correspondence-line scales, pixels per segment.
    pub scale: Vec<u32>,
    /// Correspondence thresholds, millimeters.
    pub r_t: Vec<f64>,
    /// Correspondence iterations per frame.
    pub n_corr_iterations: usize,
    /// Newton updates per correspondence iteration.
    pub n_update_iterations: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct ScheduleEntry {
    pub sigma_r: f64,
    pub sigma_d: f64,
    pub scale: u32,
    pub r_t_mm: f64,
}

impl IterationSchedule {
    /// Parameters used for robust desk-scale tracking.
    pub fn tracking() -> Self {
        Self {
            sigma_r: vec![25.0, 15.0, 10.0],
            sigma_d: vec![50.0, 30.0, 20.0],
            scale: vec![7, 4, 2],
            r_t: vec![70.0, 50.0, 40.0],
            n_corr_iterations: 4,
            n_update_iterations: 2,
        }
    }

    /// Wider search schedule for refining externally supplied poses.
    pub fn refinement() -> Self {
        Self {
            sigma_r: vec![25.0, 15.0, 10.0],
            sigma_d: vec![100.0, 50.0, 20.0],
            scale: vec![7, 4, 2],
            r_t: vec![300.0, 250.0, 100.0],
            n_corr_iterations: 7,
            n_update_iterations: 2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sigma_r.is_empty() || self.sigma_d.is_empty() || self.scale.is_empty() || self.r_t.is_empty()
        {
            return Err(Error::InvalidParameter("schedule arrays must be non-empty".into()));
        }
        if self.n_corr_iterations == 0 || self.n_update_iterations == 0 {
            return Err(Error::InvalidParameter("iteration counts must be positive".into()));
        }
        let all_positive = self.sigma_r.iter().chain(&self.sigma_d).chain(&self.r_t).all(|&v| v > 0.0)
            && self.scale.iter().all(|&s| s >= 1);
        if !all_positive {
            return Err(Error::InvalidParameter("schedule entries must be positive".into()));
        }
        Ok(())
    }

    pub fn entry(&self, iteration: usize) -> ScheduleEntry {
        let pick = |v: &[f64]| v[iteration.min(v.len() - 1)];
        ScheduleEntry {
            sigma_r: pick(&self.sigma_r),
            sigma_d: pick(&self.sigma_d),
            scale: self.scale[iteration.min(self.scale.len() - 1)],
            r_t_mm: pick(&self.r_t),
        }
    }
}

/// Frame-processing mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrackerMode {
    /// Continuous tracking: histograms adapt once per frame at the final pose.
    Tracking,
    /// Pose refinement: histograms are rebuilt at every iteration.
    Refinement,
}

#[derive(Debug, Clone)]
pub struct TrackerConfig {
    pub schedule: IterationSchedule,
    /// Rotational regularization, per axis (symmetric objects raise the
    /// symmetry axis entry).
    pub lambda_r: Vec3,
    /// Translational regularization.
    pub lambda_t: f64,
    /// Smoothed-step slope parameter.
    pub s_h: f64,
    /// Smoothed-step amplitude parameter.
    pub alpha_h: f64,
    /// Local-optimization learning rate.
    pub alpha_s: f64,
    /// Histogram online-adaptation rate.
    pub histogram_learning_rate: f64,
    /// Depth correspondence-grid stride, meters.
    pub stride: f64,
    pub occlusion: OcclusionConfig,
    pub use_occlusion_handling: bool,
    pub use_region: bool,
    pub use_depth: bool,
    /// Below this many total correspondences the frame is declared lost.
    pub min_valid_correspondences: usize,
    pub mode: TrackerMode,
    /// Record the joint negative log-probability before/after the update
    /// steps of every iteration (diagnostic, costs one extra evaluation pass).
    pub collect_nll: bool,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        Self {
            schedule: IterationSchedule::tracking(),
            lambda_r: Vec3::from_element(1000.0),
            lambda_t: 30000.0,
            s_h: 0.5,
            alpha_h: 0.43,
            alpha_s: 1.3,
            histogram_learning_rate: 0.2,
            stride: 0.005,
            occlusion: OcclusionConfig::default(),
            use_occlusion_handling: true,
            use_region: true,
            use_depth: true,
            min_valid_correspondences: 10,
            mode: TrackerMode::Tracking,
            collect_nll: false,
        }
    }
}

impl TrackerConfig {
    /// Refinement preset: wide correspondence search, doubled stride, light
    /// translational regularization. Occlusion rejection stays off because it
    /// compares measured depth against a pose that is not yet trusted; a far
    /// initial estimate would reject every correspondence.
    pub fn refinement() -> Self {
        Self {
            schedule: IterationSchedule::refinement(),
            lambda_t: 100.0,
            stride: 0.010,
            mode: TrackerMode::Refinement,
            use_occlusion_handling: false,
            ..Self::default()
        }
    }

    /// Replaces the rotational regularizer, optionally per axis.
    pub fn symmetry_constraint(&mut self, lambda_r_axis: Vec3) {
        self.lambda_r = lambda_r_axis;
    }
}

/// Wall-clock phase breakdown of one tracked frame, microseconds.
#[derive(Debug, Clone, Copy, Default)]
pub struct FrameTimings {
    pub correspondence_lines_us: f64,
    pub correspondence_points_us: f64,
    pub derivatives_us: f64,
    pub histograms_us: f64,
    pub other_us: f64,
}

impl FrameTimings {
    pub fn total_us(&self) -> f64 {
        self.correspondence_lines_us
            + self.correspondence_points_us
            + self.derivatives_us
            + self.histograms_us
            + self.other_us
    }
}

/// Outcome of one processed frame.
#[derive(Debug, Clone)]
pub struct TrackResult {
    pub pose: PoseSE3,
    /// Pose after each correspondence iteration.
    pub poses_per_iteration: Vec<PoseSE3>,
    /// Valid correspondences in the final iteration.
    pub n_lines: usize,
    pub n_points: usize,
    pub tracking_lost: bool,
    pub timings: FrameTimings,
    /// Joint negative log-probability (at fixed correspondences) before and
    /// after the update steps of each iteration; filled when `collect_nll`.
    pub nll_steps: Vec<(f64, f64)>,
}

/// One tracked object: pose estimate, histograms, model and cameras.
#[derive(Debug, Clone)]
pub struct TrackerState {
    pub cam_from_model: PoseSE3,
    /// Fixed depth-camera-from-color-camera extrinsics.
    pub depth_from_color: PoseSE3,
    pub intrinsics_color: CameraIntrinsics,
    pub intrinsics_depth: CameraIntrinsics,
    pub model: Arc<SparseViewpointModel>,
    pub histograms: ColorHistogramPair,
    pub config: TrackerConfig,
    step_table: StepFunctionTable,
}

impl TrackerState {
    pub fn new(
        model: Arc<SparseViewpointModel>,
        intrinsics_color: CameraIntrinsics,
        intrinsics_depth: CameraIntrinsics,
        depth_from_color: PoseSE3,
        config: TrackerConfig,
        initial_pose: PoseSE3,
    ) -> Result<Self> {
        config.schedule.validate()?;
        if config.lambda_r.min() < 0.0 || config.lambda_t < 0.0 {
            return Err(Error::InvalidParameter("regularizers must be non-negative".into()));
        }
        let step_table = region::step_values(config.s_h, config.alpha_h)?;
        Ok(Self {
            cam_from_model: initial_pose,
            depth_from_color,
            intrinsics_color,
            intrinsics_depth,
            model,
            histograms: ColorHistogramPair::new(),
            config,
            step_table,
        })
    }

    /// Initializes histograms from the current pose (first-frame setup).
    pub fn init_histograms(&mut self, color: &ColorImage, depth_image: &DepthImage) {
        self.histograms.reset();
        let scale = self.config.schedule.entry(0).scale;
        let lines = self.histogram_lines(color, depth_image, scale);
        region::update_histograms(&mut self.histograms, color, &lines, 1.0);
    }

    /// Tracks one frame and returns the updated pose estimate.
    pub fn track_frame(&mut self, color: &ColorImage, depth_image: &DepthImage) -> TrackResult {
        self.run_frame(color, depth_image)
    }

    /// Refines an externally supplied pose on a single frame.
    pub fn refine_pose(
        &mut self,
        color: &ColorImage,
        depth_image: &DepthImage,
        initial_pose: PoseSE3,
    ) -> TrackResult {
        self.cam_from_model = initial_pose;
        self.run_frame(color, depth_image)
    }

    fn run_frame(&mut self, color: &ColorImage, depth_image: &DepthImage) -> TrackResult {
        let start_pose = self.cam_from_model;
        let mut timings = FrameTimings::default();
        let mut poses_per_iteration = Vec::with_capacity(self.config.schedule.n_corr_iterations);
        let mut nll_steps = Vec::new();
        let mut n_lines = 0;
        let mut n_points = 0;
        let mut lost = false;

        for iteration in 0..self.config.schedule.n_corr_iterations {
            let entry = self.config.schedule.entry(iteration);

            if self.config.mode == TrackerMode::Refinement {
                let t0 = Instant::now();
                self.histograms.reset();
                let lines = self.histogram_lines(color, depth_image, entry.scale);
                region::update_histograms(&mut self.histograms, color, &lines, 1.0);
                timings.histograms_us += elapsed_us(t0);
            }

            let t0 = Instant::now();
            let view = self.model.closest_view(&self.cam_from_model);
            let depth_from_model = self.depth_from_color.compose(&self.cam_from_model);
            timings.other_us += elapsed_us(t0);

            // Correspondence lines (region modality).
            let t0 = Instant::now();
            let lines: Vec<CorrespondenceLine> = if self.config.use_region {
                let candidates = par::map_ordered(&view.contour_points, |cp| {
                    if self.config.use_occlusion_handling {
                        let in_depth = depth_from_model.transform_point(&cp.point);
                        if in_depth.z <= 0.0 {
                            return None;
                        }
                        if depth::is_occluded(
                            depth_image,
                            &in_depth,
                            cp.occlusion_offset,
                            &self.intrinsics_depth,
                            &self.config.occlusion,
                        ) {
                            return None;
                        }
                    }
                    region::build_line(
                        cp,
                        &self.cam_from_model,
                        &self.intrinsics_color,
                        color,
                        &self.histograms,
                        entry.scale,
                        &self.step_table,
                    )
                });
                candidates.into_iter().flatten().collect()
            } else {
                Vec::new()
            };
            timings.correspondence_lines_us += elapsed_us(t0);

            // Correspondence points (depth modality).
            let t0 = Instant::now();
            let points: Vec<CorrespondencePoint> = if self.config.use_depth {
                let candidates = par::map_ordered(&view.surface_points, |sp| {
                    let in_depth = depth_from_model.transform_point(&sp.point);
                    if in_depth.z <= 0.0 {
                        return None;
                    }
                    if self.config.use_occlusion_handling
                        && depth::is_occluded(
                            depth_image,
                            &in_depth,
                            sp.occlusion_offset,
                            &self.intrinsics_depth,
                            &self.config.occlusion,
                        )
                    {
                        return None;
                    }
                    depth::find_correspondence(
                        depth_image,
                        sp,
                        &depth_from_model,
                        &self.intrinsics_depth,
                        entry.r_t_mm * 1e-3,
                        self.config.stride,
                    )
                });
                candidates.into_iter().flatten().collect()
            } else {
                Vec::new()
            };
            timings.correspondence_points_us += elapsed_us(t0);

            n_lines = lines.len();
            n_points = points.len();
            if n_lines + n_points < self.config.min_valid_correspondences {
                lost = true;
                break;
            }

            let nll_before = self
                .config
                .collect_nll
                .then(|| self.joint_nll(&lines, &points, &entry))
                .flatten();

            // Newton updates at fixed correspondences.
            let t0 = Instant::now();
            for update in 0..self.config.schedule.n_update_iterations {
                let mode = if update == 0 {
                    OptimizationMode::Global
                } else {
                    OptimizationMode::Local
                };
                let model_from_depth =
                    self.depth_from_color.compose(&self.cam_from_model).inverse();

                let region_terms = par::map_ordered(&lines, |line| {
                    region::region_grad_hess(
                        line,
                        &self.step_table,
                        mode,
                        entry.sigma_r,
                        self.config.alpha_s,
                        &self.cam_from_model,
                        &self.intrinsics_color,
                    )
                });
                let depth_terms = par::map_ordered(&points, |cp| {
                    Some(depth::depth_grad_hess(cp, &model_from_depth, entry.sigma_d))
                });
                let (g, h) =
                    assemble(region_terms.into_iter().chain(depth_terms).flatten());

                if let Some(theta) = newton_step(&g, &h, &self.config.lambda_r, self.config.lambda_t)
                {
                    self.cam_from_model = self.cam_from_model.exp_update(&theta);
                }
            }
            timings.derivatives_us += elapsed_us(t0);

            if let Some(before) = nll_before {
                if let Some(after) = self.joint_nll(&lines, &points, &entry) {
                    nll_steps.push((before, after));
                }
            }

            poses_per_iteration.push(self.cam_from_model);
        }

        if lost {
            self.cam_from_model = start_pose;
        } else if self.config.mode == TrackerMode::Tracking {
            // Adapt histograms once the final pose is known.
            let t0 = Instant::now();
            let scale = self
                .config
                .schedule
                .entry(self.config.schedule.n_corr_iterations.saturating_sub(1))
                .scale;
            let hist_lines = self.histogram_lines(color, depth_image, scale);
            region::update_histograms(
                &mut self.histograms,
                color,
                &hist_lines,
                self.config.histogram_learning_rate,
            );
            timings.histograms_us += elapsed_us(t0);
        }

        TrackResult {
            pose: self.cam_from_model,
            poses_per_iteration,
            n_lines,
            n_points,
            tracking_lost: lost,
            timings,
            nll_steps,
        }
    }

    /// Line geometry at the current pose for histogram sampling, with the
    /// same occlusion and validity rejection as correspondence lines.
    fn histogram_lines(
        &self,
        color: &ColorImage,
        depth_image: &DepthImage,
        scale: u32,
    ) -> Vec<HistogramLine> {
        let view = self.model.closest_view(&self.cam_from_model);
        let depth_from_model = self.depth_from_color.compose(&self.cam_from_model);
        let lines = par::map_ordered(&view.contour_points, |cp| {
            if self.config.use_occlusion_handling {
                let in_depth = depth_from_model.transform_point(&cp.point);
                if in_depth.z <= 0.0 {
                    return None;
                }
                if depth::is_occluded(
                    depth_image,
                    &in_depth,
                    cp.occlusion_offset,
                    &self.intrinsics_depth,
                    &self.config.occlusion,
                ) {
                    return None;
                }
            }
            region::build_line(
                cp,
                &self.cam_from_model,
                &self.intrinsics_color,
                color,
                &self.histograms,
                scale,
                &self.step_table,
            )
            .map(|line| HistogramLine { center: line.center, normal: line.normal })
        });
        lines.into_iter().flatten().collect()
    }

    /// Joint negative log-probability of the current pose at fixed
    /// correspondences: the scaled interpolated line distributions plus the
    /// exact point-to-plane quadratics.
    fn joint_nll(
        &self,
        lines: &[CorrespondenceLine],
        points: &[CorrespondencePoint],
        entry: &ScheduleEntry,
    ) -> Option<f64> {
        let mut nll = 0.0;
        for line in lines {
            let d_s = region::scaled_distance(
                line,
                &PoseVariation::zero(),
                &self.cam_from_model,
                &self.intrinsics_color,
            )
            .ok()?;
            let s = line.scale as f64;
            let kappa =
                self.step_table.s_h * s * s / (entry.sigma_r * entry.sigma_r * line.n_bar * line.n_bar);
            nll -= kappa * region::log_distribution_interpolated(line, d_s);
        }
        let model_from_depth = self.depth_from_color.compose(&self.cam_from_model).inverse();
        for cp in points {
            let p = cp.measured_in_model(&model_from_depth);
            let sigma_eff = cp.depth * entry.sigma_d * 1e-3;
            let e = cp.model_normal.dot(&(cp.model_point - p));
            nll += 0.5 * e * e / (sigma_eff * sigma_eff);
        }
        Some(nll)
    }
}

#[inline]
fn elapsed_us(t0: Instant) -> f64 {
    t0.elapsed().as_secs_f64() * 1e6
}

/// Sums per-correspondence contributions in a fixed order.
pub fn assemble<I: IntoIterator<Item = (Vec6, Mat6)>>(contributions: I) -> (Vec6, Mat6) {
    let mut g = Vec6::zeros();
    let mut h = Mat6::zeros();
    for (gi, hi) in contributions {
        g += gi;
        h += hi;
    }
    (g, h)
}

/// Regularized Newton step: solves `(-H + diag(lambda_r, lambda_t)) theta = g`
/// by Cholesky. Returns `None` on non-finite inputs or a failed decomposition
/// (the caller skips the update).
pub fn newton_step(
    g: &Vec6,
    h: &Mat6,
    lambda_r: &Vec3,
    lambda_t: f64,
) -> Option<PoseVariation> {
    if !g.iter().all(|v| v.is_finite()) || !h.iter().all(|v| v.is_finite()) {
        return None;
    }
    let mut a = -h;
    for k in 0..3 {
        a[(k, k)] += lambda_r[k];
        a[(k + 3, k + 3)] += lambda_t;
    }
    let chol = nalgebra::Cholesky::new(a)?;
    let theta = chol.solve(g);
    theta.iter().all(|v| v.is_finite()).then(|| PoseVariation::from_vec6(&theta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    #[test]
    fn assemble_empty_is_zero() {
        let (g, h) = assemble(std::iter::empty());
        assert_eq!(g, Vec6::zeros());
        assert_eq!(h, Mat6::zeros());
    }

    #[test]
    fn assemble_single_is_identity() {
        let g0 = Vec6::new(1.0, 2.0, 3.0, 4.0, 5.0, 6.0);
        let h0 = Mat6::identity() * -2.0;
        let (g, h) = assemble([(g0, h0)]);
        assert_eq!(g, g0);
        assert_eq!(h, h0);
    }

    #[test]
    fn assemble_matches_sequential_oracle_bit_exactly() {
        let mut rng = SplitMix64::new(41);
        let terms: Vec<(Vec6, Mat6)> = (0..100)
            .map(|_| {
                let j = Vec6::from_fn(|_, _| rng.range_f64(-1.0, 1.0));
                let w = rng.range_f64(0.1, 5.0);
                (j * w, (j * j.transpose()) * -w)
            })
            .collect();
        let (g, h) = assemble(terms.iter().cloned());

        let mut g_oracle = Vec6::zeros();
        let mut h_oracle = Mat6::zeros();
        for (gi, hi) in &terms {
            g_oracle += gi;
            h_oracle += hi;
        }
        assert_eq!(g, g_oracle);
        assert_eq!(h, h_oracle);

        // Summed Hessian stays negative semidefinite.
        let eig = nalgebra::SymmetricEigen::new(h);
        for &l in eig.eigenvalues.iter() {
            assert!(l <= 1e-9, "eigenvalue {l}");
        }
    }

    #[test]
    fn newton_step_zero_gradient_is_zero() {
        let theta = newton_step(
            &Vec6::zeros(),
            &(Mat6::identity() * -1.0),
            &Vec3::from_element(1000.0),
            30000.0,
        )
        .unwrap();
        assert_eq!(theta.to_vec6(), Vec6::zeros());
    }

    #[test]
    fn newton_step_pure_regularizer_inverse() {
        let lambda_t = 30000.0;
        let k = 0.025;
        let g = Vec6::new(0.0, 0.0, 0.0, k * lambda_t, 0.0, 0.0);
        let theta =
            newton_step(&g, &Mat6::zeros(), &Vec3::from_element(1000.0), lambda_t).unwrap();
        assert!((theta.translation - Vec3::new(k, 0.0, 0.0)).norm() < 1e-12);
        assert!(theta.rotation.norm() < 1e-15);
    }

    #[test]
    fn newton_step_norm_decreases_with_lambda() {
        let mut rng = SplitMix64::new(42);
        for _ in 0..20 {
            let j = Vec6::from_fn(|_, _| rng.range_f64(-1.0, 1.0));
            let h = (j * j.transpose()) * -rng.range_f64(0.5, 3.0);
            let g = Vec6::from_fn(|_, _| rng.range_f64(-1.0, 1.0));
            let mut last = f64::INFINITY;
            for lambda in [1.0, 10.0, 100.0, 1000.0, 1e4, 1e6] {
                let theta =
                    newton_step(&g, &h, &Vec3::from_element(lambda), lambda).unwrap();
                let norm = theta.norm();
                assert!(norm <= last + 1e-12, "norm {norm} after {last} at {lambda}");
                last = norm;
            }
        }
    }

    #[test]
    fn newton_step_huge_rotational_lambda_pins_rotation() {
        let mut rng = SplitMix64::new(43);
        let g = Vec6::from_fn(|_, _| rng.range_f64(-10.0, 10.0));
        let h = Mat6::identity() * -5.0;
        let theta = newton_step(&g, &h, &Vec3::from_element(1e12), 100.0).unwrap();
        assert!(theta.rotation.norm() < 1e-10);
        assert!(theta.translation.norm() > 0.0);
    }

    #[test]
    fn newton_step_rejects_non_finite() {
        let mut g = Vec6::zeros();
        g[0] = f64::NAN;
        assert!(newton_step(&g, &Mat6::zeros(), &Vec3::from_element(1.0), 1.0).is_none());
        let mut h = Mat6::zeros();
        h[(0, 0)] = f64::INFINITY;
        assert!(newton_step(&Vec6::zeros(), &h, &Vec3::from_element(1.0), 1.0).is_none());
    }

    #[test]
    fn newton_step_singular_without_regularization() {
        // Rank-1 H and lambda = 0: Cholesky must fail, step skipped.
        let j = Vec6::new(1.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        let h = (j * j.transpose()) * -1.0;
        assert!(newton_step(&j, &h, &Vec3::zeros(), 0.0).is_none());
    }

    #[test]
    fn schedule_entry_repeats_last() {
        let schedule = IterationSchedule::tracking();
        let e3 = schedule.entry(3);
        assert_eq!(e3.sigma_r, 10.0);
        assert_eq!(e3.scale, 2);
        assert_eq!(e3.r_t_mm, 40.0);
        let e9 = schedule.entry(9);
        assert_eq!(e9.sigma_d, 20.0);
    }

    #[test]
    fn schedule_validation() {
        let mut s = IterationSchedule::tracking();
        s.sigma_r.clear();
        assert!(s.validate().is_err());
        let mut s = IterationSchedule::tracking();
        s.r_t[0] = -1.0;
        assert!(s.validate().is_err());
        let mut s = IterationSchedule::tracking();
        s.n_corr_iterations = 0;
        assert!(s.validate().is_err());
    }

    #[test]
    fn refinement_preset_values() {
        let cfg = TrackerConfig::refinement();
        assert_eq!(cfg.schedule.r_t, vec![300.0, 250.0, 100.0]);
        assert_eq!(cfg.schedule.sigma_d, vec![100.0, 50.0, 20.0]);
        assert_eq!(cfg.schedule.n_corr_iterations, 7);
        assert_eq!(cfg.lambda_t, 100.0);
        assert_eq!(cfg.stride, 0.010);
        assert_eq!(cfg.mode, TrackerMode::Refinement);
        assert!(!cfg.use_occlusion_handling);
    }

    #[test]
    fn default_regularizers_match_tracking_values() {
        let cfg = TrackerConfig::default();
        assert_eq!(cfg.lambda_r, Vec3::from_element(1000.0));
        assert_eq!(cfg.lambda_t, 30000.0);
        assert_eq!(cfg.s_h, 0.5);
        assert_eq!(cfg.alpha_h, 0.43);
        assert_eq!(cfg.alpha_s, 1.3);
    }

    #[test]
    fn symmetry_constraint_overrides_lambda_r() {
        let mut cfg = TrackerConfig::default();
        cfg.symmetry_constraint(Vec3::new(1000.0, 1000.0, 70000.0));
        assert_eq!(cfg.lambda_r.z, 70000.0);
    }
}
