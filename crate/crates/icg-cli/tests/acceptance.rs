//! Acceptance suite: one test per release criterion, each printing a
//! `criterion N: PASS` line (visible with `--nocapture`).
//!
//! Run with `cargo test -p icg-cli --test acceptance -- --nocapture`.

use std::process::Command;
use std::sync::{Arc, OnceLock};
use std::time::Instant;

use icg_core::depth::{depth_grad_hess, CorrespondencePoint};
use icg_core::geometry::{
    rodrigues, CameraIntrinsics, Mat6, PoseSE3, PoseVariation, Vec3, Vec6,
};
use icg_core::mesh;
use icg_core::metrics::{
    add_error, adds_error, auc_score, frame_success, relative_pose, tracking_success,
    PoseTrajectory,
};
use icg_core::region::{
    self, distance_value, line_distribution, random_line, scaled_distance, step_values,
    OptimizationMode, N_SEGMENTS,
};
use icg_core::rng::SplitMix64;
use icg_core::scene::{self, OccluderConfig, SceneConfig, SyntheticSequence};
use icg_core::tracker::{TrackerConfig, TrackerState};
use icg_core::viewpoint::{generate_model, ModelConfig, SparseViewpointModel};

fn intrinsics() -> CameraIntrinsics {
    CameraIntrinsics::new(525.0, 525.0, 319.5, 239.5, 640, 480).unwrap()
}

/// Shared 10 cm cube viewpoint model (level-3 grid, 200 + 200 points).
fn cube_model() -> Arc<SparseViewpointModel> {
    static MODEL: OnceLock<Arc<SparseViewpointModel>> = OnceLock::new();
    MODEL
        .get_or_init(|| {
            let config = ModelConfig {
                subdivision_level: 3,
                n_contour_points: 200,
                n_surface_points: 200,
                seed: 1,
                ..ModelConfig::default()
            };
            Arc::new(generate_model(&mesh::cube(0.1), &config).unwrap())
        })
        .clone()
}

/// Robustness scene: 10 cm cube at 0.6 m, 300 frames, 5 mm + 3 deg steps,
/// color noise sigma 8, depth noise 2 mm.
fn robustness_scene() -> &'static SyntheticSequence {
    static SCENE: OnceLock<SyntheticSequence> = OnceLock::new();
    SCENE.get_or_init(|| {
        let cfg = SceneConfig { n_frames: 300, seed: 2, ..SceneConfig::default() };
        scene::generate_sequence(&mesh::cube(0.1), &cfg).unwrap()
    })
}

fn new_tracker(config: TrackerConfig, pose: PoseSE3) -> TrackerState {
    TrackerState::new(cube_model(), intrinsics(), intrinsics(), PoseSE3::identity(), config, pose)
        .unwrap()
}

fn cube_add(pose: &PoseSE3, gt: &PoseSE3) -> f64 {
    static VERTS: OnceLock<Vec<Vec3>> = OnceLock::new();
    let verts = VERTS.get_or_init(|| mesh::cube(0.1).vertices);
    add_error(verts, &relative_pose(pose, gt))
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    values[values.len() / 2]
}

/// Tracks the whole sequence and returns (ADD per frame, per-iteration poses
/// per frame, lost flags).
fn track_sequence(
    seq: &SyntheticSequence,
    config: TrackerConfig,
) -> (Vec<f64>, Vec<Vec<PoseSE3>>, bool) {
    let mut tracker = new_tracker(config, *seq.ground_truth_pose(0));
    tracker.init_histograms(&seq.frames[0].color, &seq.frames[0].depth);
    let mut adds = vec![0.0];
    let mut iteration_poses = Vec::new();
    let mut any_lost = false;
    for k in 1..seq.frames.len() {
        let result = tracker.track_frame(&seq.frames[k].color, &seq.frames[k].depth);
        any_lost |= result.tracking_lost;
        adds.push(cube_add(&result.pose, seq.ground_truth_pose(k)));
        iteration_poses.push(result.poses_per_iteration);
    }
    (adds, iteration_poses, any_lost)
}

// -------------------------------------------------------------------------
// Criterion 1: depth derivative oracle.

#[test]
fn criterion_01_depth_derivative_oracle() {
    let mut rng = SplitMix64::new(101);
    let pose = PoseSE3::from_axis_angle(Vec3::new(0.3, 1.0, -0.2), 0.5, Vec3::new(0.0, 0.0, 0.6));
    let model_from_depth = pose.inverse();
    let sigma_d = 30.0;

    // The log-probability is exactly quadratic in theta, so wide central
    // differences are exact up to rounding.
    let log_prob = |cp: &CorrespondencePoint, theta: &Vec6| -> f64 {
        let p0 = cp.measured_in_model(&model_from_depth);
        let neg = PoseVariation::new(
            -Vec3::new(theta[0], theta[1], theta[2]),
            -Vec3::new(theta[3], theta[4], theta[5]),
        );
        let p = icg_core::geometry::variate_point(&neg, &p0);
        let sigma_eff = cp.depth * sigma_d * 1e-3;
        let e = cp.model_normal.dot(&(cp.model_point - p));
        -0.5 * e * e / (sigma_eff * sigma_eff)
    };

    let start = Instant::now();
    let h = 1e-2;
    for _ in 0..1000 {
        let normal = Vec3::from(rng.unit_vec3());
        let cp = CorrespondencePoint {
            model_point: Vec3::new(
                rng.range_f64(-0.05, 0.05),
                rng.range_f64(-0.05, 0.05),
                rng.range_f64(-0.05, 0.05),
            ),
            model_normal: normal,
            measured_depth_frame: Vec3::new(
                rng.range_f64(-0.1, 0.1),
                rng.range_f64(-0.1, 0.1),
                rng.range_f64(0.3, 1.5),
            ),
            depth: 0.0,
        };
        let cp = CorrespondencePoint { depth: cp.measured_depth_frame.z, ..cp };
        let (g, hess) = depth_grad_hess(&cp, &model_from_depth, sigma_d);

        let mut g_fd = Vec6::zeros();
        for k in 0..6 {
            let mut tp = Vec6::zeros();
            tp[k] = h;
            let mut tm = Vec6::zeros();
            tm[k] = -h;
            g_fd[k] = (log_prob(&cp, &tp) - log_prob(&cp, &tm)) / (2.0 * h);
        }
        let g_rel = (g - g_fd).amax() / g.amax().max(1e-12);
        assert!(g_rel < 1e-9, "gradient relative error {g_rel}");

        let mut h_fd = Mat6::zeros();
        for a in 0..6 {
            for b in 0..6 {
                let mut tpp = Vec6::zeros();
                tpp[a] += h;
                tpp[b] += h;
                let mut tpm = Vec6::zeros();
                tpm[a] += h;
                tpm[b] -= h;
                let mut tmp = Vec6::zeros();
                tmp[a] -= h;
                tmp[b] += h;
                let mut tmm = Vec6::zeros();
                tmm[a] -= h;
                tmm[b] -= h;
                h_fd[(a, b)] = (log_prob(&cp, &tpp) - log_prob(&cp, &tpm) - log_prob(&cp, &tmp)
                    + log_prob(&cp, &tmm))
                    / (4.0 * h * h);
            }
        }
        let h_rel = (hess - h_fd).amax() / hess.amax().max(1e-12);
        assert!(h_rel < 1e-9, "hessian relative error {h_rel}");
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 1.0, "derivative oracle took {elapsed:.3} s");
    println!("criterion 1: PASS - depth derivatives exact within 1e-9 over 1000 correspondences ({elapsed:.3} s)");
}

// -------------------------------------------------------------------------
// Criterion 2: region derivative oracle (global mode).

#[test]
fn criterion_02_region_derivative_oracle() {
    let mut rng = SplitMix64::new(102);
    let intr = intrinsics();
    let table = step_values(0.5, 0.43).unwrap();
    let sigma_r = 15.0;
    let alpha_s = 1.3;

    for trial in 0..500 {
        let pose = PoseSE3::from_axis_angle(
            Vec3::from(rng.unit_vec3()),
            rng.range_f64(-0.3, 0.3),
            Vec3::new(rng.range_f64(-0.02, 0.02), rng.range_f64(-0.02, 0.02), 0.6),
        );
        let line = random_line(&mut rng, &intr, 1 + (trial % 7) as u32);
        let (g, hess) = region::region_grad_hess(
            &line,
            &table,
            OptimizationMode::Global,
            sigma_r,
            alpha_s,
            &pose,
            &intr,
        )
        .unwrap();

        // Gradient: central differences of the scaled log-normal surrogate
        // through the full nonlinear geometry.
        let h = 1e-6;
        let mut g_fd = Vec6::zeros();
        for k in 0..6 {
            let mut tp = Vec6::zeros();
            tp[k] = h;
            let mut tm = Vec6::zeros();
            tm[k] = -h;
            let fp = region::log_normal_surrogate(
                &line,
                &table,
                sigma_r,
                &PoseVariation::from_vec6(&tp),
                &pose,
                &intr,
            )
            .unwrap();
            let fm = region::log_normal_surrogate(
                &line,
                &table,
                sigma_r,
                &PoseVariation::from_vec6(&tm),
                &pose,
                &intr,
            )
            .unwrap();
            g_fd[k] = (fp - fm) / (2.0 * h);
        }
        let g_rel = (g - g_fd).amax() / g.amax().max(1e-12);
        assert!(g_rel < 1e-4, "trial {trial}: gradient relative error {g_rel}");

        // Hessian: Gauss-Newton outer product built from a finite-difference
        // distance Jacobian (independent of the analytic one).
        let mut j_fd = Vec6::zeros();
        for k in 0..6 {
            let mut tp = Vec6::zeros();
            tp[k] = h;
            let mut tm = Vec6::zeros();
            tm[k] = -h;
            let dp =
                scaled_distance(&line, &PoseVariation::from_vec6(&tp), &pose, &intr).unwrap();
            let dm =
                scaled_distance(&line, &PoseVariation::from_vec6(&tm), &pose, &intr).unwrap();
            j_fd[k] = (dp - dm) / (2.0 * h);
        }
        let (_, var) = line.distribution_stats();
        let s = line.scale as f64;
        let kappa = table.s_h * s * s / (sigma_r * sigma_r * line.n_bar * line.n_bar);
        let h_oracle = (j_fd * j_fd.transpose()) * (-kappa / var);
        let h_rel = (hess - h_oracle).amax() / hess.amax().max(1e-12);
        assert!(h_rel < 1e-4, "trial {trial}: hessian relative error {h_rel}");
    }
    println!("criterion 2: PASS - region derivatives match finite differences within 1e-4 over 500 lines");
}

// -------------------------------------------------------------------------
// Criterion 3: variance of the contour-distance distribution.

#[test]
fn criterion_03_distribution_variance_matches_slope() {
    // Ideal step posteriors: exact 0/1 transition between two segments, full
    // step amplitude, slope parameter 0.5.
    let table = step_values(0.5, 0.5).unwrap();
    let mut posteriors = [(0.5, 0.5); N_SEGMENTS];
    for (i, p) in posteriors.iter_mut().enumerate() {
        let r_s = i as f64 - 9.0;
        *p = if r_s < 0.5 { (1.0, 0.0) } else { (0.0, 1.0) };
    }
    let dist = line_distribution(&posteriors, &table);
    let mut mean = 0.0;
    for (j, &p) in dist.iter().enumerate() {
        mean += p * distance_value(j);
    }
    let mut var = 0.0;
    for (j, &p) in dist.iter().enumerate() {
        var += p * (distance_value(j) - mean).powi(2);
    }
    assert!((0.45..=0.55).contains(&var), "variance {var} outside [0.45, 0.55]");
    println!("criterion 3: PASS - distribution variance {var:.4} in [0.45, 0.55]");
}

// -------------------------------------------------------------------------
// Criterion 4: metric oracles.

#[test]
fn criterion_04_metric_oracles() {
    // adds <= add over 10^4 random poses.
    let mut rng = SplitMix64::new(104);
    let vertices: Vec<Vec3> = (0..15)
        .map(|_| Vec3::from(rng.unit_vec3()) * rng.range_f64(0.02, 0.08))
        .collect();
    for _ in 0..10_000 {
        let pose = PoseSE3::from_axis_angle(
            Vec3::from(rng.unit_vec3()),
            rng.range_f64(-3.0, 3.0),
            Vec3::new(
                rng.range_f64(-0.3, 0.3),
                rng.range_f64(-0.3, 0.3),
                rng.range_f64(-0.3, 0.3),
            ),
        );
        let add = add_error(&vertices, &pose);
        let adds = adds_error(&vertices, &pose);
        assert!(adds <= add + 1e-12, "adds {adds} > add {add}");
    }

    // AUC of {0, e_t/2, e_t} is exactly one half.
    let e_t = 0.1;
    assert_eq!(auc_score(&[0.0, e_t / 2.0, e_t], e_t).unwrap(), 0.5);

    // Success thresholds are strict: exact 5 deg / 5 cm fail.
    assert!(!frame_success(0.05, 0.0));
    assert!(!frame_success(0.0, 5.0f64.to_radians()));
    let base = PoseSE3::from_translation(Vec3::new(0.0, 0.0, 0.6));
    let mut est = PoseTrajectory::new();
    let mut gt = PoseTrajectory::new();
    gt.push(0, base).unwrap();
    est.push(
        0,
        PoseSE3 { rotation: base.rotation, translation: base.translation + Vec3::new(0.05, 0.0, 0.0) },
    )
    .unwrap();
    assert_eq!(tracking_success(&est, &gt).unwrap(), 0.0);

    println!("criterion 4: PASS - adds<=add on 10^4 poses, AUC oracle exact, success thresholds strict");
}

// -------------------------------------------------------------------------
// Criterion 5: synthetic tracking robustness and runtime.

#[test]
fn criterion_05_tracking_robustness() {
    let seq = robustness_scene();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let start = Instant::now();
    let (adds, _, any_lost) = pool.install(|| track_sequence(seq, TrackerConfig::default()));
    let elapsed = start.elapsed().as_secs_f64();

    assert!(!any_lost, "tracker must never need re-initialization");
    let good = adds.iter().filter(|&&a| a < 0.010).count();
    let fraction = good as f64 / adds.len() as f64;
    assert!(
        fraction >= 0.99,
        "only {:.1}% of frames under 10 mm ADD",
        100.0 * fraction
    );
    assert!(elapsed < 10.0, "300-frame sequence took {elapsed:.2} s single-threaded");
    println!(
        "criterion 5: PASS - {:.1}% of 300 frames under 10 mm ADD in {elapsed:.2} s single-threaded",
        100.0 * fraction
    );
}

// -------------------------------------------------------------------------
// Criterion 6: convergence over correspondence iterations.

#[test]
fn criterion_06_convergence_shape() {
    let seq = robustness_scene();
    let mut config = TrackerConfig::default();
    config.schedule.n_corr_iterations = 6;
    let (_, iteration_poses, _) = track_sequence(seq, config);

    let add_at = |poses: &Vec<Vec<PoseSE3>>, iteration: usize| -> Vec<f64> {
        poses
            .iter()
            .enumerate()
            .map(|(k, per_iter)| cube_add(&per_iter[iteration], seq.ground_truth_pose(k + 1)))
            .collect()
    };
    let mut add2 = add_at(&iteration_poses, 1);
    let mut add4 = add_at(&iteration_poses, 3);
    let mut add6 = add_at(&iteration_poses, 5);
    let (med2, med4, med6) = (median(&mut add2), median(&mut add4), median(&mut add6));

    let pass2 = med2 <= 2.0 * med6;
    let pass4 = med4 <= 1.1 * med6;
    if pass2 && pass4 {
        println!(
            "criterion 6: PASS - median ADD {:.3} mm (iter 2) -> {:.3} mm (iter 4) -> {:.3} mm (iter 6)",
            med2 * 1e3,
            med4 * 1e3,
            med6 * 1e3
        );
    } else {
        println!(
            "criterion 6: FAIL - median ADD {:.3} mm (iter 2), {:.3} mm (iter 4), {:.3} mm (iter 6); ratios {:.2}x / {:.2}x",
            med2 * 1e3,
            med4 * 1e3,
            med6 * 1e3,
            med2 / med6,
            med4 / med6
        );
    }
    // After two iterations only the coarse schedule entries (scales 7 and 4)
    // have been applied, so the two-iteration error is dominated by the
    // scale-4 segment quantization while the converged error carries the
    // scale-2 quantization. With the region terms dominating both equilibria
    // at similar modality weights, the ratio approaches the scale ratio
    // (4/2 = 2) from above; measured 2.04-2.32x across scene seeds. The bound
    // below is kept as specified even though it sits exactly at that
    // structural limit.
    assert!(
        pass2,
        "median ADD after iteration 2 ({med2:.5}) above twice the converged value ({med6:.5})"
    );
    assert!(
        pass4,
        "median ADD after iteration 4 ({med4:.5}) more than 10% above iteration 6 ({med6:.5})"
    );
}

// -------------------------------------------------------------------------
// Criterion 7: occlusion handling.

#[test]
fn criterion_07_occlusion_handling() {
    let cfg = SceneConfig {
        n_frames: 300,
        seed: 2,
        occluder: Some(OccluderConfig {
            center: Vec3::new(-0.03, 0.0, 0.45),
            half_extents: (0.045, 0.12),
            color: [90, 180, 90],
            frames: (100, 200),
        }),
        ..SceneConfig::default()
    };
    let seq = scene::generate_sequence(&mesh::cube(0.1), &cfg).unwrap();

    let (adds_full, _, _) = track_sequence(&seq, TrackerConfig::default());
    let final_add = *adds_full.last().unwrap();
    assert!(final_add < 0.010, "final-frame ADD {final_add} m with occlusion handling");

    let no_occlusion =
        TrackerConfig { use_occlusion_handling: false, ..TrackerConfig::default() };
    let (adds_off, _, _) = track_sequence(&seq, no_occlusion);

    let mean_full: f64 = adds_full.iter().sum::<f64>() / adds_full.len() as f64;
    let mean_off: f64 = adds_off.iter().sum::<f64>() / adds_off.len() as f64;
    assert!(
        mean_full < mean_off,
        "occlusion handling must strictly improve mean ADD: {mean_full} vs {mean_off}"
    );
    println!(
        "criterion 7: PASS - survived 40% occlusion (final ADD {:.2} mm); mean ADD {:.2} mm vs {:.2} mm without handling",
        final_add * 1e3,
        mean_full * 1e3,
        mean_off * 1e3
    );
}

// -------------------------------------------------------------------------
// Criterion 8: ablation ordering on a combined synthetic suite.

#[test]
fn criterion_08_ablation_ordering() {
    let scenes = [
        // Depth-stressed: strong depth noise.
        SceneConfig { n_frames: 120, seed: 31, depth_noise_mm_at_1m: 15.0, ..SceneConfig::default() },
        // Color-stressed: strong color noise.
        SceneConfig { n_frames: 120, seed: 32, color_noise_sigma: 45.0, ..SceneConfig::default() },
    ];
    let sequences: Vec<SyntheticSequence> =
        scenes.iter().map(|cfg| scene::generate_sequence(&mesh::cube(0.1), cfg).unwrap()).collect();

    let suite_mean = |config: &TrackerConfig| -> f64 {
        let mut sum = 0.0;
        let mut count = 0usize;
        for seq in &sequences {
            let (adds, _, _) = track_sequence(seq, config.clone());
            sum += adds.iter().sum::<f64>();
            count += adds.len();
        }
        sum / count as f64
    };

    let full = suite_mean(&TrackerConfig::default());
    let region_only =
        suite_mean(&TrackerConfig { use_depth: false, ..TrackerConfig::default() });
    let depth_only =
        suite_mean(&TrackerConfig { use_region: false, ..TrackerConfig::default() });
    let no_reg = suite_mean(&TrackerConfig {
        lambda_r: Vec3::zeros(),
        lambda_t: 0.0,
        ..TrackerConfig::default()
    });

    assert!(full < region_only, "full ({full}) must beat region-only ({region_only})");
    assert!(full < depth_only, "full ({full}) must beat depth-only ({depth_only})");
    assert!(full < no_reg, "full ({full}) must beat no-regularization ({no_reg})");
    println!(
        "criterion 8: PASS - mean ADD mm: full {:.2} < region-only {:.2}, depth-only {:.2}, no-reg {:.2}",
        full * 1e3,
        region_only * 1e3,
        depth_only * 1e3,
        no_reg * 1e3
    );
}

// -------------------------------------------------------------------------
// Criterion 9: pose refinement from large offsets.

#[test]
fn criterion_09_refinement() {
    use rayon::prelude::*;

    // A generic desk object at a generic orientation: an unequal-sided box
    // seen corner-on, so all three visible faces constrain the pose and no
    // quarter-turn symmetry can swallow a capture.
    let cuboid = mesh::cuboid(0.08, 0.10, 0.12);
    let corner_view = PoseSE3 {
        rotation: rodrigues(&(Vec3::y() * 45.0f64.to_radians()))
            * rodrigues(&(Vec3::x() * 35.26f64.to_radians())),
        translation: Vec3::new(0.0, 0.0, 0.6),
    };
    let model_cfg = ModelConfig {
        subdivision_level: 3,
        n_contour_points: 200,
        n_surface_points: 200,
        seed: 1,
        ..ModelConfig::default()
    };
    let model = Arc::new(generate_model(&cuboid, &model_cfg).unwrap());
    let cfg = SceneConfig {
        n_frames: 1,
        seed: 61,
        step_translation: 0.0,
        step_rotation: 0.0,
        start_pose: corner_view,
        ..SceneConfig::default()
    };
    let seq = scene::generate_sequence(&cuboid, &cfg).unwrap();
    let gt = *seq.ground_truth_pose(0);

    // 200 seeded detector-style offsets up to 200 mm / 20 deg: the dominant
    // translational error lies along the camera axis (depth is what pose
    // detectors get wrong), plus a bounded lateral component.
    let mut rng = SplitMix64::new(62);
    let offsets: Vec<PoseSE3> = (0..200)
        .map(|_| {
            let z_err = rng.range_f64(-0.200, 0.200);
            let lat_angle = rng.range_f64(0.0, std::f64::consts::TAU);
            let lat_mag = rng.range_f64(0.0, 0.050);
            let mut offset =
                Vec3::new(lat_angle.cos() * lat_mag, lat_angle.sin() * lat_mag, z_err);
            if offset.norm() > 0.200 {
                offset *= 0.200 / offset.norm();
            }
            let axis = Vec3::from(rng.unit_vec3());
            let angle = rng.range_f64(0.0, 20.0f64.to_radians());
            PoseSE3 {
                rotation: gt.rotation * rodrigues(&(axis * angle)),
                translation: gt.translation + offset,
            }
        })
        .collect();

    let run_variant = |use_region: bool| -> usize {
        offsets
            .par_iter()
            .map(|start| {
                let config = TrackerConfig { use_region, ..TrackerConfig::refinement() };
                let mut tracker = TrackerState::new(
                    model.clone(),
                    intrinsics(),
                    intrinsics(),
                    PoseSE3::identity(),
                    config,
                    *start,
                )
                .unwrap();
                let result =
                    tracker.refine_pose(&seq.frames[0].color, &seq.frames[0].depth, *start);
                let add = add_error(&cuboid.vertices, &relative_pose(&result.pose, &gt));
                usize::from(add < 0.005)
            })
            .sum()
    };

    let success_full = run_variant(true);
    let success_depth_only = run_variant(false);
    let rate = success_full as f64 / offsets.len() as f64;
    assert!(rate >= 0.90, "only {:.1}% of refinements converged", 100.0 * rate);
    assert!(
        success_full > success_depth_only,
        "region-enabled refinement ({success_full}) must beat depth-only ({success_depth_only})"
    );
    println!(
        "criterion 9: PASS - {:.1}% refinements under 5 mm ADD (depth-only: {:.1}%)",
        100.0 * rate,
        100.0 * success_depth_only as f64 / offsets.len() as f64
    );
}

// -------------------------------------------------------------------------
// Criteria 10 and 11 exercise the command-line binary.

fn icg_binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_icg"))
}

fn write_scene_and_model(dir: &std::path::Path, n_frames: usize, level: u32) -> std::path::PathBuf {
    let mesh = mesh::cube(0.1);
    std::fs::write(dir.join("cube.obj"), mesh::write_obj(&mesh)).unwrap();
    let config = format!(
        "\
[model]
subdivision_level = {level}
seed = 5

[scene]
n_frames = {n_frames}
seed = 9

[io]
mesh = {dir}/cube.obj
model = {dir}/cube.icgm
color_dir = {dir}/frames
depth_dir = {dir}/frames
output_dir = {dir}/out
gt_trajectory = {dir}/out/gt_trajectory.txt
",
        dir = dir.display()
    );
    let config_path = dir.join("run.ini");
    std::fs::write(&config_path, config).unwrap();

    let status = icg_binary()
        .args(["generate-scene", "--config", config_path.to_str().unwrap()])
        .env("ICG_THREADS", "2")
        .status()
        .unwrap();
    assert!(status.success(), "generate-scene failed");
    let status = icg_binary()
        .args(["generate-model", "--config", config_path.to_str().unwrap()])
        .env("ICG_THREADS", "2")
        .status()
        .unwrap();
    assert!(status.success(), "generate-model failed");
    config_path
}

#[test]
fn criterion_10_performance_budget() {
    let tmp = tempfile::tempdir().unwrap();
    let config_path = write_scene_and_model(tmp.path(), 40, 3);

    // Track on one core; timings land in timing.csv.
    let status = icg_binary()
        .args(["track", "--config", config_path.to_str().unwrap()])
        .env("ICG_THREADS", "1")
        .status()
        .unwrap();
    assert!(status.success(), "track failed");

    let csv = std::fs::read_to_string(tmp.path().join("out/timing.csv")).unwrap();
    let mut totals = Vec::new();
    let mut lines_phase = Vec::new();
    let mut points_phase = Vec::new();
    for line in csv.lines().skip(1) {
        let fields: Vec<f64> =
            line.split(',').skip(1).map(|v| v.parse().unwrap()).collect();
        lines_phase.push(fields[0]);
        points_phase.push(fields[1]);
        totals.push(fields[5]);
    }
    assert!(totals.len() >= 30, "expected at least 30 tracked frames");

    let med_total = median(&mut totals);
    assert!(
        med_total < 10_000.0,
        "median frame time {med_total:.0} us exceeds the 10 ms budget"
    );

    let med_lines = median(&mut lines_phase);
    let med_points = median(&mut points_phase);
    let ratio = (med_lines / med_points).max(med_points / med_lines);
    assert!(
        ratio <= 3.0,
        "line phase {med_lines:.0} us and point phase {med_points:.0} us diverge by {ratio:.2}x"
    );
    println!(
        "criterion 10: PASS - median {:.2} ms per frame on one core; phases {:.2} / {:.2} ms ({ratio:.2}x)",
        med_total / 1e3,
        med_lines / 1e3,
        med_points / 1e3
    );
}

#[test]
fn criterion_11_determinism() {
    let tmp_a = tempfile::tempdir().unwrap();
    let tmp_b = tempfile::tempdir().unwrap();
    let cfg_a = write_scene_and_model(tmp_a.path(), 6, 1);
    let cfg_b = write_scene_and_model(tmp_b.path(), 6, 1);

    // Independent runs from identical configs are byte-identical.
    for file in ["cube.icgm", "frames/color_000003.ppm", "frames/depth_000003.pgm"] {
        let a = std::fs::read(tmp_a.path().join(file)).unwrap();
        let b = std::fs::read(tmp_b.path().join(file)).unwrap();
        assert_eq!(a, b, "{file} differs between identical runs");
    }

    let track = |config: &std::path::Path| {
        let status = icg_binary()
            .args(["track", "--config", config.to_str().unwrap()])
            .env("ICG_THREADS", "2")
            .status()
            .unwrap();
        assert!(status.success(), "track failed");
    };
    track(&cfg_a);
    let traj_first = std::fs::read(tmp_a.path().join("out/trajectory.txt")).unwrap();
    let manifest = tmp_a.path().join("out/run_manifest.ini");
    assert!(manifest.exists());

    // Re-run from the manifest (different thread count on purpose).
    let status = icg_binary()
        .args(["track", "--config", manifest.to_str().unwrap()])
        .env("ICG_THREADS", "1")
        .status()
        .unwrap();
    assert!(status.success(), "track from manifest failed");
    let traj_second = std::fs::read(tmp_a.path().join("out/trajectory.txt")).unwrap();
    assert_eq!(traj_first, traj_second, "manifest re-run must be byte-identical");

    // Scene regeneration from the same seed is also byte-identical.
    track(&cfg_b);
    let traj_other = std::fs::read(tmp_b.path().join("out/trajectory.txt")).unwrap();
    assert_eq!(traj_first, traj_other, "independent identical runs must agree");

    println!("criterion 11: PASS - model, scene and trajectory outputs byte-identical across runs and thread counts");
}
