//! Subcommand implementations.

use std::fs;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use icg_core::image::{ColorImage, DepthImage};
use icg_core::mesh::{load_obj, TriangleMesh};
use icg_core::metrics::{
    add_error, adds_error, auc_score, auc_score_scaled, relative_pose, rms_errors,
    tracking_success, PoseTrajectory,
};
use icg_core::scene;
use icg_core::tracker::{TrackerMode, TrackerState};
use icg_core::viewpoint::{generate_model, SparseViewpointModel};
use icg_core::PoseSE3;

use crate::config::{write_manifest, RunConfig};

fn require(path: &Option<PathBuf>, key: &str) -> Result<PathBuf> {
    path.clone().ok_or_else(|| anyhow!("[io] {key} is required for this command"))
}

fn load_mesh_file(path: &Path) -> Result<TriangleMesh> {
    let bytes = fs::read(path).with_context(|| format!("reading mesh {}", path.display()))?;
    load_obj(&bytes).with_context(|| format!("parsing mesh {}", path.display()))
}

fn load_model_file(path: &Path) -> Result<SparseViewpointModel> {
    let bytes = fs::read(path).with_context(|| format!("reading model {}", path.display()))?;
    SparseViewpointModel::deserialize(&bytes)
        .with_context(|| format!("parsing model {}", path.display()))
}

fn write_manifest_file(config: &RunConfig, subcommand: &str) -> Result<()> {
    fs::create_dir_all(&config.io.output_dir)?;
    let path = config.io.output_dir.join("run_manifest.ini");
    fs::write(&path, write_manifest(config, subcommand))
        .with_context(|| format!("writing manifest {}", path.display()))
}

fn color_frame_path(dir: &Path, frame: u64) -> PathBuf {
    dir.join(format!("color_{frame:06}.ppm"))
}

fn depth_frame_path(dir: &Path, frame: u64) -> PathBuf {
    dir.join(format!("depth_{frame:06}.pgm"))
}

fn read_frame(color_dir: &Path, depth_dir: &Path, frame: u64) -> Result<(ColorImage, DepthImage)> {
    let color_path = color_frame_path(color_dir, frame);
    let mut r = BufReader::new(
        fs::File::open(&color_path)
            .with_context(|| format!("opening {}", color_path.display()))?,
    );
    let color = ColorImage::read_ppm(&mut r)?;
    let depth_path = depth_frame_path(depth_dir, frame);
    let mut r = BufReader::new(
        fs::File::open(&depth_path)
            .with_context(|| format!("opening {}", depth_path.display()))?,
    );
    let depth = DepthImage::read_pgm(&mut r)?;
    Ok((color, depth))
}

/// Renders the sparse viewpoint model for a mesh and writes the model blob.
pub fn generate_model_cmd(config: &RunConfig, seed: Option<u64>) -> Result<()> {
    let mut config = config.clone();
    if let Some(seed) = seed {
        config.model.seed = seed;
    }
    let mesh_path = require(&config.io.mesh, "mesh")?;
    let model_path = require(&config.io.model, "model")?;
    let mesh = load_mesh_file(&mesh_path)?;

    let start = Instant::now();
    let model = generate_model(&mesh, &config.model)?;
    if let Some(parent) = model_path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    fs::write(&model_path, model.serialize())
        .with_context(|| format!("writing model {}", model_path.display()))?;
    write_manifest_file(&config, "generate-model")?;
    eprintln!(
        "generated {} views in {:.2} s -> {}",
        model.views.len(),
        start.elapsed().as_secs_f64(),
        model_path.display()
    );
    Ok(())
}

/// Renders a synthetic RGB-D sequence with ground truth.
pub fn generate_scene_cmd(config: &RunConfig, seed: Option<u64>) -> Result<()> {
    let mut config = config.clone();
    if let Some(seed) = seed {
        config.scene.seed = seed;
    }
    let mesh_path = require(&config.io.mesh, "mesh")?;
    let mesh = load_mesh_file(&mesh_path)?;

    let color_dir = config.io.color_dir.clone().unwrap_or_else(|| config.io.output_dir.clone());
    let depth_dir = config.io.depth_dir.clone().unwrap_or_else(|| config.io.output_dir.clone());
    fs::create_dir_all(&color_dir)?;
    fs::create_dir_all(&depth_dir)?;

    let sequence = scene::generate_sequence(&mesh, &config.scene)?;
    for (k, frame) in sequence.frames.iter().enumerate() {
        let mut w = BufWriter::new(fs::File::create(color_frame_path(&color_dir, k as u64))?);
        frame.color.write_ppm(&mut w)?;
        let mut w = BufWriter::new(fs::File::create(depth_frame_path(&depth_dir, k as u64))?);
        frame.depth.write_pgm(&mut w)?;
    }

    let gt_path = config
        .io
        .gt_trajectory
        .clone()
        .unwrap_or_else(|| config.io.output_dir.join("gt_trajectory.txt"));
    fs::create_dir_all(&config.io.output_dir)?;
    let mut w = BufWriter::new(fs::File::create(&gt_path)?);
    sequence.ground_truth.write_to(&mut w)?;
    w.flush()?;

    write_manifest_file(&config, "generate-scene")?;
    eprintln!("wrote {} frames and {}", sequence.frames.len(), gt_path.display());
    Ok(())
}

fn initial_pose(config: &RunConfig) -> Result<PoseSE3> {
    if let Some(pose) = config.io.initial_pose {
        return Ok(pose);
    }
    if let Some(gt_path) = &config.io.gt_trajectory {
        let mut r = BufReader::new(fs::File::open(gt_path)?);
        let gt = PoseTrajectory::read_from(&mut r)?;
        if let Some(&(_, pose)) = gt.entries().first() {
            return Ok(pose);
        }
    }
    bail!("track needs [io] initial_pose or a non-empty gt_trajectory for initialization")
}

fn build_tracker(config: &RunConfig, pose: PoseSE3) -> Result<TrackerState> {
    let model_path = require(&config.io.model, "model")?;
    let model = Arc::new(load_model_file(&model_path)?);
    TrackerState::new(
        model,
        config.camera_color,
        config.camera_depth,
        config.depth_from_color,
        config.tracker.clone(),
        pose,
    )
    .map_err(|e| anyhow!("{e}"))
}

/// Tracks `color_%06d.ppm` / `depth_%06d.pgm` pairs and writes the estimated
/// trajectory plus a per-frame timing breakdown.
pub fn track_cmd(config: &RunConfig) -> Result<()> {
    if config.tracker.mode != TrackerMode::Tracking {
        bail!("track requires [tracker] mode = tracking");
    }
    let color_dir = require(&config.io.color_dir, "color_dir")?;
    let depth_dir = require(&config.io.depth_dir, "depth_dir")?;

    let mut n_frames = 0u64;
    while color_frame_path(&color_dir, n_frames).exists() {
        n_frames += 1;
    }
    if n_frames == 0 {
        bail!("no frames found in {}", color_dir.display());
    }

    let init = initial_pose(config)?;
    let mut tracker = build_tracker(config, init)?;

    let mut estimate = PoseTrajectory::new();
    estimate.push(0, init)?;

    fs::create_dir_all(&config.io.output_dir)?;
    let timing_path = config.io.output_dir.join("timing.csv");
    let mut timing = BufWriter::new(fs::File::create(&timing_path)?);
    writeln!(
        timing,
        "frame,correspondence_lines_us,correspondence_points_us,derivatives_us,histograms_us,other_us,total_us"
    )?;

    let (color, depth) = read_frame(&color_dir, &depth_dir, 0)?;
    tracker.init_histograms(&color, &depth);

    for frame in 1..n_frames {
        let (color, depth) = read_frame(&color_dir, &depth_dir, frame)?;
        let result = tracker.track_frame(&color, &depth);
        if result.tracking_lost {
            eprintln!("warning: tracking lost at frame {frame} (pose kept)");
        }
        estimate.push(frame, result.pose)?;
        let t = &result.timings;
        writeln!(
            timing,
            "{frame},{:.1},{:.1},{:.1},{:.1},{:.1},{:.1}",
            t.correspondence_lines_us,
            t.correspondence_points_us,
            t.derivatives_us,
            t.histograms_us,
            t.other_us,
            t.total_us()
        )?;
    }
    timing.flush()?;

    let traj_path = config
        .io
        .est_trajectory
        .clone()
        .unwrap_or_else(|| config.io.output_dir.join("trajectory.txt"));
    let mut w = BufWriter::new(fs::File::create(&traj_path)?);
    estimate.write_to(&mut w)?;
    w.flush()?;

    write_manifest_file(config, "track")?;
    eprintln!("tracked {} frames -> {}", n_frames, traj_path.display());
    Ok(())
}

/// Refines every pose of an input trajectory on its frame.
pub fn refine_cmd(config: &RunConfig) -> Result<()> {
    if config.tracker.mode != TrackerMode::Refinement {
        bail!("refine requires [tracker] mode = refinement");
    }
    let color_dir = require(&config.io.color_dir, "color_dir")?;
    let depth_dir = require(&config.io.depth_dir, "depth_dir")?;
    let input_path = require(&config.io.input_trajectory, "input_trajectory")?;

    let mut r = BufReader::new(fs::File::open(&input_path)?);
    let input = PoseTrajectory::read_from(&mut r)?;
    if input.is_empty() {
        bail!("input trajectory {} is empty", input_path.display());
    }

    let mut tracker = build_tracker(config, input.entries()[0].1)?;
    let mut refined = PoseTrajectory::new();
    for &(frame, pose) in input.entries() {
        let (color, depth) = read_frame(&color_dir, &depth_dir, frame)?;
        let result = tracker.refine_pose(&color, &depth, pose);
        if result.tracking_lost {
            eprintln!("warning: refinement found no correspondences at frame {frame}");
        }
        refined.push(frame, result.pose)?;
    }

    fs::create_dir_all(&config.io.output_dir)?;
    let traj_path = config
        .io
        .est_trajectory
        .clone()
        .unwrap_or_else(|| config.io.output_dir.join("trajectory.txt"));
    let mut w = BufWriter::new(fs::File::create(&traj_path)?);
    refined.write_to(&mut w)?;
    w.flush()?;

    write_manifest_file(config, "refine")?;
    eprintln!("refined {} poses -> {}", refined.len(), traj_path.display());
    Ok(())
}

/// Which metric lines `evaluate` prints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum MetricSelection {
    All,
    Add,
    Adds,
    Auc,
    Rms,
    Success,
}

/// Compares an estimated trajectory against ground truth and prints a
/// fixed-order `key=value` report.
pub fn evaluate_cmd(
    config: &RunConfig,
    metric: MetricSelection,
    per_frame_csv: Option<&Path>,
) -> Result<String> {
    let est_path = require(&config.io.est_trajectory, "est_trajectory")?;
    let gt_path = require(&config.io.gt_trajectory, "gt_trajectory")?;
    let mesh_path = require(&config.io.mesh, "mesh")?;
    let mesh = load_mesh_file(&mesh_path)?;

    let mut r = BufReader::new(fs::File::open(&est_path)?);
    let est = PoseTrajectory::read_from(&mut r)?;
    let mut r = BufReader::new(fs::File::open(&gt_path)?);
    let gt = PoseTrajectory::read_from(&mut r)?;
    if est.len() != gt.len() {
        bail!("trajectory lengths differ: {} vs {}", est.len(), gt.len());
    }

    let mut add_errors = Vec::with_capacity(est.len());
    let mut adds_errors = Vec::with_capacity(est.len());
    for (&(fe, pe), &(fg, pg)) in est.entries().iter().zip(gt.entries()) {
        if fe != fg {
            bail!("frame indices differ: {fe} vs {fg}");
        }
        let rel = relative_pose(&pe, &pg);
        add_errors.push(add_error(&mesh.vertices, &rel));
        adds_errors.push(adds_error(&mesh.vertices, &rel));
    }

    if let Some(csv_path) = per_frame_csv {
        let mut w = BufWriter::new(fs::File::create(csv_path)?);
        writeln!(w, "frame,add_m,adds_m")?;
        for ((&(frame, _), add), adds) in
            est.entries().iter().zip(&add_errors).zip(&adds_errors)
        {
            writeln!(w, "{frame},{add},{adds}")?;
        }
        w.flush()?;
    }

    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let mut report = String::new();
    report.push_str(&format!("frames={}\n", est.len()));
    if matches!(metric, MetricSelection::All | MetricSelection::Add) {
        report.push_str(&format!("add_mean_m={}\n", mean(&add_errors)));
    }
    if matches!(metric, MetricSelection::All | MetricSelection::Adds) {
        report.push_str(&format!("adds_mean_m={}\n", mean(&adds_errors)));
    }
    if matches!(metric, MetricSelection::All | MetricSelection::Auc) {
        report.push_str(&format!("auc_add={}\n", auc_score(&add_errors, 0.1)?));
        report.push_str(&format!("auc_adds={}\n", auc_score(&adds_errors, 0.1)?));
        report.push_str(&format!(
            "auc_add_scaled={}\n",
            auc_score_scaled(&add_errors, mesh.diameter())?
        ));
    }
    if matches!(metric, MetricSelection::All | MetricSelection::Rms) {
        let rms = rms_errors(&est, &gt)?;
        report.push_str(&format!("rms_x_mm={}\n", rms.x_mm));
        report.push_str(&format!("rms_y_mm={}\n", rms.y_mm));
        report.push_str(&format!("rms_z_mm={}\n", rms.z_mm));
        report.push_str(&format!("rms_roll_deg={}\n", rms.roll_deg));
        report.push_str(&format!("rms_pitch_deg={}\n", rms.pitch_deg));
        report.push_str(&format!("rms_yaw_deg={}\n", rms.yaw_deg));
        report.push_str(&format!("rms_excluded_frames={}\n", rms.excluded_frames));
    }
    if matches!(metric, MetricSelection::All | MetricSelection::Success) {
        report.push_str(&format!("success_rate={}\n", tracking_success(&est, &gt)?));
    }
    print!("{report}");
    Ok(report)
}

/// Draws projected contour points over the color frames.
pub fn overlay_cmd(config: &RunConfig) -> Result<()> {
    let color_dir = require(&config.io.color_dir, "color_dir")?;
    let est_path = require(&config.io.est_trajectory, "est_trajectory")?;
    let model_path = require(&config.io.model, "model")?;
    let model = load_model_file(&model_path)?;

    let mut r = BufReader::new(fs::File::open(&est_path)?);
    let trajectory = PoseTrajectory::read_from(&mut r)?;
    fs::create_dir_all(&config.io.output_dir)?;

    const MARKER: [u8; 3] = [255, 230, 40];
    for &(frame, pose) in trajectory.entries() {
        let color_path = color_frame_path(&color_dir, frame);
        let mut rd = BufReader::new(fs::File::open(&color_path)?);
        let mut image = ColorImage::read_ppm(&mut rd)?;

        let view = model.closest_view(&pose);
        for cp in &view.contour_points {
            let cam = pose.transform_point(&cp.point);
            if cam.z <= 0.0 {
                continue;
            }
            let Ok(px) = config.camera_color.project(&cam) else { continue };
            let (cx, cy) = (px.x.floor() as i64, px.y.floor() as i64);
            for (dx, dy) in [(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)] {
                let (x, y) = (cx + dx, cy + dy);
                if image.contains(x, y) {
                    image.set(x as u32, y as u32, MARKER);
                }
            }
        }

        let out_path = config.io.output_dir.join(format!("overlay_{frame:06}.ppm"));
        let mut w = BufWriter::new(fs::File::create(&out_path)?);
        image.write_ppm(&mut w)?;
    }

    write_manifest_file(config, "overlay")?;
    eprintln!("wrote {} overlays to {}", trajectory.len(), config.io.output_dir.display());
    Ok(())
}
