//! INI-style run configuration.
//!
//! Sections: `[camera_color] [camera_depth] [tracker] [model] [io] [scene]`
//! plus the `[run]` section written into manifests. Every key has a default;
//! unknown keys and sections are errors so typos cannot silently fall back.
//! Tracker values use the units of the evaluation tables: pixels for sigma_r,
//! millimeters for sigma_d / r_t / stride. Keys of the scene section carry
//! explicit unit suffixes.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use icg_core::depth::OcclusionConfig;
use icg_core::geometry::{CameraIntrinsics, PoseSE3, Vec3};
use icg_core::scene::{OccluderConfig, SceneConfig};
use icg_core::tracker::{IterationSchedule, TrackerConfig, TrackerMode};
use icg_core::viewpoint::ModelConfig;

#[derive(Debug, Clone)]
pub struct IoPaths {
    pub mesh: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub color_dir: Option<PathBuf>,
    pub depth_dir: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub est_trajectory: Option<PathBuf>,
    pub gt_trajectory: Option<PathBuf>,
    pub input_trajectory: Option<PathBuf>,
    pub initial_pose: Option<PoseSE3>,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub camera_color: CameraIntrinsics,
    pub camera_depth: CameraIntrinsics,
    /// Fixed depth-camera-from-color-camera extrinsics.
    pub depth_from_color: PoseSE3,
    pub tracker: TrackerConfig,
    pub model: ModelConfig,
    pub scene: SceneConfig,
    pub io: IoPaths,
    /// Subcommand recorded in a manifest, if this config is one.
    pub manifest_subcommand: Option<String>,
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let sections = parse_ini(text)?;
    for name in sections.keys() {
        if !["camera_color", "camera_depth", "tracker", "model", "io", "scene", "run"]
            .contains(&name.as_str())
        {
            bail!("unknown section [{name}]");
        }
    }

    let mut cam_color = SectionReader::new(&sections, "camera_color");
    let camera_color = read_camera(&mut cam_color, 525.0, 525.0, 319.5, 239.5, 640, 480)?;
    cam_color.finish()?;

    let mut cam_depth = SectionReader::new(&sections, "camera_depth");
    let camera_depth = read_camera(
        &mut cam_depth,
        camera_color.fx,
        camera_color.fy,
        camera_color.px,
        camera_color.py,
        camera_color.width,
        camera_color.height,
    )?;
    let depth_from_color = match cam_depth.matrix16_opt("extrinsics")? {
        Some(m) => PoseSE3::from_matrix_rows(&m)
            .map_err(|e| anyhow!("[camera_depth] extrinsics: {e}"))?,
        None => PoseSE3::identity(),
    };
    cam_depth.finish()?;

    let tracker = read_tracker(&mut SectionReader::new(&sections, "tracker"))?;
    let model = read_model(&mut SectionReader::new(&sections, "model"), &camera_color)?;
    let scene = read_scene(
        &mut SectionReader::new(&sections, "scene"),
        &camera_color,
        &camera_depth,
        &depth_from_color,
    )?;
    let io = read_io(&mut SectionReader::new(&sections, "io"))?;

    let mut run = SectionReader::new(&sections, "run");
    let manifest_subcommand = run.string_opt("subcommand")?;
    run.finish()?;

    Ok(RunConfig {
        camera_color,
        camera_depth,
        depth_from_color,
        tracker,
        model,
        scene,
        io,
        manifest_subcommand,
    })
}

fn read_camera(
    r: &mut SectionReader,
    fx: f64,
    fy: f64,
    px: f64,
    py: f64,
    width: u32,
    height: u32,
) -> Result<CameraIntrinsics> {
    let fx = r.f64("fx", fx)?;
    let fy = r.f64("fy", fy)?;
    let px = r.f64("px", px)?;
    let py = r.f64("py", py)?;
    let width = r.u32("width", width)?;
    let height = r.u32("height", height)?;
    CameraIntrinsics::new(fx, fy, px, py, width, height)
        .map_err(|e| anyhow!("[{}] {e}", r.section))
}

fn read_tracker(r: &mut SectionReader) -> Result<TrackerConfig> {
    let mode = match r.string("mode", "tracking")?.as_str() {
        "tracking" => TrackerMode::Tracking,
        "refinement" => TrackerMode::Refinement,
        other => bail!("[tracker] mode must be `tracking` or `refinement`, got `{other}`"),
    };
    // Schedule defaults depend on the mode.
    let preset = match mode {
        TrackerMode::Tracking => IterationSchedule::tracking(),
        TrackerMode::Refinement => IterationSchedule::refinement(),
    };
    let refinement = mode == TrackerMode::Refinement;
    let preset_lambda_t = if refinement { 100.0 } else { 30000.0 };
    let preset_stride_mm = if refinement { 10.0 } else { 5.0 };

    let schedule = IterationSchedule {
        sigma_r: r.f64_list("sigma_r", &preset.sigma_r)?,
        sigma_d: r.f64_list("sigma_d", &preset.sigma_d)?,
        scale: r.u32_list("scale", &preset.scale)?,
        r_t: r.f64_list("r_t", &preset.r_t)?,
        n_corr_iterations: r.usize("n_corr_iterations", preset.n_corr_iterations)?,
        n_update_iterations: r.usize("n_update_iterations", preset.n_update_iterations)?,
    };
    schedule.validate().map_err(|e| anyhow!("[tracker] {e}"))?;

    let lambda_r_scalar = r.f64("lambda_r", 1000.0)?;
    let lambda_r = match r.f64_list_opt("lambda_r_axis")? {
        Some(values) if values.len() == 3 => Vec3::new(values[0], values[1], values[2]),
        Some(values) => bail!("[tracker] lambda_r_axis needs 3 values, got {}", values.len()),
        None => Vec3::from_element(lambda_r_scalar),
    };
    let lambda_t = r.f64("lambda_t", preset_lambda_t)?;
    if lambda_r.min() < 0.0 || lambda_t < 0.0 {
        bail!("[tracker] regularizers must be non-negative");
    }

    let config = TrackerConfig {
        schedule,
        lambda_r,
        lambda_t,
        s_h: r.f64("s_h", 0.5)?,
        alpha_h: r.f64("alpha_h", 0.43)?,
        alpha_s: r.f64("alpha_s", 1.3)?,
        histogram_learning_rate: r.f64("histogram_learning_rate", 0.2)?,
        stride: r.f64("stride", preset_stride_mm)? * 1e-3,
        occlusion: OcclusionConfig {
            region_extent: r.f64("occlusion_region", 20.0)? * 1e-3,
            samples_per_axis: r.u32("occlusion_samples", 5)?,
            threshold: r.f64("occlusion_threshold", 30.0)? * 1e-3,
        },
        use_occlusion_handling: r.bool("use_occlusion_handling", !refinement)?,
        use_region: r.bool("use_region", true)?,
        use_depth: r.bool("use_depth", true)?,
        min_valid_correspondences: r.usize("min_valid_correspondences", 10)?,
        mode,
        collect_nll: false,
    };
    if config.s_h <= 0.0 || !(0.0..=0.5).contains(&config.alpha_h) {
        bail!("[tracker] step-function parameters out of range");
    }
    if config.stride <= 0.0 {
        bail!("[tracker] stride must be positive");
    }
    r.finish()?;
    Ok(config)
}

fn read_model(r: &mut SectionReader, camera: &CameraIntrinsics) -> Result<ModelConfig> {
    let render_width = r.u32("render_width", camera.width)?;
    let render_height = r.u32("render_height", camera.height)?;
    // Scale the camera intrinsics to the requested render resolution.
    let sx = render_width as f64 / camera.width as f64;
    let sy = render_height as f64 / camera.height as f64;
    let intrinsics = CameraIntrinsics::new(
        camera.fx * sx,
        camera.fy * sy,
        camera.px * sx,
        camera.py * sy,
        render_width,
        render_height,
    )
    .map_err(|e| anyhow!("[model] render intrinsics: {e}"))?;

    let config = ModelConfig {
        subdivision_level: r.u32("subdivision_level", 4)?,
        radius: r.f64("radius", 0.8)?,
        n_contour_points: r.usize("n_contour_points", 200)?,
        n_surface_points: r.usize("n_surface_points", 200)?,
        intrinsics,
        seed: r.u64("seed", 0)?,
    };
    if config.radius <= 0.0 {
        bail!("[model] radius must be positive");
    }
    if config.n_contour_points == 0 || config.n_surface_points == 0 {
        bail!("[model] point counts must be positive");
    }
    r.finish()?;
    Ok(config)
}

fn read_scene(
    r: &mut SectionReader,
    camera_color: &CameraIntrinsics,
    camera_depth: &CameraIntrinsics,
    depth_from_color: &PoseSE3,
) -> Result<SceneConfig> {
    let defaults = SceneConfig::default();
    let start_pose = match r.matrix16_opt("start_pose")? {
        Some(m) => {
            PoseSE3::from_matrix_rows(&m).map_err(|e| anyhow!("[scene] start_pose: {e}"))?
        }
        None => defaults.start_pose,
    };
    let occluder = if r.bool("occluder_enabled", false)? {
        let center = r.f64_list_n("occluder_center_m", 3, &[-0.03, 0.0, 0.45])?;
        let half = r.f64_list_n("occluder_half_extents_m", 2, &[0.045, 0.12])?;
        let color = r.color("occluder_color", [90, 180, 90])?;
        let frames = r.f64_list_n("occluder_frames", 2, &[0.0, 0.0])?;
        Some(OccluderConfig {
            center: Vec3::new(center[0], center[1], center[2]),
            half_extents: (half[0], half[1]),
            color,
            frames: (frames[0] as usize, frames[1] as usize),
        })
    } else {
        // Accept-but-ignore the detail keys so manifests stay re-parseable.
        let _ = r.f64_list_opt("occluder_center_m")?;
        let _ = r.f64_list_opt("occluder_half_extents_m")?;
        let _ = r.string_opt("occluder_color")?;
        let _ = r.f64_list_opt("occluder_frames")?;
        None
    };

    let config = SceneConfig {
        n_frames: r.usize("n_frames", defaults.n_frames)?,
        intrinsics: *camera_color,
        intrinsics_depth: *camera_depth,
        depth_from_color: *depth_from_color,
        start_pose,
        step_translation: r.f64("step_translation_mm", defaults.step_translation * 1e3)? * 1e-3,
        step_rotation: r.f64("step_rotation_deg", defaults.step_rotation.to_degrees())?.to_radians(),
        wander_bound: r.f64("wander_bound_mm", defaults.wander_bound * 1e3)? * 1e-3,
        fg_color: r.color("fg_color", defaults.fg_color)?,
        bg_color: r.color("bg_color", defaults.bg_color)?,
        color_noise_sigma: r.f64("color_noise_sigma", defaults.color_noise_sigma)?,
        depth_noise_mm_at_1m: r.f64("depth_noise_mm", defaults.depth_noise_mm_at_1m)?,
        background_depth: r.f64_opt("background_depth_m")?,
        occluder,
        seed: r.u64("seed", 0)?,
    };
    if config.color_noise_sigma < 0.0 || config.depth_noise_mm_at_1m < 0.0 {
        bail!("[scene] noise sigmas must be non-negative");
    }
    r.finish()?;
    Ok(config)
}

fn read_io(r: &mut SectionReader) -> Result<IoPaths> {
    let io = IoPaths {
        mesh: r.path_opt("mesh")?,
        model: r.path_opt("model")?,
        color_dir: r.path_opt("color_dir")?,
        depth_dir: r.path_opt("depth_dir")?,
        output_dir: r.path_opt("output_dir")?.unwrap_or_else(|| PathBuf::from(".")),
        est_trajectory: r.path_opt("est_trajectory")?,
        gt_trajectory: r.path_opt("gt_trajectory")?,
        input_trajectory: r.path_opt("input_trajectory")?,
        initial_pose: match r.matrix16_opt("initial_pose")? {
            Some(m) => Some(
                PoseSE3::from_matrix_rows(&m).map_err(|e| anyhow!("[io] initial_pose: {e}"))?,
            ),
            None => None,
        },
    };
    r.finish()?;
    Ok(io)
}

/// Serializes the fully resolved configuration (canonical key order) plus the
/// `[run]` section, so re-running from the manifest reproduces the outputs.
pub fn write_manifest(config: &RunConfig, subcommand: &str) -> String {
    let mut out = String::new();
    let push = |out: &mut String, s: String| out.push_str(&s);

    push(&mut out, format!("[run]\nsubcommand = {subcommand}\n\n"));

    let cam = |out: &mut String, name: &str, c: &CameraIntrinsics| {
        push(out, format!("[{name}]\n"));
        push(out, format!("fx = {}\nfy = {}\npx = {}\npy = {}\n", c.fx, c.fy, c.px, c.py));
        push(out, format!("width = {}\nheight = {}\n", c.width, c.height));
    };
    cam(&mut out, "camera_color", &config.camera_color);
    out.push('\n');
    cam(&mut out, "camera_depth", &config.camera_depth);
    push(&mut out, format!("extrinsics = {}\n\n", matrix16(&config.depth_from_color)));

    let t = &config.tracker;
    push(&mut out, "[tracker]\n".to_string());
    push(
        &mut out,
        format!(
            "mode = {}\n",
            match t.mode {
                TrackerMode::Tracking => "tracking",
                TrackerMode::Refinement => "refinement",
            }
        ),
    );
    push(&mut out, format!("sigma_r = {}\n", join(&t.schedule.sigma_r)));
    push(&mut out, format!("sigma_d = {}\n", join(&t.schedule.sigma_d)));
    push(&mut out, format!("scale = {}\n", join(&t.schedule.scale)));
    push(&mut out, format!("r_t = {}\n", join(&t.schedule.r_t)));
    push(&mut out, format!("n_corr_iterations = {}\n", t.schedule.n_corr_iterations));
    push(&mut out, format!("n_update_iterations = {}\n", t.schedule.n_update_iterations));
    push(
        &mut out,
        format!("lambda_r_axis = {},{},{}\n", t.lambda_r.x, t.lambda_r.y, t.lambda_r.z),
    );
    push(&mut out, format!("lambda_t = {}\n", t.lambda_t));
    push(&mut out, format!("s_h = {}\nalpha_h = {}\nalpha_s = {}\n", t.s_h, t.alpha_h, t.alpha_s));
    push(&mut out, format!("histogram_learning_rate = {}\n", t.histogram_learning_rate));
    push(&mut out, format!("stride = {}\n", t.stride * 1e3));
    push(&mut out, format!("occlusion_region = {}\n", t.occlusion.region_extent * 1e3));
    push(&mut out, format!("occlusion_samples = {}\n", t.occlusion.samples_per_axis));
    push(&mut out, format!("occlusion_threshold = {}\n", t.occlusion.threshold * 1e3));
    push(&mut out, format!("use_occlusion_handling = {}\n", t.use_occlusion_handling));
    push(&mut out, format!("use_region = {}\nuse_depth = {}\n", t.use_region, t.use_depth));
    push(&mut out, format!("min_valid_correspondences = {}\n\n", t.min_valid_correspondences));

    let m = &config.model;
    push(&mut out, "[model]\n".to_string());
    push(&mut out, format!("subdivision_level = {}\n", m.subdivision_level));
    push(&mut out, format!("radius = {}\n", m.radius));
    push(&mut out, format!("n_contour_points = {}\n", m.n_contour_points));
    push(&mut out, format!("n_surface_points = {}\n", m.n_surface_points));
    push(&mut out, format!("render_width = {}\n", m.intrinsics.width));
    push(&mut out, format!("render_height = {}\n", m.intrinsics.height));
    push(&mut out, format!("seed = {}\n\n", m.seed));

    let s = &config.scene;
    push(&mut out, "[scene]\n".to_string());
    push(&mut out, format!("n_frames = {}\n", s.n_frames));
    push(&mut out, format!("start_pose = {}\n", matrix16(&s.start_pose)));
    push(&mut out, format!("step_translation_mm = {}\n", s.step_translation * 1e3));
    push(&mut out, format!("step_rotation_deg = {}\n", s.step_rotation.to_degrees()));
    push(&mut out, format!("wander_bound_mm = {}\n", s.wander_bound * 1e3));
    push(&mut out, format!("fg_color = {}\n", color_str(s.fg_color)));
    push(&mut out, format!("bg_color = {}\n", color_str(s.bg_color)));
    push(&mut out, format!("color_noise_sigma = {}\n", s.color_noise_sigma));
    push(&mut out, format!("depth_noise_mm = {}\n", s.depth_noise_mm_at_1m));
    if let Some(bg) = s.background_depth {
        push(&mut out, format!("background_depth_m = {bg}\n"));
    }
    push(&mut out, format!("occluder_enabled = {}\n", s.occluder.is_some()));
    if let Some(occ) = &s.occluder {
        push(
            &mut out,
            format!(
                "occluder_center_m = {},{},{}\n",
                occ.center.x, occ.center.y, occ.center.z
            ),
        );
        push(
            &mut out,
            format!("occluder_half_extents_m = {},{}\n", occ.half_extents.0, occ.half_extents.1),
        );
        push(&mut out, format!("occluder_color = {}\n", color_str(occ.color)));
        push(&mut out, format!("occluder_frames = {},{}\n", occ.frames.0, occ.frames.1));
    }
    push(&mut out, format!("seed = {}\n\n", s.seed));

    let io = &config.io;
    push(&mut out, "[io]\n".to_string());
    let path = |out: &mut String, key: &str, value: &Option<PathBuf>| {
        if let Some(p) = value {
            push(out, format!("{key} = {}\n", p.display()));
        }
    };
    path(&mut out, "mesh", &io.mesh);
    path(&mut out, "model", &io.model);
    path(&mut out, "color_dir", &io.color_dir);
    path(&mut out, "depth_dir", &io.depth_dir);
    push(&mut out, format!("output_dir = {}\n", io.output_dir.display()));
    path(&mut out, "est_trajectory", &io.est_trajectory);
    path(&mut out, "gt_trajectory", &io.gt_trajectory);
    path(&mut out, "input_trajectory", &io.input_trajectory);
    if let Some(pose) = &io.initial_pose {
        push(&mut out, format!("initial_pose = {}\n", matrix16(pose)));
    }
    out
}

fn matrix16(pose: &PoseSE3) -> String {
    pose.to_matrix_rows().iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

fn color_str(c: [u8; 3]) -> String {
    format!("{},{},{}", c[0], c[1], c[2])
}

fn join<T: ToString>(values: &[T]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

type Sections = BTreeMap<String, BTreeMap<String, String>>;

fn parse_ini(text: &str) -> Result<Sections> {
    let mut sections: Sections = BTreeMap::new();
    let mut current: Option<String> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find(['#', ';']) {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            let name = name.trim().to_string();
            if sections.contains_key(&name) {
                bail!("line {line_no}: duplicate section [{name}]");
            }
            sections.insert(name.clone(), BTreeMap::new());
            current = Some(name);
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!("line {line_no}: expected `key = value`, got `{line}`");
        };
        let section = current
            .as_ref()
            .ok_or_else(|| anyhow!("line {line_no}: key `{}` outside any section", key.trim()))?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        let entries = sections.get_mut(section).expect("section exists");
        if entries.contains_key(&key) {
            bail!("line {line_no}: duplicate key `{key}` in [{section}]");
        }
        entries.insert(key, value);
    }
    Ok(sections)
}

struct SectionReader<'a> {
    section: &'static str,
    entries: BTreeMap<String, String>,
    _marker: std::marker::PhantomData<&'a ()>,
}

impl<'a> SectionReader<'a> {
    fn new(sections: &'a Sections, section: &'static str) -> Self {
        Self {
            section,
            entries: sections.get(section).cloned().unwrap_or_default(),
            _marker: std::marker::PhantomData,
        }
    }

    fn take(&mut self, key: &str) -> Option<String> {
        self.entries.remove(key)
    }

    fn finish(&mut self) -> Result<()> {
        if let Some(key) = self.entries.keys().next() {
            bail!("[{}] unknown key `{key}`", self.section);
        }
        Ok(())
    }

    fn f64(&mut self, key: &str, default: f64) -> Result<f64> {
        match self.take(key) {
            Some(v) => v
                .parse()
                .map_err(|_| anyhow!("[{}] {key}: expected a number, got `{v}`", self.section)),
            None => Ok(default),
        }
    }

    fn f64_opt(&mut self, key: &str) -> Result<Option<f64>> {
        match self.take(key) {
            Some(v) => Ok(Some(v.parse().map_err(|_| {
                anyhow!("[{}] {key}: expected a number, got `{v}`", self.section)
            })?)),
            None => Ok(None),
        }
    }

    fn u32(&mut self, key: &str, default: u32) -> Result<u32> {
        match self.take(key) {
            Some(v) => v
                .parse()
                .map_err(|_| anyhow!("[{}] {key}: expected an integer, got `{v}`", self.section)),
            None => Ok(default),
        }
    }

    fn u64(&mut self, key: &str, default: u64) -> Result<u64> {
        match self.take(key) {
            Some(v) => v
                .parse()
                .map_err(|_| anyhow!("[{}] {key}: expected an integer, got `{v}`", self.section)),
            None => Ok(default),
        }
    }

    fn usize(&mut self, key: &str, default: usize) -> Result<usize> {
        match self.take(key) {
            Some(v) => v
                .parse()
                .map_err(|_| anyhow!("[{}] {key}: expected an integer, got `{v}`", self.section)),
            None => Ok(default),
        }
    }

    fn bool(&mut self, key: &str, default: bool) -> Result<bool> {
        match self.take(key).as_deref() {
            Some("true") => Ok(true),
            Some("false") => Ok(false),
            Some(v) => bail!("[{}] {key}: expected true/false, got `{v}`", self.section),
            None => Ok(default),
        }
    }

    fn string(&mut self, key: &str, default: &str) -> Result<String> {
        Ok(self.take(key).unwrap_or_else(|| default.to_string()))
    }

    fn string_opt(&mut self, key: &str) -> Result<Option<String>> {
        Ok(self.take(key))
    }

    fn path_opt(&mut self, key: &str) -> Result<Option<PathBuf>> {
        Ok(self.take(key).map(PathBuf::from))
    }

    fn f64_list(&mut self, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        match self.f64_list_opt(key)? {
            Some(values) => Ok(values),
            None => Ok(default.to_vec()),
        }
    }

    fn f64_list_opt(&mut self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.take(key) {
            Some(v) => {
                let values: std::result::Result<Vec<f64>, _> =
                    v.split(',').map(|t| t.trim().parse()).collect();
                Ok(Some(values.map_err(|_| {
                    anyhow!("[{}] {key}: expected comma-separated numbers, got `{v}`", self.section)
                })?))
            }
            None => Ok(None),
        }
    }

    fn f64_list_n(&mut self, key: &str, n: usize, default: &[f64]) -> Result<Vec<f64>> {
        let values = self.f64_list(key, default)?;
        if values.len() != n {
            bail!("[{}] {key}: expected {n} values, got {}", self.section, values.len());
        }
        Ok(values)
    }

    fn u32_list(&mut self, key: &str, default: &[u32]) -> Result<Vec<u32>> {
        match self.take(key) {
            Some(v) => {
                let values: std::result::Result<Vec<u32>, _> =
                    v.split(',').map(|t| t.trim().parse()).collect();
                values.map_err(|_| {
                    anyhow!("[{}] {key}: expected comma-separated integers, got `{v}`", self.section)
                })
            }
            None => Ok(default.to_vec()),
        }
    }

    fn color(&mut self, key: &str, default: [u8; 3]) -> Result<[u8; 3]> {
        match self.take(key) {
            Some(v) => {
                let parts: std::result::Result<Vec<u8>, _> =
                    v.split(',').map(|t| t.trim().parse()).collect();
                let parts = parts.map_err(|_| {
                    anyhow!("[{}] {key}: expected r,g,b in 0..=255, got `{v}`", self.section)
                })?;
                if parts.len() != 3 {
                    bail!("[{}] {key}: expected 3 channels, got {}", self.section, parts.len());
                }
                Ok([parts[0], parts[1], parts[2]])
            }
            None => Ok(default),
        }
    }

    fn matrix16_opt(&mut self, key: &str) -> Result<Option<[f64; 16]>> {
        match self.f64_list_opt(key)? {
            Some(values) => {
                if values.len() != 16 {
                    bail!(
                        "[{}] {key}: expected 16 row-major values, got {}",
                        self.section,
                        values.len()
                    );
                }
                let mut m = [0.0; 16];
                m.copy_from_slice(&values);
                Ok(Some(m))
            }
            None => Ok(None),
        }
    }
}
