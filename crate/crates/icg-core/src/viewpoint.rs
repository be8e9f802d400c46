//! Sparse viewpoint model: precomputed contour and surface points indexed by
//! the camera-to-model-center direction.
//!
//! Generation renders the mesh from virtual cameras on a geodesic grid,
//! samples silhouette contour and interior pixels, and reconstructs 3D points
//! with normals into the model frame. Contour points carry the distances
//! along their normal over which foreground/background stay uninterrupted;
//! surface points carry the depth offset to the minimum depth in a 20x20 mm
//! neighborhood, used later for occlusion rejection. Model files decouple the
//! slow generation from tracking.

use crate::error::Error;
use crate::geometry::{CameraIntrinsics, Mat3, PoseSE3, Vec2, Vec3};
use crate::image::{DepthImage, SilhouetteMask};
use crate::mesh::{icosphere_raw, TriangleMesh};
use crate::par;
use crate::render::{self, RenderOutput};
use crate::rng::SplitMix64;
use crate::Result;

const MAGIC: &[u8; 4] = b"ICGM";
const VERSION: u32 = 1;

/// Free lengths are capped at this many meters.
const FREE_LEN_CAP_M: f64 = 0.1;

/// Side length of the quadratic window used for occlusion offsets (meters).
const OCCLUSION_WINDOW_M: f64 = 0.020;

/// A contour sample from one generating view.
#[derive(Debug, Clone, PartialEq)]
pub struct ContourPoint {
    /// 3D point on the silhouette contour, model frame, meters.
    pub point: Vec3,
    /// Unit normal, model frame; lies in the generating camera's image plane
    /// and points from foreground to background.
    pub normal: Vec3,
    /// Distance along -normal over which the foreground is uninterrupted.
    pub fg_free_len: f64,
    /// Distance along +normal over which the background is uninterrupted.
    pub bg_free_len: f64,
    /// Sample depth minus the window minimum depth in the generating render;
    /// accounts for the object's own depth relief near grazing contours so
    /// the occlusion check only fires on external occluders.
    pub occlusion_offset: f64,
}

/// A surface sample from one generating view.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfacePoint {
    pub point: Vec3,
    /// Unit triangle normal, model frame, flipped to face the generating camera.
    pub normal: Vec3,
    /// Sample depth minus the window minimum depth in the generating render.
    pub occlusion_offset: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Viewpoint {
    /// Unit camera-to-model-center direction, model frame.
    pub orientation: Vec3,
    pub contour_points: Vec<ContourPoint>,
    pub surface_points: Vec<SurfacePoint>,
}

/// Generation parameters; stored alongside the views for reproducibility.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    /// Geodesic-grid subdivision level; level 4 gives 2562 views.
    pub subdivision_level: u32,
    /// Virtual-camera distance to the model center, meters.
    pub radius: f64,
    pub n_contour_points: usize,
    pub n_surface_points: usize,
    /// Render camera for generation.
    pub intrinsics: CameraIntrinsics,
    pub seed: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            subdivision_level: 4,
            radius: 0.8,
            n_contour_points: 200,
            n_surface_points: 200,
            intrinsics: CameraIntrinsics::new(525.0, 525.0, 319.5, 239.5, 640, 480)
                .expect("default intrinsics are valid"),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparseViewpointModel {
    pub views: Vec<Viewpoint>,
    pub config: ModelConfig,
    /// Model center the view orientations refer to (bounding-box center).
    pub center: Vec3,
}

/// Vertices of an icosahedron subdivided `level` times, on the unit sphere.
///
/// Count is `10 * 4^level + 2` with a deterministic ordering.
pub fn geodesic_grid(level: u32) -> Vec<Vec3> {
    icosphere_raw(level).0
}

/// Camera pose (model-to-camera) for a virtual camera at `position` looking
/// at `target`, z forward, y down, with a deterministic roll.
pub fn look_at_camera(position: &Vec3, target: &Vec3) -> PoseSE3 {
    let forward = (target - position).normalize();
    // World-z projected orthogonal to the view direction; world-x at poles.
    let mut up = Vec3::z() - forward * Vec3::z().dot(&forward);
    if up.norm() < 1e-6 {
        up = Vec3::x() - forward * Vec3::x().dot(&forward);
    }
    let up = up.normalize();
    let y_c = -up;
    let x_c = y_c.cross(&forward);
    let rotation = Mat3::from_columns(&[x_c, y_c, forward]);
    // rotation maps camera axes into the model frame; invert for C T_M.
    PoseSE3 { rotation, translation: *position }.inverse()
}

/// Renders the mesh from every grid vertex and samples contour/surface points.
pub fn generate_model(mesh: &TriangleMesh, config: &ModelConfig) -> Result<SparseViewpointModel> {
    let center = mesh.center();
    let grid = geodesic_grid(config.subdivision_level);

    let views: Vec<Viewpoint> = par::map_indices(grid.len(), |i| {
        let mut rng = SplitMix64::substream(config.seed, i as u64);
        generate_view(mesh, config, &center, &grid[i], &mut rng)
    });

    if views.iter().all(|v| v.contour_points.is_empty() && v.surface_points.is_empty()) {
        return Err(Error::ModelGeneration(
            "object is not visible from any viewpoint".into(),
        ));
    }
    Ok(SparseViewpointModel { views, config: config.clone(), center })
}

fn generate_view(
    mesh: &TriangleMesh,
    config: &ModelConfig,
    center: &Vec3,
    grid_dir: &Vec3,
    rng: &mut SplitMix64,
) -> Viewpoint {
    let intr = &config.intrinsics;
    let cam_pos = center + grid_dir * config.radius;
    let cam_from_model = look_at_camera(&cam_pos, center);
    let model_from_cam = cam_from_model.inverse();
    let orientation = -grid_dir;

    let out = match render::render_scene(&[(mesh, cam_from_model)], intr) {
        Ok(out) => out,
        Err(_) => {
            return Viewpoint {
                orientation,
                contour_points: Vec::new(),
                surface_points: Vec::new(),
            }
        }
    };
    let mask = &out.mask;
    let depth = &out.depth;

    let mut contour_pixels = Vec::new();
    let mut interior_pixels = Vec::new();
    for y in 0..intr.height {
        for x in 0..intr.width {
            if !mask.get(x, y) {
                continue;
            }
            interior_pixels.push((x, y));
            if is_contour_pixel(mask, x, y) {
                contour_pixels.push((x, y));
            }
        }
    }
    if interior_pixels.is_empty() {
        return Viewpoint { orientation, contour_points: Vec::new(), surface_points: Vec::new() };
    }

    rng.shuffle(&mut contour_pixels);
    rng.shuffle(&mut interior_pixels);

    let mut contour_points = Vec::with_capacity(config.n_contour_points);
    for &(x, y) in &contour_pixels {
        if contour_points.len() >= config.n_contour_points {
            break;
        }
        if let Some(cp) = build_contour_point(mask, depth, intr, &model_from_cam, x, y) {
            contour_points.push(cp);
        }
    }

    let mut surface_points = Vec::with_capacity(config.n_surface_points);
    for &(x, y) in &interior_pixels {
        if surface_points.len() >= config.n_surface_points {
            break;
        }
        if let Some(sp) = build_surface_point(mesh, &out, intr, &model_from_cam, &cam_pos, x, y) {
            surface_points.push(sp);
        }
    }

    Viewpoint { orientation, contour_points, surface_points }
}

fn is_contour_pixel(mask: &SilhouetteMask, x: u32, y: u32) -> bool {
    let (x, y) = (x as i64, y as i64);
    !mask.get_or_background(x - 1, y)
        || !mask.get_or_background(x + 1, y)
        || !mask.get_or_background(x, y - 1)
        || !mask.get_or_background(x, y + 1)
}

fn build_contour_point(
    mask: &SilhouetteMask,
    depth: &DepthImage,
    intr: &CameraIntrinsics,
    model_from_cam: &PoseSE3,
    x: u32,
    y: u32,
) -> Option<ContourPoint> {
    let d = depth.depth_m(x, y)?;

    // Outward 2D normal from the Sobel gradient of the mask.
    let sample = |dx: i64, dy: i64| -> f64 {
        if mask.get_or_background(x as i64 + dx, y as i64 + dy) {
            1.0
        } else {
            0.0
        }
    };
    let gx = (sample(1, -1) + 2.0 * sample(1, 0) + sample(1, 1))
        - (sample(-1, -1) + 2.0 * sample(-1, 0) + sample(-1, 1));
    let gy = (sample(-1, 1) + 2.0 * sample(0, 1) + sample(1, 1))
        - (sample(-1, -1) + 2.0 * sample(0, -1) + sample(1, -1));
    let grad = Vec2::new(-gx, -gy); // gradient points inward; flip outward
    if grad.norm() < 1e-9 {
        return None;
    }
    let n2 = grad.normalize();

    // The true edge lies between this foreground pixel center and the first
    // background pixel center, on average half a pixel outward.
    let pixel = Vec2::new(x as f64 + 0.5, y as f64 + 0.5) + n2 * 0.5;
    let cam_point = render::reconstruct_point(intr, &pixel, d).ok()?;
    let point = model_from_cam.transform_point(&cam_point);

    let px_to_m = d / intr.focal_mean();
    let bg_free_len = march_free_len(mask, x, y, &n2, false, px_to_m).min(FREE_LEN_CAP_M);
    let fg_free_len = march_free_len(mask, x, y, &(-n2), true, px_to_m).min(FREE_LEN_CAP_M);

    // Lift the 2D normal into the image plane in 3D.
    let normal_cam = Vec3::new(n2.x, n2.y, 0.0);
    let normal = model_from_cam.rotate(&normal_cam).normalize();

    Some(ContourPoint {
        point,
        normal,
        fg_free_len,
        bg_free_len,
        occlusion_offset: occlusion_offset(depth, intr, x, y, d),
    })
}

/// Marches from `(x, y)` along `dir` in dominant-axis unit steps and returns
/// the uninterrupted distance (meters) of the expected class.
fn march_free_len(
    mask: &SilhouetteMask,
    x: u32,
    y: u32,
    dir: &Vec2,
    expect_fg: bool,
    px_to_m: f64,
) -> f64 {
    let n_bar = dir.x.abs().max(dir.y.abs());
    let step = dir / n_bar; // one pixel per step along the dominant axis
    let start = Vec2::new(x as f64 + 0.5, y as f64 + 0.5);
    let max_steps = (FREE_LEN_CAP_M / px_to_m * n_bar).ceil() as i64 + 1;
    let mut last_ok = 0i64;
    for t in 1..=max_steps {
        let p = start + step * t as f64;
        let (px, py) = (p.x.floor() as i64, p.y.floor() as i64);
        if px < 0 || py < 0 || px >= mask.width as i64 || py >= mask.height as i64 {
            break;
        }
        if mask.get_or_background(px, py) != expect_fg {
            break;
        }
        last_ok = t;
    }
    last_ok as f64 / n_bar * px_to_m
}

fn build_surface_point(
    mesh: &TriangleMesh,
    out: &RenderOutput,
    intr: &CameraIntrinsics,
    model_from_cam: &PoseSE3,
    cam_pos_model: &Vec3,
    x: u32,
    y: u32,
) -> Option<SurfacePoint> {
    let d = out.depth.depth_m(x, y)?;
    let tri = out.triangle_at(x, y)?;
    let pixel = Vec2::new(x as f64 + 0.5, y as f64 + 0.5);
    let cam_point = render::reconstruct_point(intr, &pixel, d).ok()?;
    let point = model_from_cam.transform_point(&cam_point);

    let mut normal = mesh.triangle_normal(tri as usize);
    if normal.dot(&(cam_pos_model - point)) < 0.0 {
        normal = -normal;
    }

    let occlusion_offset = occlusion_offset(&out.depth, intr, x, y, d);
    Some(SurfacePoint { point, normal, occlusion_offset })
}

/// Sample depth minus the minimum valid depth within the 20x20 mm window.
fn occlusion_offset(depth: &DepthImage, intr: &CameraIntrinsics, x: u32, y: u32, d: f64) -> f64 {
    let half_px = (0.5 * OCCLUSION_WINDOW_M * intr.focal_mean() / d).ceil() as i64;
    let mut min_depth = d;
    for dy in -half_px..=half_px {
        for dx in -half_px..=half_px {
            let (px, py) = (x as i64 + dx, y as i64 + dy);
            if !depth.contains(px, py) {
                continue;
            }
            if let Some(v) = depth.depth_m(px as u32, py as u32) {
                min_depth = min_depth.min(v);
            }
        }
    }
    (d - min_depth).max(0.0)
}

impl SparseViewpointModel {
    /// View whose stored orientation best matches the current
    /// camera-to-model-center direction; ties break to the lowest index.
    pub fn closest_view(&self, camera_from_model: &PoseSE3) -> &Viewpoint {
        let cam_pos_model = camera_from_model.inverse().translation;
        let dir = (self.center - cam_pos_model).normalize();
        let mut best = 0;
        let mut best_dot = f64::NEG_INFINITY;
        for (i, view) in self.views.iter().enumerate() {
            let dot = view.orientation.dot(&dir);
            if dot > best_dot {
                best_dot = dot;
                best = i;
            }
        }
        &self.views[best]
    }

    pub fn serialize(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        let c = &self.config;
        out.extend_from_slice(&c.subdivision_level.to_le_bytes());
        out.extend_from_slice(&c.radius.to_le_bytes());
        out.extend_from_slice(&(c.n_contour_points as u32).to_le_bytes());
        out.extend_from_slice(&(c.n_surface_points as u32).to_le_bytes());
        out.extend_from_slice(&c.intrinsics.fx.to_le_bytes());
        out.extend_from_slice(&c.intrinsics.fy.to_le_bytes());
        out.extend_from_slice(&c.intrinsics.px.to_le_bytes());
        out.extend_from_slice(&c.intrinsics.py.to_le_bytes());
        out.extend_from_slice(&c.intrinsics.width.to_le_bytes());
        out.extend_from_slice(&c.intrinsics.height.to_le_bytes());
        out.extend_from_slice(&c.seed.to_le_bytes());
        write_vec3(&mut out, &self.center);
        out.extend_from_slice(&(self.views.len() as u32).to_le_bytes());
        for view in &self.views {
            write_vec3(&mut out, &view.orientation);
            out.extend_from_slice(&(view.contour_points.len() as u32).to_le_bytes());
            for cp in &view.contour_points {
                write_vec3(&mut out, &cp.point);
                write_vec3(&mut out, &cp.normal);
                out.extend_from_slice(&cp.fg_free_len.to_le_bytes());
                out.extend_from_slice(&cp.bg_free_len.to_le_bytes());
                out.extend_from_slice(&cp.occlusion_offset.to_le_bytes());
            }
            out.extend_from_slice(&(view.surface_points.len() as u32).to_le_bytes());
            for sp in &view.surface_points {
                write_vec3(&mut out, &sp.point);
                write_vec3(&mut out, &sp.normal);
                out.extend_from_slice(&sp.occlusion_offset.to_le_bytes());
            }
        }
        out
    }

    pub fn deserialize(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        let magic = r.take(4)?;
        if magic != MAGIC {
            return Err(Error::Format("bad model magic (expected ICGM)".into()));
        }
        let version = r.u32()?;
        if version != VERSION {
            return Err(Error::Format(format!("unsupported model version {version}")));
        }
        let subdivision_level = r.u32()?;
        let radius = r.f64()?;
        let n_contour_points = r.u32()? as usize;
        let n_surface_points = r.u32()? as usize;
        let fx = r.f64()?;
        let fy = r.f64()?;
        let px = r.f64()?;
        let py = r.f64()?;
        let width = r.u32()?;
        let height = r.u32()?;
        let seed = r.u64()?;
        let intrinsics = CameraIntrinsics::new(fx, fy, px, py, width, height)
            .map_err(|e| Error::Format(format!("model intrinsics: {e}")))?;
        let center = r.vec3()?;
        let n_views = r.u32()? as usize;
        let mut views = Vec::with_capacity(n_views);
        for _ in 0..n_views {
            let orientation = r.vec3()?;
            let n_cp = r.u32()? as usize;
            let mut contour_points = Vec::with_capacity(n_cp);
            for _ in 0..n_cp {
                contour_points.push(ContourPoint {
                    point: r.vec3()?,
                    normal: r.vec3()?,
                    fg_free_len: r.f64()?,
                    bg_free_len: r.f64()?,
                    occlusion_offset: r.f64()?,
                });
            }
            let n_sp = r.u32()? as usize;
            let mut surface_points = Vec::with_capacity(n_sp);
            for _ in 0..n_sp {
                surface_points.push(SurfacePoint {
                    point: r.vec3()?,
                    normal: r.vec3()?,
                    occlusion_offset: r.f64()?,
                });
            }
            views.push(Viewpoint { orientation, contour_points, surface_points });
        }
        Ok(Self {
            views,
            config: ModelConfig {
                subdivision_level,
                radius,
                n_contour_points,
                n_surface_points,
                intrinsics,
                seed,
            },
            center,
        })
    }
}

fn write_vec3(out: &mut Vec<u8>, v: &Vec3) {
    out.extend_from_slice(&v.x.to_le_bytes());
    out.extend_from_slice(&v.y.to_le_bytes());
    out.extend_from_slice(&v.z.to_le_bytes());
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.bytes.len() {
            return Err(Error::Format("truncated model file".into()));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn vec3(&mut self) -> Result<Vec3> {
        Ok(Vec3::new(self.f64()?, self.f64()?, self.f64()?))
    }
}
