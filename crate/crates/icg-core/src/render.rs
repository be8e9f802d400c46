//! Deterministic software z-buffer rasterizer.
//!
//! Pixel centers sit at integer+0.5 coordinates and shared edges follow the
//! top-left fill rule, so identical inputs produce bit-identical images.
//! Back-face culling is disabled so thin open meshes still leave silhouettes;
//! the depth test keeps the nearest surface. Triangles crossing the near
//! plane are clipped, triangles fully behind the camera are dropped.

use crate::error::Error;
use crate::geometry::{CameraIntrinsics, PoseSE3, Vec2, Vec3};
use crate::image::{DepthImage, SilhouetteMask};
use crate::mesh::TriangleMesh;
use crate::Result;

/// Near-plane distance in meters; geometry closer than this is clipped.
const Z_NEAR: f64 = 1e-4;

/// Rasterization result with per-pixel provenance.
#[derive(Debug, Clone)]
pub struct RenderOutput {
    pub depth: DepthImage,
    pub mask: SilhouetteMask,
    /// Index into the rendered instance list, -1 where background.
    instance: Vec<i16>,
    /// Triangle index within the covering instance's mesh.
    triangle: Vec<u32>,
}

impl RenderOutput {
    #[inline]
    pub fn instance_at(&self, x: u32, y: u32) -> Option<u16> {
        let v = self.instance[(y * self.depth.width + x) as usize];
        (v >= 0).then_some(v as u16)
    }

    #[inline]
    pub fn triangle_at(&self, x: u32, y: u32) -> Option<u32> {
        self.instance_at(x, y)
            .map(|_| self.triangle[(y * self.depth.width + x) as usize])
    }
}

/// Renders a mesh posed by `camera_from_model` and returns depth + mask.
pub fn render_depth(
    mesh: &TriangleMesh,
    camera_from_model: &PoseSE3,
    intr: &CameraIntrinsics,
) -> Result<(DepthImage, SilhouetteMask)> {
    let out = render_scene(&[(mesh, *camera_from_model)], intr)?;
    Ok((out.depth, out.mask))
}

/// Renders several posed meshes into one z-buffered image.
pub fn render_scene(
    instances: &[(&TriangleMesh, PoseSE3)],
    intr: &CameraIntrinsics,
) -> Result<RenderOutput> {
    let (w, h) = (intr.width, intr.height);
    let n = (w * h) as usize;
    let mut zbuf = vec![f64::INFINITY; n];
    let mut instance = vec![-1i16; n];
    let mut triangle = vec![0u32; n];

    for (inst_idx, (mesh, pose)) in instances.iter().enumerate() {
        if mesh.vertices.is_empty() {
            return Err(Error::InvalidMesh("cannot render an empty mesh".into()));
        }
        let cam_verts: Vec<Vec3> = mesh.vertices.iter().map(|v| pose.transform_point(v)).collect();
        for (tri_idx, tri) in mesh.triangles.iter().enumerate() {
            let verts = [
                cam_verts[tri[0] as usize],
                cam_verts[tri[1] as usize],
                cam_verts[tri[2] as usize],
            ];
            for clipped in clip_near(&verts) {
                raster_triangle(
                    &clipped,
                    intr,
                    inst_idx as i16,
                    tri_idx as u32,
                    &mut zbuf,
                    &mut instance,
                    &mut triangle,
                );
            }
        }
    }

    let mut depth = DepthImage::empty(w, h);
    let mut mask = SilhouetteMask::empty(w, h);
    for y in 0..h {
        for x in 0..w {
            let z = zbuf[(y * w + x) as usize];
            if z.is_finite() {
                // Keep quantized valid depths from collapsing into "missing".
                depth.set_meters(x, y, z.max(1e-3));
                mask.set(x, y, true);
            }
        }
    }
    Ok(RenderOutput { depth, mask, instance, triangle })
}

/// Inverse pinhole projection of a pixel at a known depth.
pub fn reconstruct_point(intr: &CameraIntrinsics, pixel: &Vec2, depth: f64) -> Result<Vec3> {
    if depth <= 0.0 {
        return Err(Error::BehindCamera(depth));
    }
    Ok(Vec3::new(
        (pixel.x - intr.px) / intr.fx * depth,
        (pixel.y - intr.py) / intr.fy * depth,
        depth,
    ))
}

/// Sutherland-Hodgman clip of a camera-space triangle against `z = Z_NEAR`.
fn clip_near(verts: &[Vec3; 3]) -> Vec<[Vec3; 3]> {
    let inside = |v: &Vec3| v.z >= Z_NEAR;
    if verts.iter().all(inside) {
        return vec![*verts];
    }
    let mut poly: Vec<Vec3> = Vec::with_capacity(4);
    for i in 0..3 {
        let a = verts[i];
        let b = verts[(i + 1) % 3];
        let (ain, bin) = (inside(&a), inside(&b));
        if ain {
            poly.push(a);
        }
        if ain != bin {
            let t = (Z_NEAR - a.z) / (b.z - a.z);
            poly.push(a + (b - a) * t);
        }
    }
    match poly.len() {
        0..=2 => Vec::new(),
        len => (1..len - 1).map(|k| [poly[0], poly[k], poly[k + 1]]).collect(),
    }
}

#[allow(clippy::too_many_arguments)]
fn raster_triangle(
    verts: &[Vec3; 3],
    intr: &CameraIntrinsics,
    inst_idx: i16,
    tri_idx: u32,
    zbuf: &mut [f64],
    instance: &mut [i16],
    triangle: &mut [u32],
) {
    let project = |v: &Vec3| Vec2::new(v.x / v.z * intr.fx + intr.px, v.y / v.z * intr.fy + intr.py);
    let mut p = [project(&verts[0]), project(&verts[1]), project(&verts[2])];
    let mut inv_z = [1.0 / verts[0].z, 1.0 / verts[1].z, 1.0 / verts[2].z];

    let mut area2 = edge(&p[0], &p[1], &p[2]);
    if area2 == 0.0 {
        return;
    }
    if area2 < 0.0 {
        p.swap(1, 2);
        inv_z.swap(1, 2);
        area2 = -area2;
    }

    let min_x = p.iter().map(|v| v.x).fold(f64::INFINITY, f64::min);
    let max_x = p.iter().map(|v| v.x).fold(f64::NEG_INFINITY, f64::max);
    let min_y = p.iter().map(|v| v.y).fold(f64::INFINITY, f64::min);
    let max_y = p.iter().map(|v| v.y).fold(f64::NEG_INFINITY, f64::max);

    let x0 = (min_x - 0.5).floor().max(0.0) as i64;
    let x1 = (max_x - 0.5).ceil().min(intr.width as f64 - 1.0) as i64;
    let y0 = (min_y - 0.5).floor().max(0.0) as i64;
    let y1 = (max_y - 0.5).ceil().min(intr.height as f64 - 1.0) as i64;
    if x0 > x1 || y0 > y1 {
        return;
    }

    let edges = [(p[0], p[1]), (p[1], p[2]), (p[2], p[0])];
    for y in y0..=y1 {
        for x in x0..=x1 {
            let c = Vec2::new(x as f64 + 0.5, y as f64 + 0.5);
            let e0 = edge(&edges[0].0, &edges[0].1, &c);
            let e1 = edge(&edges[1].0, &edges[1].1, &c);
            let e2 = edge(&edges[2].0, &edges[2].1, &c);
            if !covered(e0, &edges[0]) || !covered(e1, &edges[1]) || !covered(e2, &edges[2]) {
                continue;
            }
            // Barycentric weights; opposite-edge values over the double area.
            let (l0, l1, l2) = (e1 / area2, e2 / area2, e0 / area2);
            let z = 1.0 / (l0 * inv_z[0] + l1 * inv_z[1] + l2 * inv_z[2]);
            let idx = (y as u32 * intr.width + x as u32) as usize;
            if z < zbuf[idx] {
                zbuf[idx] = z;
                instance[idx] = inst_idx;
                triangle[idx] = tri_idx;
            }
        }
    }
}

#[inline]
fn edge(a: &Vec2, b: &Vec2, p: &Vec2) -> f64 {
    (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x)
}

/// Top-left fill rule for pixels exactly on an edge.
#[inline]
fn covered(e: f64, segment: &(Vec2, Vec2)) -> bool {
    if e > 0.0 {
        return true;
    }
    if e < 0.0 {
        return false;
    }
    let dy = segment.1.y - segment.0.y;
    let dx = segment.1.x - segment.0.x;
    dy < 0.0 || (dy == 0.0 && dx > 0.0)
}
