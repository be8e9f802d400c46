//! Triangle meshes, an OBJ subset loader, and analytic shape generators.
//!
//! The supported OBJ subset is ASCII `v`/`f` records with `#` comments;
//! faces with more than three vertices are fan-triangulated. Vertex units
//! are meters in the model frame.

use std::collections::HashMap;

use crate::error::Error;
use crate::geometry::Vec3;
use crate::Result;

/// Triangles below this area are dropped as degenerate.
const MIN_TRIANGLE_AREA: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct TriangleMesh {
    pub vertices: Vec<Vec3>,
    pub triangles: Vec<[u32; 3]>,
}

impl TriangleMesh {
    /// Builds a mesh, dropping degenerate triangles and validating indices.
    pub fn new(vertices: Vec<Vec3>, triangles: Vec<[u32; 3]>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::InvalidMesh("no vertices".into()));
        }
        let n = vertices.len() as u32;
        let mut kept = Vec::with_capacity(triangles.len());
        for tri in triangles {
            if tri.iter().any(|&i| i >= n) {
                return Err(Error::InvalidMesh(format!(
                    "triangle {tri:?} references a vertex beyond {n}"
                )));
            }
            let area = triangle_area(
                &vertices[tri[0] as usize],
                &vertices[tri[1] as usize],
                &vertices[tri[2] as usize],
            );
            if area > MIN_TRIANGLE_AREA {
                kept.push(tri);
            }
        }
        if kept.is_empty() {
            return Err(Error::InvalidMesh("no non-degenerate triangles".into()));
        }
        Ok(Self { vertices, triangles: kept })
    }

    /// Unit normal of triangle `i` with counter-clockwise winding outward.
    pub fn triangle_normal(&self, i: usize) -> Vec3 {
        let [a, b, c] = self.triangles[i];
        let v0 = self.vertices[a as usize];
        let v1 = self.vertices[b as usize];
        let v2 = self.vertices[c as usize];
        (v1 - v0).cross(&(v2 - v0)).normalize()
    }

    /// Center of the axis-aligned bounding box.
    pub fn center(&self) -> Vec3 {
        let (lo, hi) = self.bounds();
        (lo + hi) * 0.5
    }

    pub fn bounds(&self) -> (Vec3, Vec3) {
        let mut lo = Vec3::from_element(f64::INFINITY);
        let mut hi = Vec3::from_element(f64::NEG_INFINITY);
        for v in &self.vertices {
            lo = lo.inf(v);
            hi = hi.sup(v);
        }
        (lo, hi)
    }

    /// Largest distance between any two vertices (model diameter).
    pub fn diameter(&self) -> f64 {
        let mut d2: f64 = 0.0;
        for (i, a) in self.vertices.iter().enumerate() {
            for b in &self.vertices[i + 1..] {
                d2 = d2.max((a - b).norm_squared());
            }
        }
        d2.sqrt()
    }
}

fn triangle_area(a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    0.5 * (b - a).cross(&(c - a)).norm()
}

/// Parses the OBJ subset from raw bytes.
pub fn load_obj(bytes: &[u8]) -> Result<TriangleMesh> {
    let text = std::str::from_utf8(bytes)
        .map_err(|_| Error::Parse { line: 0, msg: "OBJ input is not valid UTF-8".into() })?;
    let mut vertices: Vec<Vec3> = Vec::new();
    let mut triangles: Vec<[u32; 3]> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let mut tokens = line.split_whitespace();
        let Some(record) = tokens.next() else { continue };
        match record {
            "v" => {
                let mut coords = [0.0f64; 3];
                for c in coords.iter_mut() {
                    let tok = tokens.next().ok_or_else(|| Error::Parse {
                        line: line_no,
                        msg: "vertex record needs 3 coordinates".into(),
                    })?;
                    *c = tok.parse().map_err(|_| Error::Parse {
                        line: line_no,
                        msg: format!("bad vertex coordinate `{tok}`"),
                    })?;
                }
                vertices.push(Vec3::new(coords[0], coords[1], coords[2]));
            }
            "f" => {
                let mut indices: Vec<u32> = Vec::new();
                for tok in tokens {
                    // `i`, `i/j`, `i//k`, `i/j/k` all carry the vertex index first.
                    let first = tok.split('/').next().unwrap_or("");
                    let one_based: i64 = first.parse().map_err(|_| Error::Parse {
                        line: line_no,
                        msg: format!("bad face index `{tok}`"),
                    })?;
                    if one_based < 1 {
                        return Err(Error::Parse {
                            line: line_no,
                            msg: format!("face index {one_based} out of range (OBJ is 1-based)"),
                        });
                    }
                    let zero_based = (one_based - 1) as u64;
                    if zero_based >= vertices.len() as u64 {
                        return Err(Error::Parse {
                            line: line_no,
                            msg: format!(
                                "face index {one_based} exceeds {} vertices",
                                vertices.len()
                            ),
                        });
                    }
                    indices.push(zero_based as u32);
                }
                if indices.len() < 3 {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: "face needs at least 3 vertices".into(),
                    });
                }
                for k in 1..indices.len() - 1 {
                    triangles.push([indices[0], indices[k], indices[k + 1]]);
                }
            }
            _ => {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("unsupported record `{record}` (subset is v/f)"),
                });
            }
        }
    }

    if vertices.is_empty() {
        return Err(Error::Parse { line: 0, msg: "empty mesh: no vertices".into() });
    }
    if triangles.is_empty() {
        return Err(Error::Parse { line: 0, msg: "empty mesh: no faces".into() });
    }
    TriangleMesh::new(vertices, triangles)
        .map_err(|e| Error::Parse { line: 0, msg: e.to_string() })
}

/// Writes the mesh back out as the same OBJ subset.
pub fn write_obj(mesh: &TriangleMesh) -> String {
    let mut out = String::new();
    for v in &mesh.vertices {
        out.push_str(&format!("v {} {} {}\n", v.x, v.y, v.z));
    }
    for t in &mesh.triangles {
        out.push_str(&format!("f {} {} {}\n", t[0] + 1, t[1] + 1, t[2] + 1));
    }
    out
}

/// Axis-aligned cube centered at the origin, outward CCW winding.
pub fn cube(edge: f64) -> TriangleMesh {
    cuboid(edge, edge, edge)
}

/// Axis-aligned box with the given side lengths, centered at the origin.
pub fn cuboid(size_x: f64, size_y: f64, size_z: f64) -> TriangleMesh {
    let (hx, hy, hz) = (size_x * 0.5, size_y * 0.5, size_z * 0.5);
    let vertices = vec![
        Vec3::new(-hx, -hy, -hz),
        Vec3::new(hx, -hy, -hz),
        Vec3::new(hx, hy, -hz),
        Vec3::new(-hx, hy, -hz),
        Vec3::new(-hx, -hy, hz),
        Vec3::new(hx, -hy, hz),
        Vec3::new(hx, hy, hz),
        Vec3::new(-hx, hy, hz),
    ];
    let quads: [[u32; 4]; 6] = [
        [0, 3, 2, 1], // -z
        [4, 5, 6, 7], // +z
        [0, 1, 5, 4], // -y
        [2, 3, 7, 6], // +y
        [1, 2, 6, 5], // +x
        [0, 4, 7, 3], // -x
    ];
    let mut triangles = Vec::with_capacity(12);
    for q in quads {
        triangles.push([q[0], q[1], q[2]]);
        triangles.push([q[0], q[2], q[3]]);
    }
    TriangleMesh::new(vertices, triangles).expect("cuboid is valid")
}

/// Icosphere of the given radius: icosahedron subdivided `level` times with
/// vertices projected to the sphere. Deterministic vertex ordering.
pub fn icosphere(radius: f64, level: u32) -> TriangleMesh {
    let (vertices, triangles) = icosphere_raw(level);
    let vertices = vertices.into_iter().map(|v| v * radius).collect();
    TriangleMesh::new(vertices, triangles).expect("icosphere is valid")
}

/// Unit icosphere vertices and faces; vertex count is `10 * 4^level + 2`.
pub(crate) fn icosphere_raw(level: u32) -> (Vec<Vec3>, Vec<[u32; 3]>) {
    let phi = (1.0 + 5.0_f64.sqrt()) / 2.0;
    let mut vertices: Vec<Vec3> = vec![
        Vec3::new(-1.0, phi, 0.0),
        Vec3::new(1.0, phi, 0.0),
        Vec3::new(-1.0, -phi, 0.0),
        Vec3::new(1.0, -phi, 0.0),
        Vec3::new(0.0, -1.0, phi),
        Vec3::new(0.0, 1.0, phi),
        Vec3::new(0.0, -1.0, -phi),
        Vec3::new(0.0, 1.0, -phi),
        Vec3::new(phi, 0.0, -1.0),
        Vec3::new(phi, 0.0, 1.0),
        Vec3::new(-phi, 0.0, -1.0),
        Vec3::new(-phi, 0.0, 1.0),
    ]
    .into_iter()
    .map(|v| v.normalize())
    .collect();

    let mut faces: Vec<[u32; 3]> = vec![
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ];

    for _ in 0..level {
        let mut midpoints: HashMap<(u32, u32), u32> = HashMap::new();
        let mut next_faces = Vec::with_capacity(faces.len() * 4);
        for &[a, b, c] in &faces {
            let ab = midpoint(a, b, &mut vertices, &mut midpoints);
            let bc = midpoint(b, c, &mut vertices, &mut midpoints);
            let ca = midpoint(c, a, &mut vertices, &mut midpoints);
            next_faces.push([a, ab, ca]);
            next_faces.push([b, bc, ab]);
            next_faces.push([c, ca, bc]);
            next_faces.push([ab, bc, ca]);
        }
        faces = next_faces;
    }
    (vertices, faces)
}

fn midpoint(a: u32, b: u32, vertices: &mut Vec<Vec3>, cache: &mut HashMap<(u32, u32), u32>) -> u32 {
    let key = if a < b { (a, b) } else { (b, a) };
    if let Some(&idx) = cache.get(&key) {
        return idx;
    }
    let mid = ((vertices[a as usize] + vertices[b as usize]) * 0.5).normalize();
    let idx = vertices.len() as u32;
    vertices.push(mid);
    cache.insert(key, idx);
    idx
}

/// Closed cylinder along the z axis, centered at the origin.
pub fn cylinder(radius: f64, height: f64, segments: u32) -> TriangleMesh {
    assert!(segments >= 3);
    let h = height * 0.5;
    let mut vertices = Vec::new();
    for &z in &[-h, h] {
        for k in 0..segments {
            let a = std::f64::consts::TAU * k as f64 / segments as f64;
            vertices.push(Vec3::new(radius * a.cos(), radius * a.sin(), z));
        }
    }
    let bottom_center = vertices.len() as u32;
    vertices.push(Vec3::new(0.0, 0.0, -h));
    let top_center = vertices.len() as u32;
    vertices.push(Vec3::new(0.0, 0.0, h));

    let mut triangles = Vec::new();
    for k in 0..segments {
        let k1 = (k + 1) % segments;
        let (b0, b1) = (k, k1);
        let (t0, t1) = (segments + k, segments + k1);
        // side (outward)
        triangles.push([b0, b1, t1]);
        triangles.push([b0, t1, t0]);
        // caps
        triangles.push([bottom_center, b1, b0]);
        triangles.push([top_center, t0, t1]);
    }
    TriangleMesh::new(vertices, triangles).expect("cylinder is valid")
}
