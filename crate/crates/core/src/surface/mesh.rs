//! Oriented triangle meshes in ℝ³ with a bounding-volume hierarchy for ray casting.

use std::collections::HashMap;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::surface::implicit::Vec3;

const LEAF_SIZE: usize = 4;

#[derive(Debug, Clone)]
struct Node {
    lo: Vec3,
    hi: Vec3,
    // leaf: triangles order[start..start+count]; inner: children at `start` and `start + 1`
    start: usize,
    count: usize,
}

/// Triangle mesh, counter-clockwise faces seen from outside.
#[derive(Debug, Clone)]
pub struct TriMesh {
    pub vertices: Vec<Vec3>,
    pub triangles: Vec<[usize; 3]>,
    pub normals: Vec<Vec3>,
    nodes: Vec<Node>,
    order: Vec<usize>,
    center: Vec3,
    radius: f64,
    mean_edge: f64,
}

impl TriMesh {
    /// Builds a mesh with area-weighted vertex normals.
    pub fn new(vertices: Vec<Vec3>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        let mut normals = vec![Vec3::zeros(); vertices.len()];
        for t in &triangles {
            for &i in t {
                if i >= vertices.len() {
                    return Err(Error::InvalidInput(format!("triangle references vertex {i}")));
                }
            }
            let fnrm = (vertices[t[1]] - vertices[t[0]]).cross(&(vertices[t[2]] - vertices[t[0]]));
            for &i in t {
                normals[i] += fnrm;
            }
        }
        for n in normals.iter_mut() {
            let len = n.norm();
            if len > 0.0 {
                *n /= len;
            }
        }
        Self::with_normals(vertices, triangles, normals)
    }

    /// Builds a mesh with caller-supplied unit vertex normals.
    pub fn with_normals(vertices: Vec<Vec3>, triangles: Vec<[usize; 3]>, normals: Vec<Vec3>) -> Result<Self> {
        if triangles.is_empty() {
            return Err(Error::InvalidInput("mesh has no triangles".into()));
        }
        if normals.len() != vertices.len() {
            return Err(Error::InvalidInput("one normal per vertex required".into()));
        }
        check_orientation(&triangles)?;
        let normals: Vec<Vec3> = normals
            .into_iter()
            .map(|n| {
                let l = n.norm();
                if l > 0.0 {
                    n / l
                } else {
                    n
                }
            })
            .collect();
        let mut lo = vertices[0];
        let mut hi = vertices[0];
        for v in &vertices {
            lo = lo.inf(v);
            hi = hi.sup(v);
        }
        let center = 0.5 * (lo + hi);
        let radius = vertices.iter().map(|v| (v - center).norm()).fold(0.0, f64::max);
        let mut edge_sum = 0.0;
        for t in &triangles {
            for k in 0..3 {
                edge_sum += (vertices[t[k]] - vertices[t[(k + 1) % 3]]).norm();
            }
        }
        let mean_edge = edge_sum / (3 * triangles.len()) as f64;
        let mut mesh = TriMesh {
            vertices,
            triangles,
            normals,
            nodes: Vec::new(),
            order: Vec::new(),
            center,
            radius,
            mean_edge,
        };
        mesh.build_bvh();
        Ok(mesh)
    }

    pub fn bounding_ball(&self) -> (Vec3, f64) {
        (self.center, self.radius)
    }

    pub fn mean_edge_length(&self) -> f64 {
        self.mean_edge
    }

    pub fn corners(&self, tri: usize) -> [Vec3; 3] {
        let t = self.triangles[tri];
        [self.vertices[t[0]], self.vertices[t[1]], self.vertices[t[2]]]
    }

    /// Signed enclosed volume (positive for outward orientation of a closed mesh).
    pub fn signed_volume(&self) -> f64 {
        (0..self.triangles.len())
            .map(|i| {
                let [a, b, c] = self.corners(i);
                a.dot(&b.cross(&c)) / 6.0
            })
            .sum()
    }

    fn build_bvh(&mut self) {
        let cent: Vec<Vec3> = (0..self.triangles.len())
            .map(|i| {
                let [a, b, c] = self.corners(i);
                (a + b + c) / 3.0
            })
            .collect();
        self.order = (0..self.triangles.len()).collect();
        self.nodes = vec![Node { lo: Vec3::zeros(), hi: Vec3::zeros(), start: 0, count: 0 }];
        let mut stack = vec![(0usize, 0usize, self.triangles.len())];
        while let Some((node, start, end)) = stack.pop() {
            let (mut lo, mut hi) = (Vec3::repeat(f64::INFINITY), Vec3::repeat(f64::NEG_INFINITY));
            for &t in &self.order[start..end] {
                for p in self.corners(t) {
                    lo = lo.inf(&p);
                    hi = hi.sup(&p);
                }
            }
            self.nodes[node].lo = lo;
            self.nodes[node].hi = hi;
            if end - start <= LEAF_SIZE {
                self.nodes[node].start = start;
                self.nodes[node].count = end - start;
                continue;
            }
            let ext = hi - lo;
            let axis = if ext.x >= ext.y && ext.x >= ext.z {
                0
            } else if ext.y >= ext.z {
                1
            } else {
                2
            };
            let mid = (start + end) / 2;
            self.order[start..end].select_nth_unstable_by(mid - start, |&p, &q| cent[p][axis].total_cmp(&cent[q][axis]));
            let child = self.nodes.len();
            self.nodes.push(Node { lo, hi, start: 0, count: 0 });
            self.nodes.push(Node { lo, hi, start: 0, count: 0 });
            self.nodes[node].start = child;
            self.nodes[node].count = 0;
            stack.push((child, start, mid));
            stack.push((child + 1, mid, end));
        }
    }

    /// Sorted, de-duplicated ray parameters of triangle hits on `(t_min, t_max]`;
    /// the flag reports that coincident hits (an edge or vertex) were merged.
    pub fn ray_hits(&self, z: &Vec3, d: &Vec3, t_min: f64, t_max: f64) -> (Vec<f64>, bool) {
        let inv = Vec3::new(1.0 / d.x, 1.0 / d.y, 1.0 / d.z);
        let mut hits = Vec::new();
        let mut stack = vec![0usize];
        while let Some(i) = stack.pop() {
            let node = &self.nodes[i];
            if !slab_hit(&node.lo, &node.hi, z, &inv, t_min, t_max) {
                continue;
            }
            if node.count > 0 {
                for &t in &self.order[node.start..node.start + node.count] {
                    let [a, b, c] = self.corners(t);
                    if let Some(s) = moller_trumbore(z, d, &a, &b, &c) {
                        if s > t_min && s <= t_max {
                            hits.push(s);
                        }
                    }
                }
            } else {
                stack.push(node.start);
                stack.push(node.start + 1);
            }
        }
        hits.sort_by(f64::total_cmp);
        let tol = 1e-10 * self.radius.max(1e-300);
        let before = hits.len();
        hits.dedup_by(|b, a| (*b - *a).abs() <= tol);
        let merged = hits.len() != before;
        (hits, merged)
    }

    /// Closest point on the mesh: (triangle, point, barycentric coordinates).
    pub fn closest_point(&self, p: &Vec3) -> (usize, Vec3, [f64; 3]) {
        let mut best = (0, Vec3::zeros(), [1.0, 0.0, 0.0], f64::INFINITY);
        for i in 0..self.triangles.len() {
            let [a, b, c] = self.corners(i);
            let (q, bary) = closest_on_triangle(p, &a, &b, &c);
            let d2 = (q - p).norm_squared();
            if d2 < best.3 {
                best = (i, q, bary, d2);
            }
        }
        (best.0, best.1, best.2)
    }

    /// Interpolated unit normal at a point of triangle `tri` with barycentrics `bary`.
    pub fn interpolated_normal(&self, tri: usize, bary: &[f64; 3]) -> Vec3 {
        let t = self.triangles[tri];
        let n = bary[0] * self.normals[t[0]] + bary[1] * self.normals[t[1]] + bary[2] * self.normals[t[2]];
        n.normalize()
    }

    /// Mean edge length of one triangle.
    pub fn edge_length(&self, tri: usize) -> f64 {
        let [a, b, c] = self.corners(tri);
        ((a - b).norm() + (b - c).norm() + (c - a).norm()) / 3.0
    }
}

fn check_orientation(triangles: &[[usize; 3]]) -> Result<()> {
    let mut edges: HashMap<(usize, usize), usize> = HashMap::new();
    for t in triangles {
        if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
            return Err(Error::InvalidInput(format!("degenerate triangle {t:?}")));
        }
        for k in 0..3 {
            let e = (t[k], t[(k + 1) % 3]);
            let c = edges.entry(e).or_insert(0);
            *c += 1;
            if *c > 1 {
                return Err(Error::InvalidInput(format!(
                    "edge {e:?} used twice in the same direction: inconsistent orientation"
                )));
            }
        }
    }
    Ok(())
}

fn slab_hit(lo: &Vec3, hi: &Vec3, z: &Vec3, inv: &Vec3, t_min: f64, t_max: f64) -> bool {
    let mut t0 = t_min;
    let mut t1 = t_max;
    for k in 0..3 {
        let a = (lo[k] - z[k]) * inv[k];
        let b = (hi[k] - z[k]) * inv[k];
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        // NaN from 0·∞ means the ray is parallel and on the slab boundary: keep it
        if a.is_nan() || b.is_nan() {
            continue;
        }
        // small slack so hits on box faces are not lost
        t0 = t0.max(a - 1e-12 * a.abs());
        t1 = t1.min(b + 1e-12 * b.abs());
        if t0 > t1 {
            return false;
        }
    }
    true
}

fn moller_trumbore(z: &Vec3, d: &Vec3, a: &Vec3, b: &Vec3, c: &Vec3) -> Option<f64> {
    let e1 = b - a;
    let e2 = c - a;
    let p = d.cross(&e2);
    let det = e1.dot(&p);
    if det.abs() < 1e-300 {
        return None;
    }
    let inv = 1.0 / det;
    let s = z - a;
    let u = s.dot(&p) * inv;
    const SLACK: f64 = 1e-12;
    if !(-SLACK..=1.0 + SLACK).contains(&u) {
        return None;
    }
    let q = s.cross(&e1);
    let v = d.dot(&q) * inv;
    if v < -SLACK || u + v > 1.0 + SLACK {
        return None;
    }
    Some(e2.dot(&q) * inv)
}

/// Closest point on a triangle with its barycentric coordinates.
fn closest_on_triangle(p: &Vec3, a: &Vec3, b: &Vec3, c: &Vec3) -> (Vec3, [f64; 3]) {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return (*a, [1.0, 0.0, 0.0]);
    }
    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return (*b, [0.0, 1.0, 0.0]);
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return (a + v * ab, [1.0 - v, v, 0.0]);
    }
    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return (*c, [0.0, 0.0, 1.0]);
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return (a + w * ac, [1.0 - w, 0.0, w]);
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return (b + w * (c - b), [0.0, 1.0 - w, w]);
    }
    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    (a + ab * v + ac * w, [1.0 - v - w, v, w])
}

/// Subdivided icosahedron projected onto the sphere; `subdivisions = 5` gives 20480 faces.
/// Vertex normals are the exact radial directions.
pub fn icosphere(center: Vec3, radius: f64, subdivisions: usize) -> Result<TriMesh> {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut verts: Vec<Vec3> = [
        (-1.0, t, 0.0),
        (1.0, t, 0.0),
        (-1.0, -t, 0.0),
        (1.0, -t, 0.0),
        (0.0, -1.0, t),
        (0.0, 1.0, t),
        (0.0, -1.0, -t),
        (0.0, 1.0, -t),
        (t, 0.0, -1.0),
        (t, 0.0, 1.0),
        (-t, 0.0, -1.0),
        (-t, 0.0, 1.0),
    ]
    .iter()
    .map(|&(x, y, z)| Vec3::new(x, y, z).normalize())
    .collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..subdivisions {
        let mut cache: HashMap<(usize, usize), usize> = HashMap::new();
        let mut mid = |i: usize, j: usize, verts: &mut Vec<Vec3>| {
            let key = (i.min(j), i.max(j));
            *cache.entry(key).or_insert_with(|| {
                verts.push((verts[i] + verts[j]).normalize());
                verts.len() - 1
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for f in &faces {
            let a = mid(f[0], f[1], &mut verts);
            let b = mid(f[1], f[2], &mut verts);
            let c = mid(f[2], f[0], &mut verts);
            next.push([f[0], a, c]);
            next.push([f[1], b, a]);
            next.push([f[2], c, b]);
            next.push([a, b, c]);
        }
        faces = next;
    }
    let normals = verts.clone();
    let verts = verts.into_iter().map(|v| center + radius * v).collect();
    TriMesh::with_normals(verts, faces, normals)
}

/// Parametric torus around the third axis with `nu × nv` quads split into triangles.
pub fn torus_mesh(major: f64, minor: f64, nu: usize, nv: usize) -> Result<TriMesh> {
    if nu < 3 || nv < 3 {
        return Err(Error::InvalidInput("torus mesh needs at least 3x3 cells".into()));
    }
    let mut verts = Vec::with_capacity(nu * nv);
    let mut normals = Vec::with_capacity(nu * nv);
    for i in 0..nu {
        let u = 2.0 * PI * i as f64 / nu as f64;
        for j in 0..nv {
            let v = 2.0 * PI * j as f64 / nv as f64;
            let n = Vec3::new(v.cos() * u.cos(), v.cos() * u.sin(), v.sin());
            verts.push(Vec3::new(major * u.cos(), major * u.sin(), 0.0) + minor * n);
            normals.push(n);
        }
    }
    let idx = |i: usize, j: usize| (i % nu) * nv + (j % nv);
    let mut faces = Vec::with_capacity(2 * nu * nv);
    for i in 0..nu {
        for j in 0..nv {
            faces.push([idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)]);
            faces.push([idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)]);
        }
    }
    TriMesh::with_normals(verts, faces, normals)
}

/// Flat disk of radius `radius` in the plane through the origin normal to the third axis.
pub fn disk_mesh(radius: f64, rings: usize, sectors: usize) -> Result<TriMesh> {
    let mut verts = vec![Vec3::zeros()];
    for r in 1..=rings {
        let rr = radius * r as f64 / rings as f64;
        for s in 0..sectors {
            let a = 2.0 * PI * s as f64 / sectors as f64;
            verts.push(Vec3::new(rr * a.cos(), rr * a.sin(), 0.0));
        }
    }
    let ring = |r: usize, s: usize| 1 + (r - 1) * sectors + (s % sectors);
    let mut faces = Vec::new();
    for s in 0..sectors {
        faces.push([0, ring(1, s), ring(1, s + 1)]);
    }
    for r in 1..rings {
        for s in 0..sectors {
            faces.push([ring(r, s), ring(r + 1, s), ring(r + 1, s + 1)]);
            faces.push([ring(r, s), ring(r + 1, s + 1), ring(r, s + 1)]);
        }
    }
    let normals = vec![Vec3::new(0.0, 0.0, 1.0); verts.len()];
    TriMesh::with_normals(verts, faces, normals)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn icosphere_orientation_and_size() {
        let m = icosphere(Vec3::zeros(), 1.0, 3).unwrap();
        assert_eq!(m.triangles.len(), 1280);
        let vol = m.signed_volume();
        assert!(vol > 0.0 && (vol - 4.0 * PI / 3.0).abs() < 0.01 * 4.0 * PI / 3.0, "{vol}");
    }

    #[test]
    fn icosphere_ray_hits() {
        let m = icosphere(Vec3::zeros(), 1.0, 4).unwrap();
        let z = Vec3::new(2.0, 0.1, 0.05);
        let d = Vec3::new(-1.0, 0.0, 0.0);
        let (h, merged) = m.ray_hits(&z, &d, 0.0, 10.0);
        assert!(!merged);
        assert_eq!(h.len(), 2);
        assert!((h[0] - 1.0).abs() < 0.01 && (h[1] - 3.0).abs() < 0.02);
    }

    #[test]
    fn torus_mesh_outward() {
        let m = torus_mesh(2.0, 0.5, 64, 32).unwrap();
        let exact = 2.0 * PI * PI * 2.0 * 0.25;
        let vol = m.signed_volume();
        assert!(vol > 0.0 && (vol - exact).abs() < 0.02 * exact);
    }

    #[test]
    fn inconsistent_orientation_rejected() {
        let v = vec![Vec3::zeros(), Vec3::x(), Vec3::y(), Vec3::z()];
        let r = TriMesh::new(v, vec![[0, 1, 2], [0, 1, 3]]);
        assert!(matches!(r, Err(Error::InvalidInput(_))));
    }

    #[test]
    fn closest_point_on_disk() {
        let m = disk_mesh(1.0, 4, 16).unwrap();
        let (_, q, _) = m.closest_point(&Vec3::new(0.3, 0.2, 0.7));
        assert!((q - Vec3::new(0.3, 0.2, 0.0)).norm() < 1e-12);
    }
}
