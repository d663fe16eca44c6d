//! Oriented hypersurfaces and the geometric queries everything else reduces to:
//! ray crossings, segment parity, the classifier χ̂, and tangent frames.

pub mod implicit;
pub mod mesh;
pub mod meshio;

use std::sync::Arc;

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub use implicit::{ImplicitSphere, LevelSet, QuadraticGraph, Torus, Vec3};
pub use mesh::TriMesh;

/// Relative tolerance (times the scene scale) for "this point is on S".
pub const ON_SURFACE_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub enum Geometry {
    Sphere { center: Vec3, radius: f64 },
    Plane { point: Vec3, normal: Vec3 },
    Implicit(Arc<dyn LevelSet>),
    Mesh(Arc<TriMesh>),
}

/// An oriented surface in ℝⁿ (n = 2 scenes live in the plane x₃ = 0).
#[derive(Debug, Clone)]
pub struct SurfaceScene {
    dim: usize,
    geometry: Geometry,
    // +1: natural orientation (outward sphere, ∇f/|∇f|, counter-clockwise mesh)
    orientation: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn from_count(k: usize) -> Self {
        if k % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn xor(self, other: Parity) -> Parity {
        Parity::from_count((self == Parity::Odd) as usize + (other == Parity::Odd) as usize)
    }
}

/// Crossing parameters of a ray with the surface.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossingList {
    pub base: Vec3,
    pub dir: Vec3,
    pub ts: Vec<f64>,
    pub tangential: bool,
}

/// Orthonormal frame of the tangent space at a surface point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TangentFrame {
    pub origin: Vec3,
    pub normal: Vec3,
    pub tangents: Vec<Vec3>,
}

/// Decomposition of `y − z` into tangent and normal parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    pub y_prime: Vec3,
    pub e_hat: Vec3,
    pub rho: f64,
    pub h: f64,
}

impl TangentFrame {
    pub fn tangent_dim(&self) -> usize {
        self.tangents.len()
    }

    /// Tangent vector with the given frame coordinates.
    pub fn vector(&self, coords: &[f64]) -> Vec3 {
        self.tangents.iter().zip(coords).map(|(e, c)| e * *c).sum()
    }

    /// Unit tangent direction at azimuth `psi` (n = 3) or the sign `±e₁` (n = 2, psi ∈ {0, π}).
    pub fn direction(&self, psi: f64) -> Vec3 {
        match self.tangents.len() {
            1 => psi.cos().signum() * self.tangents[0],
            _ => psi.cos() * self.tangents[0] + psi.sin() * self.tangents[1],
        }
    }

    pub fn project(&self, y: &Vec3) -> Result<Projection> {
        let w = y - self.origin;
        let h = w.dot(&self.normal);
        let tan = w - h * self.normal;
        let rho = tan.norm();
        if rho <= 1e-12 * w.norm().max(f64::MIN_POSITIVE) {
            return Err(Error::DegenerateProjection(rho));
        }
        Ok(Projection { y_prime: self.origin + tan, e_hat: tan / rho, rho, h })
    }

    /// Frame rotated by `angle` about the normal (n = 3), or mirrored (n = 2, angle = π).
    pub fn rotated(&self, angle: f64) -> TangentFrame {
        let tangents = match self.tangents.len() {
            1 => vec![angle.cos().signum() * self.tangents[0]],
            _ => {
                let (c, s) = (angle.cos(), angle.sin());
                vec![
                    c * self.tangents[0] + s * self.tangents[1],
                    -s * self.tangents[0] + c * self.tangents[1],
                ]
            }
        };
        TangentFrame { origin: self.origin, normal: self.normal, tangents }
    }

    /// Ambient 3×3 lift of a frame-coordinate symmetric matrix.
    pub fn lift(&self, m: &[Vec<f64>]) -> Matrix3<f64> {
        let mut out = Matrix3::zeros();
        for (i, ei) in self.tangents.iter().enumerate() {
            for (j, ej) in self.tangents.iter().enumerate() {
                out += m[i][j] * ei * ej.transpose();
            }
        }
        out
    }
}

fn unit(v: Vec3, what: &str) -> Result<Vec3> {
    let l = v.norm();
    if !(l > 0.0 && l.is_finite()) {
        return Err(Error::InvalidInput(format!("{what} must be a nonzero vector")));
    }
    Ok(v / l)
}

fn check_dim_point(dim: usize, p: &Vec3) -> Result<()> {
    if dim == 2 && p.z != 0.0 {
        return Err(Error::InvalidInput("planar scenes need points with zero third coordinate".into()));
    }
    Ok(())
}

impl SurfaceScene {
    pub fn sphere(dim: usize, center: Vec3, radius: f64) -> Result<Self> {
        if !(2..=3).contains(&dim) {
            return Err(Error::InvalidInput(format!("dimension {dim} unsupported")));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidInput(format!("sphere radius {radius} must be positive")));
        }
        check_dim_point(dim, &center)?;
        Ok(SurfaceScene { dim, geometry: Geometry::Sphere { center, radius }, orientation: 1.0 })
    }

    pub fn plane(dim: usize, point: Vec3, normal: Vec3) -> Result<Self> {
        if !(2..=3).contains(&dim) {
            return Err(Error::InvalidInput(format!("dimension {dim} unsupported")));
        }
        let normal = unit(normal, "plane normal")?;
        check_dim_point(dim, &point)?;
        check_dim_point(dim, &normal)?;
        Ok(SurfaceScene { dim, geometry: Geometry::Plane { point, normal }, orientation: 1.0 })
    }

    pub fn implicit(ls: Arc<dyn LevelSet>) -> Result<Self> {
        let dim = ls.dim();
        if !(2..=3).contains(&dim) {
            return Err(Error::InvalidInput(format!("dimension {dim} unsupported")));
        }
        Ok(SurfaceScene { dim, geometry: Geometry::Implicit(ls), orientation: 1.0 })
    }

    pub fn mesh(mesh: Arc<TriMesh>) -> Self {
        SurfaceScene { dim: 3, geometry: Geometry::Mesh(mesh), orientation: 1.0 }
    }

    /// Same surface with the opposite orientation.
    pub fn flipped(mut self) -> Self {
        self.orientation = -self.orientation;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn orientation(&self) -> f64 {
        self.orientation
    }

    /// Characteristic length used for tolerances and default truncation radii.
    pub fn scale(&self) -> f64 {
        match &self.geometry {
            Geometry::Sphere { radius, .. } => *radius,
            Geometry::Plane { .. } => 1.0,
            Geometry::Implicit(ls) => ls.scale(),
            Geometry::Mesh(m) => m.bounding_ball().1,
        }
    }

    /// Ball containing the whole surface, when it is bounded.
    pub fn bounding_ball(&self) -> Option<(Vec3, f64)> {
        match &self.geometry {
            Geometry::Sphere { center, radius } => Some((*center, *radius)),
            Geometry::Plane { .. } => None,
            Geometry::Implicit(ls) => ls.bounding_ball(),
            Geometry::Mesh(m) => Some(m.bounding_ball()),
        }
    }

    pub fn name(&self) -> String {
        let base = match &self.geometry {
            Geometry::Sphere { radius, .. } => format!("sphere:r={radius}"),
            Geometry::Plane { .. } => "plane".to_string(),
            Geometry::Implicit(ls) => ls.name(),
            Geometry::Mesh(m) => format!("mesh:{}faces", m.triangles.len()),
        };
        if self.orientation < 0.0 {
            format!("{base}:inward")
        } else {
            base
        }
    }

    fn on_tol(&self) -> f64 {
        ON_SURFACE_TOL * self.scale()
    }

    /// Rough distance from `x` to the surface (first order for level sets, exact otherwise).
    pub fn distance(&self, x: &Vec3) -> f64 {
        match &self.geometry {
            Geometry::Sphere { center, radius } => ((x - center).norm() - radius).abs(),
            Geometry::Plane { point, normal } => (x - point).dot(normal).abs(),
            Geometry::Implicit(ls) => {
                let g = ls.gradient(x).norm();
                if g == 0.0 {
                    f64::INFINITY
                } else {
                    ls.value(x).abs() / g
                }
            }
            Geometry::Mesh(m) => (m.closest_point(x).1 - x).norm(),
        }
    }

    /// Maps a nearby point onto S (Newton steps along ∇f for level sets).
    pub fn project_onto(&self, x: &Vec3) -> Result<Vec3> {
        check_dim_point(self.dim, x)?;
        match &self.geometry {
            Geometry::Sphere { center, radius } => {
                let w = x - center;
                let l = w.norm();
                if l == 0.0 {
                    return Err(Error::InvalidInput("cannot project the sphere centre".into()));
                }
                Ok(center + w * (radius / l))
            }
            Geometry::Plane { point, normal } => Ok(x - (x - point).dot(normal) * normal),
            Geometry::Implicit(ls) => {
                let mut p = *x;
                for _ in 0..100 {
                    let f = ls.value(&p);
                    let g = ls.gradient(&p);
                    let g2 = g.norm_squared();
                    if g2 == 0.0 {
                        return Err(Error::PointNotOnSurface(f.abs()));
                    }
                    let step = g * (f / g2);
                    p -= step;
                    if step.norm() <= 1e-15 * ls.scale() {
                        break;
                    }
                }
                let r = self.distance(&p);
                if r > self.on_tol() {
                    return Err(Error::PointNotOnSurface(r));
                }
                Ok(p)
            }
            Geometry::Mesh(m) => Ok(m.closest_point(x).1),
        }
    }

    /// Oriented unit normal at a point of S.
    pub fn normal(&self, z: &Vec3) -> Result<Vec3> {
        let n = match &self.geometry {
            Geometry::Sphere { center, radius } => {
                let w = z - center;
                let r = (w.norm() - radius).abs();
                if r > self.on_tol() {
                    return Err(Error::PointNotOnSurface(r));
                }
                w.normalize()
            }
            Geometry::Plane { point, normal } => {
                let r = (z - point).dot(normal).abs();
                if r > self.on_tol() {
                    return Err(Error::PointNotOnSurface(r));
                }
                *normal
            }
            Geometry::Implicit(ls) => {
                let r = self.distance(z);
                if r > self.on_tol() {
                    return Err(Error::PointNotOnSurface(r));
                }
                ls.gradient(z).normalize()
            }
            Geometry::Mesh(m) => {
                let (tri, q, bary) = m.closest_point(z);
                let r = (q - z).norm();
                if r > self.on_tol() {
                    return Err(Error::PointNotOnSurface(r));
                }
                m.interpolated_normal(tri, &bary)
            }
        };
        Ok(self.orientation * n)
    }

    /// Deterministic tangent frame at `z`.
    pub fn tangent_frame(&self, z: &Vec3) -> Result<TangentFrame> {
        let n = self.normal(z)?;
        let hint = if self.dim == 2 {
            Vec3::new(-n.y, n.x, 0.0)
        } else {
            let a = n.abs();
            if a.x <= a.y && a.x <= a.z {
                Vec3::x()
            } else if a.y <= a.z {
                Vec3::y()
            } else {
                Vec3::z()
            }
        };
        self.frame_from(z, n, &hint)
    }

    /// Tangent frame whose first vector is the tangential part of `hint`.
    pub fn tangent_frame_with_hint(&self, z: &Vec3, hint: &Vec3) -> Result<TangentFrame> {
        let n = self.normal(z)?;
        self.frame_from(z, n, hint)
    }

    fn frame_from(&self, z: &Vec3, n: Vec3, hint: &Vec3) -> Result<TangentFrame> {
        let t = hint - hint.dot(&n) * n;
        if t.norm() < 1e-6 * hint.norm() {
            return Err(Error::InvalidInput("frame hint is parallel to the normal".into()));
        }
        let e1 = t.normalize();
        let tangents = if self.dim == 2 { vec![e1] } else { vec![e1, n.cross(&e1)] };
        Ok(TangentFrame { origin: *z, normal: n, tangents })
    }

    /// Signed level value: negative on the side opposite the orientation normal.
    /// The ray code uses it only to pick the start sign off the surface.
    fn side(&self, x: &Vec3) -> f64 {
        let v = match &self.geometry {
            Geometry::Sphere { center, radius } => (x - center).norm() - radius,
            Geometry::Plane { point, normal } => (x - point).dot(normal),
            Geometry::Implicit(ls) => ls.value(x),
            Geometry::Mesh(_) => 0.0,
        };
        self.orientation * v
    }

    /// All transversal crossings of `{z + t d : 0 < t ≤ t_max}`; when `z` lies on S
    /// its own crossing at t = 0 is excluded.
    pub fn crossings(&self, z: &Vec3, d: &Vec3, t_max: f64) -> Result<CrossingList> {
        let tol = self.on_tol();
        let mut tangential = false;
        let ts = match &self.geometry {
            Geometry::Sphere { center, radius } => {
                let w = z - center;
                let b = w.dot(d);
                let c0 = w.norm_squared() - radius * radius;
                let on = (w.norm() - radius).abs() <= tol;
                let mut ts = Vec::new();
                if on {
                    let cosine = b.abs() / radius;
                    let t = -2.0 * b;
                    if t > tol && t <= t_max {
                        if cosine < implicit::TANGENCY_COSINE {
                            return Err(Error::TangencyDetected { t, cosine });
                        }
                        ts.push(t);
                    }
                } else {
                    let disc = b * b - c0;
                    if disc >= 0.0 {
                        let cosine = disc.sqrt() / radius;
                        let roots = implicit::quadratic_roots(1.0, 2.0 * b, c0);
                        for t in roots {
                            if t > tol && t <= t_max {
                                if cosine < implicit::TANGENCY_COSINE {
                                    return Err(Error::TangencyDetected { t, cosine });
                                }
                                ts.push(t);
                            }
                        }
                    }
                }
                ts
            }
            Geometry::Plane { point, normal } => {
                let h = (z - point).dot(normal);
                let dn = d.dot(normal);
                if h.abs() <= tol || dn == 0.0 {
                    vec![]
                } else {
                    let t = -h / dn;
                    if t > tol && t <= t_max {
                        if dn.abs() < implicit::TANGENCY_COSINE {
                            return Err(Error::TangencyDetected { t, cosine: dn.abs() });
                        }
                        vec![t]
                    } else {
                        vec![]
                    }
                }
            }
            Geometry::Implicit(ls) => {
                let f = ls.value(z);
                let g = ls.gradient(z);
                let start = if g.norm() > 0.0 && f.abs() / g.norm() <= tol {
                    let dg = g.dot(d);
                    let cosine = dg.abs() / g.norm();
                    if cosine < implicit::TANGENCY_COSINE {
                        return Err(Error::TangencyDetected { t: 0.0, cosine });
                    }
                    dg.signum()
                } else {
                    f.signum()
                };
                implicit::isolate_roots(ls.as_ref(), z, d, tol, t_max, start)?
            }
            Geometry::Mesh(m) => {
                let (ts, merged) = m.ray_hits(z, d, tol, t_max);
                tangential = merged;
                ts
            }
        };
        Ok(CrossingList { base: *z, dir: *d, ts, tangential })
    }

    /// Parity of the number of crossings on the open segment `(x, y)`.
    pub fn segment_parity(&self, x: &Vec3, y: &Vec3) -> Result<Parity> {
        let w = y - x;
        let len = w.norm();
        if len == 0.0 {
            return Err(Error::InvalidInput("segment endpoints coincide".into()));
        }
        let tol = self.on_tol();
        let on_surface = |p: &Vec3| match &self.geometry {
            Geometry::Mesh(_) => false,
            _ => self.distance(p) <= tol,
        };
        if on_surface(x) || on_surface(y) {
            return Err(Error::EndpointOnSurface);
        }
        let d = w / len;
        let c = match &self.geometry {
            // mesh endpoints are detected from the hit list itself
            Geometry::Mesh(m) => {
                let (ts, _) = m.ray_hits(x, &d, -tol, len + tol);
                if ts.iter().any(|t| t.abs() <= tol || (t - len).abs() <= tol) {
                    return Err(Error::EndpointOnSurface);
                }
                CrossingList { base: *x, dir: d, ts, tangential: false }
            }
            _ => self.crossings(x, &d, len)?,
        };
        Ok(Parity::from_count(c.ts.len()))
    }

    /// The classifier χ̂(z, y) for z on S with normal `n_z`.
    pub fn classify(&self, z: &Vec3, n_z: &Vec3, y: &Vec3) -> Result<i8> {
        let w = y - z;
        let len = w.norm();
        if len == 0.0 {
            return Err(Error::InvalidInput("probe coincides with the base point".into()));
        }
        let h = -w.dot(n_z);
        if h == 0.0 {
            return Ok(0);
        }
        let c = self.crossings(z, &(w / len), len * (1.0 + 1e-12))?;
        if c.ts.iter().any(|t| (t - len).abs() <= self.on_tol()) {
            return Err(Error::EndpointOnSurface);
        }
        let parity = Parity::from_count(c.ts.len());
        Ok(match (parity, h > 0.0) {
            (Parity::Even, true) | (Parity::Odd, false) => 1,
            _ => -1,
        })
    }

    /// Sign of χ̂ just after leaving `z` along `d` (interior side positive).
    pub fn initial_sign(&self, n_z: &Vec3, d: &Vec3) -> f64 {
        -d.dot(n_z).signum()
    }

    /// Membership in the region bounded by a closed surface (f < 0 side), when defined.
    pub fn inside(&self, x: &Vec3) -> Option<bool> {
        match &self.geometry {
            Geometry::Mesh(m) => {
                let (c, r) = m.bounding_ball();
                let d = Vec3::new(0.573_576_436_351_046, 0.740_535_693_998_073_5, 0.350_098_412_577_197_4);
                let (ts, _) = m.ray_hits(x, &d, 0.0, (x - c).norm() + 2.0 * r);
                Some((ts.len() % 2 == 1) == (self.orientation > 0.0))
            }
            _ => {
                self.bounding_ball()?;
                Some(self.side(x) < 0.0)
            }
        }
    }
}
