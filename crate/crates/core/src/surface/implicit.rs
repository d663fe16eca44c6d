//! Level-set surfaces `{f = 0}` oriented by `∇f/|∇f|`, and ray root isolation on them.

use std::fmt::Debug;

use nalgebra::Vector3;

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;

/// Relative threshold on `|d·∇f|/|∇f|` below which a root counts as tangential.
pub const TANGENCY_COSINE: f64 = 1e-8;

/// A scalar field whose zero set is the surface. The region `f < 0` lies on the
/// side opposite to the orientation normal.
pub trait LevelSet: Debug + Send + Sync {
    fn dim(&self) -> usize;
    fn value(&self, x: &Vec3) -> f64;
    fn gradient(&self, x: &Vec3) -> Vec3;
    /// Lower bound on the radius of curvature; drives the root-isolation step.
    fn feature_scale(&self) -> f64;
    /// Characteristic size used for on-surface tolerances.
    fn scale(&self) -> f64;
    /// Ball outside which the surface has no points, if the surface is bounded.
    fn bounding_ball(&self) -> Option<(Vec3, f64)>;
    /// Catalog name, used in reports.
    fn name(&self) -> String;
    /// Exact roots of `t ↦ f(z + t d)` in `(t_min, t_max]`, when available in closed form.
    fn ray_roots(&self, _z: &Vec3, _d: &Vec3, _t_min: f64, _t_max: f64) -> Option<Vec<f64>> {
        None
    }
}

/// `|x - c|² - ρ²`.
#[derive(Debug, Clone)]
pub struct ImplicitSphere {
    pub dim: usize,
    pub center: Vec3,
    pub radius: f64,
}

impl LevelSet for ImplicitSphere {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, x: &Vec3) -> f64 {
        (x - self.center).norm_squared() - self.radius * self.radius
    }
    fn gradient(&self, x: &Vec3) -> Vec3 {
        2.0 * (x - self.center)
    }
    fn feature_scale(&self) -> f64 {
        self.radius
    }
    fn scale(&self) -> f64 {
        self.radius
    }
    fn bounding_ball(&self) -> Option<(Vec3, f64)> {
        Some((self.center, self.radius))
    }
    fn name(&self) -> String {
        format!("implicit-sphere:r={}", self.radius)
    }
}

/// Torus around the third coordinate axis: centre circle of radius `major` in the
/// plane of the first two coordinates, tube radius `minor`.
#[derive(Debug, Clone)]
pub struct Torus {
    pub center: Vec3,
    pub major: f64,
    pub minor: f64,
}

impl Torus {
    pub fn new(major: f64, minor: f64) -> Result<Self> {
        if !(major > minor && minor > 0.0) {
            return Err(Error::InvalidInput(format!(
                "torus needs major > minor > 0, got ({major}, {minor})"
            )));
        }
        Ok(Torus {
            center: Vec3::zeros(),
            major,
            minor,
        })
    }
}

impl LevelSet for Torus {
    fn dim(&self) -> usize {
        3
    }
    fn value(&self, x: &Vec3) -> f64 {
        let p = x - self.center;
        let a = p.norm_squared() + self.major * self.major - self.minor * self.minor;
        a * a - 4.0 * self.major * self.major * (p.x * p.x + p.y * p.y)
    }
    fn gradient(&self, x: &Vec3) -> Vec3 {
        let p = x - self.center;
        let a = p.norm_squared() + self.major * self.major - self.minor * self.minor;
        let r2 = 8.0 * self.major * self.major;
        Vec3::new(
            4.0 * a * p.x - r2 * p.x,
            4.0 * a * p.y - r2 * p.y,
            4.0 * a * p.z,
        )
    }
    fn feature_scale(&self) -> f64 {
        self.minor
    }
    fn scale(&self) -> f64 {
        self.minor
    }
    fn bounding_ball(&self) -> Option<(Vec3, f64)> {
        Some((self.center, self.major + self.minor))
    }
    fn name(&self) -> String {
        format!("torus:R={},r={}", self.major, self.minor)
    }
}

/// Graph `x₃ = a x₁² + b x₁x₂ + c x₂²` with upward orientation.
#[derive(Debug, Clone)]
pub struct QuadraticGraph {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl QuadraticGraph {
    fn height(&self, x: f64, y: f64) -> f64 {
        self.a * x * x + self.b * x * y + self.c * y * y
    }
}

impl LevelSet for QuadraticGraph {
    fn dim(&self) -> usize {
        3
    }
    fn value(&self, x: &Vec3) -> f64 {
        x.z - self.height(x.x, x.y)
    }
    fn gradient(&self, x: &Vec3) -> Vec3 {
        Vec3::new(
            -(2.0 * self.a * x.x + self.b * x.y),
            -(self.b * x.x + 2.0 * self.c * x.y),
            1.0,
        )
    }
    fn feature_scale(&self) -> f64 {
        let m = self.a.abs().max(self.b.abs()).max(self.c.abs());
        if m == 0.0 {
            1.0
        } else {
            0.5 / m
        }
    }
    fn scale(&self) -> f64 {
        1.0
    }
    fn bounding_ball(&self) -> Option<(Vec3, f64)> {
        None
    }
    fn name(&self) -> String {
        format!("graph:a={},b={},c={}", self.a, self.b, self.c)
    }
    fn ray_roots(&self, z: &Vec3, d: &Vec3, t_min: f64, t_max: f64) -> Option<Vec<f64>> {
        // f(z + t d) = q2 t² + q1 t + q0
        let q2 = -self.height(d.x, d.y);
        let q1 = d.z - (2.0 * self.a * z.x * d.x + self.b * (z.x * d.y + z.y * d.x) + 2.0 * self.c * z.y * d.y);
        let q0 = self.value(z);
        Some(
            quadratic_roots(q2, q1, q0)
                .into_iter()
                .filter(|t| *t > t_min && *t <= t_max)
                .collect(),
        )
    }
}

/// Real roots of `a t² + b t + c`, ascending, using the cancellation-free form.
pub fn quadratic_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    if a == 0.0 {
        return if b == 0.0 { vec![] } else { vec![-c / b] };
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return vec![];
    }
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    let mut r = if q == 0.0 {
        vec![0.0, 0.0]
    } else {
        vec![q / a, c / q]
    };
    r.sort_by(f64::total_cmp);
    r
}

/// Parameter at which the ray leaves a ball it starts inside (or passes), if it meets it.
pub fn ball_exit(z: &Vec3, d: &Vec3, center: &Vec3, radius: f64) -> Option<f64> {
    let w = z - center;
    let roots = quadratic_roots(1.0, 2.0 * w.dot(d), w.norm_squared() - radius * radius);
    roots.last().copied().filter(|t| *t > 0.0)
}

/// Transversal roots of `t ↦ f(z + t d)` on `(t_min, t_max]`.
///
/// `start_sign` is the sign of `f` just after `t_min`; the caller supplies it
/// for base points lying on the surface, where `f(z)` itself is rounding noise.
pub fn isolate_roots(
    ls: &dyn LevelSet,
    z: &Vec3,
    d: &Vec3,
    t_min: f64,
    t_max: f64,
    start_sign: f64,
) -> Result<Vec<f64>> {
    if let Some(r) = ls.ray_roots(z, d, t_min, t_max) {
        for &t in &r {
            check_transversal(ls, &(z + t * d), d, t)?;
        }
        return Ok(r);
    }
    let mut t_end = t_max;
    if let Some((c, rad)) = ls.bounding_ball() {
        match ball_exit(z, d, &c, rad * (1.0 + 1e-9)) {
            Some(t) => t_end = t_end.min(t),
            None => return Ok(vec![]),
        }
    }
    if t_end <= t_min {
        return Ok(vec![]);
    }
    let step = (0.05 * ls.feature_scale()).min(t_max / 256.0);
    let n_steps = ((t_end - t_min) / step).ceil().max(1.0) as usize;
    let h = (t_end - t_min) / n_steps as f64;
    let tol = 1e-12 * ls.scale();
    let f = |t: f64| ls.value(&(z + t * d));
    let mut roots = Vec::new();
    let mut t_lo = t_min;
    let mut s_lo = start_sign;
    for i in 1..=n_steps {
        let t_hi = if i == n_steps { t_end } else { t_min + h * i as f64 };
        let f_hi = f(t_hi);
        let s_hi = if f_hi == 0.0 { s_lo } else { f_hi.signum() };
        if s_hi != s_lo {
            let t = polish_root(&f, ls, z, d, t_lo, t_hi, s_lo, tol);
            check_transversal(ls, &(z + t * d), d, t)?;
            roots.push(t);
        }
        t_lo = t_hi;
        s_lo = s_hi;
    }
    Ok(roots)
}

#[allow(clippy::too_many_arguments)]
fn polish_root<F: Fn(f64) -> f64>(
    f: &F,
    ls: &dyn LevelSet,
    z: &Vec3,
    d: &Vec3,
    mut lo: f64,
    mut hi: f64,
    s_lo: f64,
    tol: f64,
) -> f64 {
    // bisection down to a small bracket, then safeguarded Newton
    while hi - lo > 1e-4 * (hi - lo).max(tol) && hi - lo > 1e3 * tol {
        let mid = 0.5 * (lo + hi);
        if f(mid).signum() == s_lo {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-6 * ls.feature_scale() {
            break;
        }
    }
    let mut t = 0.5 * (lo + hi);
    for _ in 0..50 {
        let ft = f(t);
        if ft == 0.0 {
            return t;
        }
        if ft.signum() == s_lo {
            lo = t;
        } else {
            hi = t;
        }
        let dft = ls.gradient(&(z + t * d)).dot(d);
        let mut next = t - ft / dft;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        let done = (next - t).abs() <= tol;
        t = next;
        if done || hi - lo <= tol {
            break;
        }
    }
    t
}

fn check_transversal(ls: &dyn LevelSet, p: &Vec3, d: &Vec3, t: f64) -> Result<()> {
    let g = ls.gradient(p);
    let cosine = g.dot(d).abs() / g.norm();
    if cosine < TANGENCY_COSINE {
        return Err(Error::TangencyDetected { t, cosine });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_roots_stable() {
        let r = quadratic_roots(1.0, -3.0, 2.0);
        assert!((r[0] - 1.0).abs() < 1e-15 && (r[1] - 2.0).abs() < 1e-15);
        let r = quadratic_roots(1.0, 1e8, 1.0);
        assert!((r[1] + 1e-8).abs() < 1e-20);
        assert!(quadratic_roots(1.0, 0.0, 1.0).is_empty());
    }

    #[test]
    fn torus_gradient_matches_finite_differences() {
        let t = Torus::new(2.0, 0.5).unwrap();
        let x = Vec3::new(0.7, -1.3, 0.4);
        let g = t.gradient(&x);
        let h = 1e-6;
        for i in 0..3 {
            let mut e = Vec3::zeros();
            e[i] = h;
            let fd = (t.value(&(x + e)) - t.value(&(x - e))) / (2.0 * h);
            assert!((fd - g[i]).abs() < 1e-6 * g.norm());
        }
    }

    #[test]
    fn torus_ray_roots() {
        let t = Torus::new(2.0, 0.5).unwrap();
        let z = Vec3::new(-5.0, 0.0, 0.0);
        let d = Vec3::new(1.0, 0.0, 0.0);
        let r = isolate_roots(&t, &z, &d, 0.0, 20.0, 1.0).unwrap();
        let want = [2.5, 3.5, 6.5, 7.5];
        assert_eq!(r.len(), 4);
        for (a, b) in r.iter().zip(want) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn tangent_ray_is_reported() {
        let s = ImplicitSphere { dim: 3, center: Vec3::zeros(), radius: 1.0 };
        let z = Vec3::new(-3.0, 1.0, 0.0);
        let d = Vec3::new(1.0, 0.0, 0.0);
        // grazing the sphere at (0,1,0): either no sign change or a tangency report
        match isolate_roots(&s, &z, &d, 0.0, 10.0, 1.0) {
            Ok(r) => assert!(r.is_empty()),
            Err(e) => assert!(matches!(e, Error::TangencyDetected { .. })),
        }
        let g = QuadraticGraph { a: 1.0, b: 0.0, c: 0.0 };
        let z = Vec3::new(0.0, 0.0, -1.0);
        let d = Vec3::new(1.0, 0.0, 0.0);
        assert!(isolate_roots(&g, &z, &d, 0.0, 10.0, -1.0).unwrap().is_empty());
    }
}
