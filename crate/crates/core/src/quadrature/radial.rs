//! Closed-form radial principal values along a single ray.

use crate::error::{Error, Result};
use crate::quadrature::spec::TailHandling;
use crate::surface::{SurfaceScene, Vec3};

/// Piecewise-constant sign of χ̂ along a ray: `signs[j]` holds on `(breaks[j-1], breaks[j])`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialPiecewise {
    pub signs: Vec<f64>,
    pub breaks: Vec<f64>,
    pub sigma: f64,
}

/// `∫_ε^R r^{-1-σ} s(r) dr · weight = finite_part + divergence_coeff · ε^{-σ}` (+ tail).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialPv {
    pub finite_part: f64,
    pub divergence_coeff: f64,
    /// Contribution of `(r_max, ∞)`: included in `finite_part` for analytic tails,
    /// omitted (and reported here) for truncated ones.
    pub tail: f64,
}

impl RadialPiecewise {
    /// Signs flipping at each crossing, starting from `s0`.
    pub fn alternating(s0: f64, breaks: Vec<f64>, sigma: f64) -> Self {
        let mut signs = Vec::with_capacity(breaks.len() + 1);
        let mut s = s0;
        signs.push(s);
        for _ in &breaks {
            s = -s;
            signs.push(s);
        }
        RadialPiecewise { signs, breaks, sigma }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma < 1.0) {
            return Err(Error::Domain(format!("sigma = {} must lie in (0, 1)", self.sigma)));
        }
        if self.signs.len() != self.breaks.len() + 1 {
            return Err(Error::InvalidInput("need one more sign than breakpoints".into()));
        }
        if self.breaks.windows(2).any(|w| w[0] >= w[1]) || self.breaks.first().is_some_and(|&r| r <= 0.0) {
            return Err(Error::InvalidInput("breakpoints must be positive and increasing".into()));
        }
        Ok(())
    }
}

/// Interval-by-interval closed form; `r_max = None` integrates to infinity.
pub fn radial_pv(rp: &RadialPiecewise, weight: f64, r_max: Option<f64>, tail: TailHandling) -> RadialPv {
    let s = rp.sigma;
    let mut finite = 0.0;
    for (j, &r) in rp.breaks.iter().enumerate() {
        finite += (rp.signs[j + 1] - rp.signs[j]) * r.powf(-s);
    }
    finite /= s;
    let last = *rp.signs.last().expect("at least one sign");
    let tail_val = r_max.map_or(0.0, |r| last * r.powf(-s) / s);
    let finite = match tail {
        TailHandling::Analytic => finite,
        TailHandling::Truncate => finite - tail_val,
    };
    RadialPv {
        finite_part: weight * finite,
        divergence_coeff: weight * rp.signs[0] / s,
        tail: weight * tail_val,
    }
}

/// Finite-ε version of the same integral (for the brute-force cross-check).
pub fn radial_eps(rp: &RadialPiecewise, eps: f64) -> f64 {
    let s = rp.sigma;
    let mut lo = eps;
    let mut acc = 0.0;
    for (j, &r) in rp.breaks.iter().enumerate() {
        if r > lo {
            acc += rp.signs[j] * (lo.powf(-s) - r.powf(-s));
            lo = r;
        }
    }
    let k = rp.breaks.iter().filter(|&&r| r <= eps).count();
    let last = if lo == eps { rp.signs[k] } else { *rp.signs.last().unwrap() };
    (acc + last * lo.powf(-s)) / s
}

/// Sign pattern of χ̂ along the ray `z + r a`, for z on S with oriented normal `n`.
pub fn ray_signs(scene: &SurfaceScene, z: &Vec3, n: &Vec3, a: &Vec3, sigma: f64, r_max: f64) -> Result<RadialPiecewise> {
    let c = scene.crossings(z, a, r_max)?;
    Ok(RadialPiecewise::alternating(scene.initial_sign(n, a), c.ts, sigma))
}

/// Crossing signs along `a`, retrying with a slightly rotated direction after a tangency.
/// The rotation is along `jitter` (a unit vector orthogonal to `a`), by 1e-7 radians per try.
pub fn ray_signs_jittered(
    scene: &SurfaceScene,
    z: &Vec3,
    n: &Vec3,
    a: &Vec3,
    jitter: &Vec3,
    sigma: f64,
    r_max: f64,
) -> Result<(RadialPiecewise, bool)> {
    match ray_signs(scene, z, n, a, sigma, r_max) {
        Ok(rp) => Ok((rp, false)),
        Err(Error::TangencyDetected { .. }) => {
            let s0 = scene.initial_sign(n, a);
            let mut last = None;
            for k in 1..=3 {
                let d = (a + 1e-7 * k as f64 * jitter).normalize();
                match scene.crossings(z, &d, r_max) {
                    Ok(c) => return Ok((RadialPiecewise::alternating(s0, c.ts, sigma), true)),
                    Err(e @ Error::TangencyDetected { .. }) => last = Some(e),
                    Err(e) => return Err(e),
                }
            }
            Err(last.expect("at least one retry"))
        }
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::rules::adaptive;

    #[test]
    fn no_crossing_ray() {
        let rp = RadialPiecewise::alternating(1.0, vec![], 0.5);
        let v = radial_pv(&rp, 1.0, None, TailHandling::Analytic);
        assert_eq!(v.finite_part, 0.0);
        assert_eq!(v.divergence_coeff, 2.0);
    }

    #[test]
    fn single_crossing() {
        let r1: f64 = 0.7;
        let rp = RadialPiecewise::alternating(1.0, vec![r1], 0.4);
        let v = radial_pv(&rp, 1.5, None, TailHandling::Analytic);
        assert!((v.finite_part - (-2.0 * r1.powf(-0.4) * 1.5 / 0.4)).abs() < 1e-14);
    }

    #[test]
    fn matches_numeric_integration() {
        let sigma = 0.3;
        let breaks = vec![0.2, 0.9, 1.7, 4.0];
        let rp = RadialPiecewise::alternating(-1.0, breaks.clone(), sigma);
        let (eps, rmax): (f64, f64) = (0.05, 50.0);
        let v = radial_pv(&rp, 1.0, Some(rmax), TailHandling::Truncate);
        let closed = v.finite_part + v.divergence_coeff * eps.powf(-sigma);
        let mut pts = vec![eps];
        pts.extend(&breaks);
        pts.push(rmax);
        let mut num = 0.0;
        for (j, w) in pts.windows(2).enumerate() {
            num += rp.signs[j] * adaptive(|r: f64| r.powf(-1.0 - sigma), w[0], w[1], 0.0, 1e-15, 200).unwrap();
        }
        assert!(((closed - num) / num).abs() < 1e-12, "{closed} vs {num}");
        assert!((radial_eps(&rp, eps) - v.tail - closed).abs() < 1e-12 * closed.abs());
    }

    #[test]
    fn sphere_crossing_radius() {
        // a ray at polar angle φ > π/2 from a point of a sphere of radius ρ meets it again at −2ρ cos φ
        let (rho, sigma): (f64, f64) = (0.5, 0.5);
        let s = SurfaceScene::sphere(3, Vec3::zeros(), rho).unwrap();
        let z = Vec3::new(0.0, 0.0, rho);
        let n = Vec3::z();
        for phi in [1.7f64, 2.2, 3.0] {
            let a = phi.cos() * n + phi.sin() * Vec3::x();
            let rp = ray_signs(&s, &z, &n, &a, sigma, 1e4).unwrap();
            assert_eq!(rp.signs, vec![1.0, -1.0]);
            let r = -2.0 * rho * phi.cos();
            assert!((rp.breaks[0] - r).abs() < 1e-14);
            let v = radial_pv(&rp, phi.sin(), None, TailHandling::Analytic);
            assert!((v.finite_part + 2.0 * r.powf(-sigma) * phi.sin() / sigma).abs() < 1e-12);
        }
    }
}
