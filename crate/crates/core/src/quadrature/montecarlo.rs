//! Monte-Carlo estimates of double integrals against |x−y|^{-n-σ}.
//!
//! Pairs are drawn as x uniform in a box and y = x ± r·u with u uniform on the
//! unit sphere (the ± pair is antithetic). The radius follows a two-piece density:
//! r^β on (0, R₁) with β chosen so that boundary-layer pairs have finite variance,
//! and r^{-1-σ} beyond R₁, which makes far-field weights exactly constant.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::spec::QuadratureSpec;
use crate::specfun::{tangent_ball_volume, unit_sphere_measure};
use crate::surface::{Parity, SurfaceScene, Vec3};

pub type Indicator<'a> = &'a (dyn Fn(&Vec3) -> bool + Sync);

/// Pairs closer than this are rejected and redrawn.
pub const MIN_PAIR_DISTANCE: f64 = 1e-12;
/// Probability of drawing the near-field radius piece.
const NEAR_MASS: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub lo: Vec3,
    pub hi: Vec3,
}

impl BoundingBox {
    pub fn new(lo: Vec3, hi: Vec3) -> Result<Self> {
        if (0..3).any(|i| !(hi[i] >= lo[i])) {
            return Err(Error::InvalidInput("bounding box corners out of order".into()));
        }
        Ok(BoundingBox { lo, hi })
    }

    /// Cube of half-width `r` about `c`.
    pub fn cube(c: Vec3, r: f64) -> Self {
        let d = Vec3::repeat(r);
        BoundingBox { lo: c - d, hi: c + d }
    }

    pub fn volume(&self, dim: usize) -> f64 {
        (0..dim).map(|i| self.hi[i] - self.lo[i]).product()
    }

    pub fn diameter(&self, dim: usize) -> f64 {
        (0..dim).map(|i| (self.hi[i] - self.lo[i]).powi(2)).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        BoundingBox { lo: lambda * self.lo, hi: lambda * self.hi }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_error: f64,
    /// Number of y draws (two per antithetic pair).
    pub samples: u64,
}

/// Near-field exponent β: pairs straddling a boundary within distance r have
/// probability O(r), so the second moment is finite iff β < −2σ.
fn near_exponent(sigma: f64) -> f64 {
    (-(1.0 + 2.0 * sigma) / 2.0).max(-0.95)
}

struct RadialSampler {
    r1: f64,
    beta: f64,
    sigma: f64,
}

impl RadialSampler {
    fn draw(&self, rng: &mut ChaCha8Rng) -> f64 {
        let u: f64 = 1.0 - rng.gen::<f64>();
        if rng.gen::<f64>() < NEAR_MASS {
            self.r1 * u.powf(1.0 / (self.beta + 1.0))
        } else {
            self.r1 * u.powf(-1.0 / self.sigma)
        }
    }

    fn pdf(&self, r: f64) -> f64 {
        let x = r / self.r1;
        if r < self.r1 {
            NEAR_MASS * (self.beta + 1.0) * x.powf(self.beta) / self.r1
        } else {
            (1.0 - NEAR_MASS) * self.sigma * x.powf(-1.0 - self.sigma) / self.r1
        }
    }
}

fn unit_direction(dim: usize, rng: &mut ChaCha8Rng) -> Vec3 {
    let phi = 2.0 * std::f64::consts::PI * rng.gen::<f64>();
    if dim == 2 {
        return Vec3::new(phi.cos(), phi.sin(), 0.0);
    }
    let z: f64 = 2.0 * rng.gen::<f64>() - 1.0;
    let s = (1.0 - z * z).max(0.0).sqrt();
    Vec3::new(s * phi.cos(), s * phi.sin(), z)
}

fn uniform_in(b: &BoundingBox, dim: usize, rng: &mut ChaCha8Rng) -> Vec3 {
    let mut x = Vec3::zeros();
    for i in 0..dim {
        x[i] = b.lo[i] + (b.hi[i] - b.lo[i]) * rng.gen::<f64>();
    }
    x
}

/// `(1/α_{n−1}) ∫_{x∈box} ∫_{y∈ℝⁿ} g(x,y) |x−y|^{-n-σ} dy dx`. `g` returns `None` for
/// pairs that must be redrawn (a segment endpoint on the surface, a tangency).
pub fn mc_pair_integral<G>(g: G, sigma: f64, dim: usize, bbox: &BoundingBox, spec: &QuadratureSpec) -> Result<McEstimate>
where
    G: Fn(&Vec3, &Vec3) -> Option<f64> + Sync,
{
    if !(sigma > 0.0 && sigma < 1.0) {
        return Err(Error::Domain(format!("sigma = {sigma} must lie in (0, 1)")));
    }
    if !(2..=3).contains(&dim) {
        return Err(Error::InvalidInput(format!("dimension {dim} unsupported")));
    }
    let nb = spec.mc_batches.max(2);
    let pairs = (spec.mc_samples / (2 * nb as u64)).max(1);
    let vol = bbox.volume(dim);
    let r1 = bbox.diameter(dim).max(f64::MIN_POSITIVE);
    let sampler = RadialSampler { r1, beta: near_exponent(sigma), sigma };
    let norm = vol * unit_sphere_measure(dim) / tangent_ball_volume(dim);
    let means: Vec<Result<f64>> = (0..nb)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
            rng.set_stream(b as u64);
            let mut acc = 0.0;
            for _ in 0..pairs {
                let mut tries = 0;
                let v = loop {
                    tries += 1;
                    if tries > 1000 {
                        return Err(Error::InvalidInput("integrand rejected 1000 consecutive pairs".into()));
                    }
                    let x = uniform_in(bbox, dim, &mut rng);
                    let r = sampler.draw(&mut rng);
                    if r < MIN_PAIR_DISTANCE || !r.is_finite() {
                        continue;
                    }
                    let u = unit_direction(dim, &mut rng);
                    let (Some(gp), Some(gm)) = (g(&x, &(x + r * u)), g(&x, &(x - r * u))) else {
                        continue;
                    };
                    break 0.5 * (gp + gm) * r.powf(-1.0 - sigma) / sampler.pdf(r);
                };
                acc += v;
            }
            Ok(norm * acc / pairs as f64)
        })
        .collect();
    let means = means.into_iter().collect::<Result<Vec<_>>>()?;
    let m = means.iter().sum::<f64>() / nb as f64;
    let var = means.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (nb - 1) as f64;
    Ok(McEstimate { estimate: m, std_error: (var / nb as f64).sqrt(), samples: 2 * pairs * nb as u64 })
}

/// The interaction functional ℐ(A,B); `bbox` must contain A.
pub fn mc_double_integral(
    a: Indicator,
    b: Indicator,
    sigma: f64,
    dim: usize,
    bbox: &BoundingBox,
    spec: &QuadratureSpec,
) -> Result<McEstimate> {
    mc_pair_integral(|x, y| Some(if a(x) && b(y) { 1.0 } else { 0.0 }), sigma, dim, bbox, spec)
}

/// σ-Per(E, Ω) = ℐ(E∩Ω, ∁E∩Ω) + ℐ(E∩Ω, ∁E∖Ω) + ℐ(E∖Ω, ∁E∩Ω), written as a single
/// integral over x ∈ E; `bbox` must contain E.
pub fn sigma_perimeter(
    e: Indicator,
    omega: Indicator,
    sigma: f64,
    dim: usize,
    bbox: &BoundingBox,
    spec: &QuadratureSpec,
) -> Result<McEstimate> {
    mc_pair_integral(
        |x, y| Some(if e(x) && !e(y) && (omega(x) || omega(y)) { 1.0 } else { 0.0 }),
        sigma,
        dim,
        bbox,
        spec,
    )
}

/// σ-Area(S, Ω) over odd-parity pairs. Using the symmetry of the integrand the
/// x-integral is restricted to Ω: the weight is ½(1 + 1[y ∉ Ω]). `bbox` must contain Ω.
pub fn sigma_area(
    scene: &SurfaceScene,
    omega: Indicator,
    sigma: f64,
    bbox: &BoundingBox,
    spec: &QuadratureSpec,
) -> Result<McEstimate> {
    mc_pair_integral(
        |x, y| {
            if !omega(x) {
                return Some(0.0);
            }
            match scene.segment_parity(x, y) {
                Ok(Parity::Odd) => Some(if omega(y) { 0.5 } else { 1.0 }),
                Ok(Parity::Even) => Some(0.0),
                Err(_) => None,
            }
        },
        sigma,
        scene.dim(),
        bbox,
        spec,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(samples: u64) -> QuadratureSpec {
        QuadratureSpec { mc_samples: samples, ..Default::default() }
    }

    fn ball(c: Vec3, r: f64) -> impl Fn(&Vec3) -> bool + Sync {
        move |x: &Vec3| (x - c).norm() < r
    }

    #[test]
    fn disjoint_sets_bound_and_symmetry() {
        let sigma = 0.4;
        let (ca, cb) = (Vec3::zeros(), Vec3::new(3.0, 0.0, 0.0));
        let (a, b) = (ball(ca, 0.5), ball(cb, 0.5));
        let s = spec(400_000);
        let ab = mc_double_integral(&a, &b, sigma, 3, &BoundingBox::cube(ca, 0.5), &s).unwrap();
        let ba = mc_double_integral(&b, &a, sigma, 3, &BoundingBox::cube(cb, 0.5), &s).unwrap();
        let vol = 4.0 / 3.0 * std::f64::consts::PI * 0.125;
        let d: f64 = 2.0;
        assert!(ab.estimate > 0.0);
        assert!(ab.estimate <= vol * vol * d.powf(-3.0 - sigma) / std::f64::consts::PI);
        let comb = (ab.std_error.powi(2) + ba.std_error.powi(2)).sqrt();
        assert!((ab.estimate - ba.estimate).abs() < 3.0 * comb, "{ab:?} {ba:?}");
    }

    #[test]
    fn reproducible_from_seed() {
        let a = ball(Vec3::zeros(), 1.0);
        let na = |x: &Vec3| x.norm() >= 1.0;
        let bbox = BoundingBox::cube(Vec3::zeros(), 1.0);
        let r1 = mc_double_integral(&a, &na, 0.3, 2, &bbox, &spec(20_000)).unwrap();
        let r2 = mc_double_integral(&a, &na, 0.3, 2, &bbox, &spec(20_000)).unwrap();
        assert_eq!(r1, r2);
        let r3 = mc_double_integral(&a, &na, 0.3, 2, &bbox, &QuadratureSpec { rng_seed: 7, ..spec(20_000) }).unwrap();
        assert_ne!(r1.estimate, r3.estimate);
    }

    #[test]
    fn even_pairs_outside_omega_contribute_nothing() {
        let s = SurfaceScene::sphere(3, Vec3::zeros(), 1.0).unwrap();
        let far = ball(Vec3::new(10.0, 0.0, 0.0), 0.5);
        let v = sigma_area(&s, &far, 0.3, &BoundingBox::cube(Vec3::new(10.0, 0.0, 0.0), 0.5), &spec(50_000)).unwrap();
        // only pairs reaching into the unit ball count; they are rare and far
        assert!(v.estimate >= 0.0 && v.estimate < 1e-2);
    }

    #[test]
    fn area_matches_perimeter_small() {
        let sigma = 0.25;
        let s = SurfaceScene::sphere(3, Vec3::zeros(), 1.0).unwrap();
        let (e, omega) = (ball(Vec3::zeros(), 1.0), ball(Vec3::zeros(), 2.0));
        let sp = spec(1_000_000);
        let per = sigma_perimeter(&e, &omega, sigma, 3, &BoundingBox::cube(Vec3::zeros(), 1.0), &sp).unwrap();
        let area = sigma_area(&s, &omega, sigma, &BoundingBox::cube(Vec3::zeros(), 2.0), &sp).unwrap();
        let comb = (per.std_error.powi(2) + area.std_error.powi(2)).sqrt();
        assert!((per.estimate - area.estimate).abs() < 3.0 * comb, "{per:?} {area:?}");
        assert!(per.std_error < 0.05 * per.estimate);
    }
}
