//! Nonlocal curvatures assembled from the quadrature engines: directional curvature
//! k_{σ,e}, mean curvature by two routes, the curvature tensor in three
//! representations, its determinant and the double-integral Gaussian curvature,
//! the classical reconstruction and σ → 1 extrapolation.

pub mod limits;
pub mod report;
pub mod tensor;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::halfplane::{halfplane_pv_integral, HalfPlaneResult};
use crate::quadrature::meshsurf::surface_integral;
use crate::quadrature::volume::volume_pv_integral;
use crate::quadrature::{Diagnostics, QuadratureSpec};
use crate::specfun::tangent_sphere_measure;
use crate::surface::{SurfaceScene, TangentFrame, Vec3};

pub use limits::{sigma_to_one_limit, sigma_to_one_limit_tensor, LimitEstimate};
pub use report::{curvature_report, CurvatureReport};
pub use tensor::SymTangentTensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Representation {
    /// Directional curvatures weighted by (n+σ)e⊗e − 1 over the tangent directions.
    Angular,
    /// Spherical-coordinate integral of χ̂ over ℝⁿ with the projected direction ê.
    Fullspace,
    /// Surface integral of (z−y)·n over a triangle mesh.
    Surface,
}

impl Representation {
    pub const ALL: [Representation; 3] = [Representation::Angular, Representation::Fullspace, Representation::Surface];

    pub fn name(&self) -> &'static str {
        match self {
            Representation::Angular => "angular",
            Representation::Fullspace => "fullspace",
            Representation::Surface => "surface",
        }
    }
}

impl std::str::FromStr for Representation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "angular" => Ok(Representation::Angular),
            "fullspace" => Ok(Representation::Fullspace),
            "surface" => Ok(Representation::Surface),
            _ => Err(Error::InvalidInput(format!("unknown representation '{s}'"))),
        }
    }
}

/// Quadrature grid on the unit sphere of T_zS: uniform azimuths for n = 3 (optionally
/// shifted by half a step), the two points ±e₁ with unit weight for n = 2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionGrid {
    pub psi: Vec<f64>,
    pub weights: Vec<f64>,
}

impl DirectionGrid {
    pub fn new(dim: usize, n_dir: usize, staggered: bool) -> Self {
        if dim == 2 {
            return DirectionGrid { psi: vec![0.0, std::f64::consts::PI], weights: vec![1.0, 1.0] };
        }
        let h = 2.0 * std::f64::consts::PI / n_dir as f64;
        let off = if staggered { 0.5 } else { 0.0 };
        DirectionGrid { psi: (0..n_dir).map(|j| (j as f64 + off) * h).collect(), weights: vec![h; n_dir] }
    }

    pub fn len(&self) -> usize {
        self.psi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.psi.is_empty()
    }

    /// Frame coordinates of the direction at node `j`.
    pub fn coords(&self, j: usize, tangent_dim: usize) -> Vec<f64> {
        let p = self.psi[j];
        match tangent_dim {
            1 => vec![p.cos().signum()],
            _ => vec![p.cos(), p.sin()],
        }
    }
}

/// k_{σ,e} over a direction grid at one point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionalSamples {
    pub frame: TangentFrame,
    pub sigma: f64,
    pub grid: DirectionGrid,
    pub k: Vec<f64>,
    pub diagnostics: Diagnostics,
}

fn check_sigma(sigma: f64) -> Result<()> {
    if !(sigma > 0.0 && sigma < 1.0) {
        return Err(Error::Domain(format!("sigma = {sigma} must lie in (0, 1)")));
    }
    Ok(())
}

fn dim_of(frame: &TangentFrame) -> usize {
    frame.tangent_dim() + 1
}

/// `Σ_j w_j k_j ((c·e_j⊗e_j) − 1)` in frame coordinates.
fn weighted_outer(grid: &DirectionGrid, k: &[f64], m: usize, c: f64) -> Vec<Vec<f64>> {
    let mut out = vec![vec![0.0; m]; m];
    for j in 0..grid.len() {
        let e = grid.coords(j, m);
        let wk = grid.weights[j] * k[j];
        for a in 0..m {
            for b in 0..m {
                let d = if a == b { 1.0 } else { 0.0 };
                out[a][b] += wk * (c * e[a] * e[b] - d);
            }
        }
    }
    out
}

impl DirectionalSamples {
    pub fn dim(&self) -> usize {
        dim_of(&self.frame)
    }

    /// `(1/ω_{n−2}) ∫ k_{σ,e} de`.
    pub fn mean_curvature(&self) -> f64 {
        let s: f64 = self.grid.weights.iter().zip(&self.k).map(|(w, k)| w * k).sum();
        s / tangent_sphere_measure(self.dim())
    }

    /// `(n−1)/((1+σ)ω_{n−2}) ∫ k_{σ,e} ((n+σ)e⊗e − 1) de`.
    pub fn angular_tensor(&self) -> Result<SymTangentTensor> {
        let n = self.dim() as f64;
        let m = weighted_outer(&self.grid, &self.k, self.frame.tangent_dim(), n + self.sigma);
        let c = (n - 1.0) / ((1.0 + self.sigma) * tangent_sphere_measure(self.dim()));
        SymTangentTensor::new(self.frame.clone(), m.into_iter().map(|r| r.into_iter().map(|x| c * x).collect()).collect())
    }

    /// `1/(2(1+σ)²π²) ∬ k_{σ,ẽ} k_{σ,e} [(3+σ)² sin²∠(e,ẽ) − 2(2+σ)] de dẽ` (n = 3).
    pub fn gaussian_double_integral(&self) -> Result<f64> {
        if self.dim() != 3 {
            return Err(Error::InvalidInput("the double-integral Gaussian curvature needs n = 3".into()));
        }
        let s = self.sigma;
        let g = &self.grid;
        let total: f64 = (0..g.len())
            .into_par_iter()
            .map(|i| {
                let mut acc = 0.0;
                for j in 0..g.len() {
                    let sn = (g.psi[i] - g.psi[j]).sin();
                    acc += g.weights[j] * self.k[j] * ((3.0 + s).powi(2) * sn * sn - 2.0 * (2.0 + s));
                }
                g.weights[i] * self.k[i] * acc
            })
            .collect::<Vec<_>>()
            .iter()
            .sum();
        Ok(total / (2.0 * (1.0 + s).powi(2) * std::f64::consts::PI.powi(2)))
    }
}

/// Frame at a point of S, checked to lie on it.
pub fn frame_at(scene: &SurfaceScene, z: &Vec3) -> Result<TangentFrame> {
    scene.tangent_frame(z)
}

/// k_{σ,e}(z) for a unit tangent `e`.
pub fn directional_curvature(
    scene: &SurfaceScene,
    z: &Vec3,
    e: &Vec3,
    sigma: f64,
    spec: &QuadratureSpec,
) -> Result<HalfPlaneResult> {
    check_sigma(sigma)?;
    let f = frame_at(scene, z)?;
    halfplane_pv_integral(scene, &f, e, sigma, spec)
}

/// k_{σ,e} over the direction grid of `spec.n_dir` nodes, in parallel.
pub fn directional_samples(
    scene: &SurfaceScene,
    frame: &TangentFrame,
    sigma: f64,
    spec: &QuadratureSpec,
    staggered: bool,
) -> Result<DirectionalSamples> {
    check_sigma(sigma)?;
    let grid = DirectionGrid::new(dim_of(frame), spec.n_dir, staggered);
    let res: Vec<Result<HalfPlaneResult>> = grid
        .psi
        .par_iter()
        .map(|&p| halfplane_pv_integral(scene, frame, &frame.direction(p), sigma, spec))
        .collect();
    let mut k = Vec::with_capacity(grid.len());
    let mut diag = Diagnostics::default();
    for r in res {
        let r = r?;
        k.push(r.value);
        diag.merge(&r.diagnostics);
    }
    Ok(DirectionalSamples { frame: frame.clone(), sigma, grid, k, diagnostics: diag })
}

/// H_σ by averaging k_{σ,e} over tangent directions.
pub fn mean_curvature_avg(scene: &SurfaceScene, z: &Vec3, sigma: f64, spec: &QuadratureSpec) -> Result<f64> {
    let f = frame_at(scene, z)?;
    Ok(directional_samples(scene, &f, sigma, spec, false)?.mean_curvature())
}

/// H_σ from the integral of χ̂ over ℝⁿ.
pub fn mean_curvature_volume(scene: &SurfaceScene, z: &Vec3, sigma: f64, spec: &QuadratureSpec) -> Result<f64> {
    let f = frame_at(scene, z)?;
    let v = volume_pv_integral(scene, &f, sigma, spec)?;
    Ok(v.scalar / tangent_sphere_measure(scene.dim()))
}

/// Mean curvature and tensor from the mesh surface representation.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceCurvature {
    pub mean: f64,
    pub tensor: SymTangentTensor,
    pub diagnostics: Diagnostics,
}

pub fn surface_curvature(scene: &SurfaceScene, z: &Vec3, sigma: f64, spec: &QuadratureSpec) -> Result<SurfaceCurvature> {
    if scene.dim() != 3 {
        return Err(Error::RepresentationUnavailable("surface representation needs n = 3".into()));
    }
    let si = surface_integral(scene, z, sigma, spec)?;
    let n = 3.0;
    let om = tangent_sphere_measure(3);
    let c = 2.0 * (n - 1.0) / ((1.0 + sigma) * sigma * om);
    let m = si.tensor.iter().map(|r| r.iter().map(|x| c * x).collect()).collect();
    Ok(SurfaceCurvature {
        mean: 2.0 * si.scalar / (sigma * om),
        tensor: SymTangentTensor::new(si.frame, m)?,
        diagnostics: si.diagnostics,
    })
}

/// L_σ in a given frame by the chosen representation. The surface representation
/// uses its own frame at the nearest mesh vertex.
pub fn curvature_tensor_in(
    scene: &SurfaceScene,
    frame: &TangentFrame,
    sigma: f64,
    spec: &QuadratureSpec,
    rep: Representation,
) -> Result<SymTangentTensor> {
    check_sigma(sigma)?;
    match rep {
        Representation::Angular => directional_samples(scene, frame, sigma, spec, false)?.angular_tensor(),
        Representation::Fullspace => {
            let v = volume_pv_integral(scene, frame, sigma, spec)?;
            let n = scene.dim() as f64;
            let c = (n - 1.0) / ((1.0 + sigma) * tangent_sphere_measure(scene.dim()));
            SymTangentTensor::new(frame.clone(), v.tensor.into_iter().map(|r| r.into_iter().map(|x| c * x).collect()).collect())
        }
        Representation::Surface => Ok(surface_curvature(scene, &frame.origin, sigma, spec)?.tensor),
    }
}

pub fn curvature_tensor(
    scene: &SurfaceScene,
    z: &Vec3,
    sigma: f64,
    spec: &QuadratureSpec,
    rep: Representation,
) -> Result<SymTangentTensor> {
    let f = frame_at(scene, z)?;
    curvature_tensor_in(scene, &f, sigma, spec, rep)
}

/// K_σ = det L_σ.
pub fn gaussian_curvature(l: &SymTangentTensor) -> f64 {
    l.det()
}

/// Double-integral K_σ on the half-step-shifted direction grid, so the samples are
/// independent of those behind the angular tensor.
pub fn gaussian_double_integral(scene: &SurfaceScene, z: &Vec3, sigma: f64, spec: &QuadratureSpec) -> Result<f64> {
    let f = frame_at(scene, z)?;
    directional_samples(scene, &f, sigma, spec, true)?.gaussian_double_integral()
}

/// Classical tensor `(n−1)/(2ω_{n−2}) ∫ k_e ((n+1)e⊗e − 1) de` from classical
/// directional curvatures sampled on `grid`.
pub fn classical_reconstruction(frame: &TangentFrame, grid: &DirectionGrid, k: &[f64]) -> Result<SymTangentTensor> {
    if k.len() != grid.len() {
        return Err(Error::InvalidInput("one sample per grid direction required".into()));
    }
    let dim = dim_of(frame);
    let n = dim as f64;
    let m = weighted_outer(grid, k, frame.tangent_dim(), n + 1.0);
    let c = (n - 1.0) / (2.0 * tangent_sphere_measure(dim));
    SymTangentTensor::new(frame.clone(), m.into_iter().map(|r| r.into_iter().map(|x| c * x).collect()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::{beta, tangent_ball_volume};
    use crate::surface::Torus;
    use std::sync::Arc;

    fn sphere_k(n: usize, rho: f64, sigma: f64) -> f64 {
        -beta((1.0 - sigma) / 2.0, (n as f64 - 1.0) / 2.0).unwrap() / (sigma * (2.0 * rho).powf(sigma))
    }

    fn small() -> QuadratureSpec {
        QuadratureSpec { n_phi: 128, n_dir: 16, n_polar: 96, n_azimuth: 32, ..Default::default() }
    }

    #[test]
    fn plane_is_flat() {
        let p = SurfaceScene::plane(3, Vec3::zeros(), Vec3::z()).unwrap();
        let z = Vec3::zeros();
        let s = small();
        assert!(mean_curvature_avg(&p, &z, 0.5, &s).unwrap().abs() < 1e-12);
        let l = curvature_tensor(&p, &z, 0.5, &s, Representation::Fullspace).unwrap();
        assert!(l.max_abs() < 1e-12);
        assert_eq!(gaussian_curvature(&l), 0.0);
    }

    #[test]
    fn sphere_tensor_and_gauss() {
        let (rho, sigma) = (0.5, 0.5);
        let s = SurfaceScene::sphere(3, Vec3::zeros(), rho).unwrap();
        let z = Vec3::new(0.3, 0.0, 0.4);
        let k = sphere_k(3, rho, sigma);
        let l = curvature_tensor(&s, &z, sigma, &small(), Representation::Angular).unwrap();
        assert!((l.matrix[0][1]).abs() < 1e-6 * k.abs());
        assert!((l.matrix[0][0] / k - 1.0).abs() < 1e-4);
        let kd = gaussian_double_integral(&s, &z, sigma, &small()).unwrap();
        assert!((kd / l.det() - 1.0).abs() < 1e-4, "{kd} vs {}", l.det());
        let h = mean_curvature_volume(&s, &z, sigma, &small()).unwrap();
        assert!((h / k - 1.0).abs() < 1e-4);
    }

    #[test]
    fn circle_average_is_single_pair() {
        let s = SurfaceScene::sphere(2, Vec3::zeros(), 1.0).unwrap();
        let z = Vec3::new(0.0, 1.0, 0.0);
        let f = frame_at(&s, &z).unwrap();
        let d = directional_samples(&s, &f, 0.5, &small(), false).unwrap();
        assert_eq!(d.k.len(), 2);
        assert!((d.mean_curvature() - d.k[0]).abs() < 1e-12 * d.k[0].abs());
        let l = d.angular_tensor().unwrap();
        assert!((l.trace() - d.mean_curvature()).abs() < 1e-12);
    }

    #[test]
    fn trace_identity_on_torus() {
        let t = SurfaceScene::implicit(Arc::new(Torus::new(2.0, 0.5).unwrap())).unwrap();
        let z = Vec3::new(2.5, 0.0, 0.0);
        let f = frame_at(&t, &z).unwrap();
        let d = directional_samples(&t, &f, 0.5, &small(), false).unwrap();
        let l = d.angular_tensor().unwrap();
        let h = d.mean_curvature();
        assert!((l.trace() / 2.0 - h).abs() <= 1e-10 * h.abs());
        assert!(l.asymmetry < 1e-12);
    }

    #[test]
    fn classical_reconstruction_recovers_diagonal() {
        let f = TangentFrame { origin: Vec3::zeros(), normal: Vec3::z(), tangents: vec![Vec3::x(), Vec3::y()] };
        let grid = DirectionGrid::new(3, 256, false);
        let (d1, d2) = (-1.5, 0.25);
        let k: Vec<f64> = grid.psi.iter().map(|p| d1 * p.cos().powi(2) + d2 * p.sin().powi(2)).collect();
        let l = classical_reconstruction(&f, &grid, &k).unwrap();
        assert!((l.matrix[0][0] - d1).abs() < 1e-12 && (l.matrix[1][1] - d2).abs() < 1e-12);
        assert!(l.matrix[0][1].abs() < 1e-12);
        let int: f64 = grid.weights.iter().zip(&k).map(|(w, k)| w * k).sum();
        assert!((l.trace() - int / tangent_ball_volume(3)).abs() < 1e-12);
        let c = classical_reconstruction(&f, &grid, &vec![3.0; 256]).unwrap();
        assert!((c.matrix[0][0] - 3.0).abs() < 1e-12 && c.matrix[0][1].abs() < 1e-12);
    }
}
