use serde::{Deserialize, Serialize};

use crate::curvature::{
    directional_samples, frame_at, surface_curvature, Representation, SymTangentTensor,
};
use crate::error::Result;
use crate::quadrature::volume::volume_pv_integral;
use crate::quadrature::{Diagnostics, QuadratureSpec};
use crate::specfun::tangent_sphere_measure;
use crate::surface::{SurfaceScene, Vec3};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorEntry {
    pub representation: Representation,
    pub tensor: SymTangentTensor,
}

/// Everything computed at one point for one σ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureReport {
    pub z: Vec3,
    pub sigma: f64,
    pub dim: usize,
    /// Azimuths (frame-relative) of the direction grid.
    pub psi: Vec<f64>,
    pub k_samples: Vec<f64>,
    pub h_volume: f64,
    pub h_avg: f64,
    pub tensors: Vec<TensorEntry>,
    /// det of the first requested tensor.
    pub k_gauss: f64,
    /// |H_avg − tr L_angular/(n−1)|
    pub trace_residual: f64,
    pub diagnostics: Diagnostics,
}

impl CurvatureReport {
    pub fn tensor(&self, rep: Representation) -> Option<&SymTangentTensor> {
        self.tensors.iter().find(|t| t.representation == rep).map(|t| &t.tensor)
    }
}

/// Directional samples, both mean curvatures and the requested tensor representations.
pub fn curvature_report(
    scene: &SurfaceScene,
    z: &Vec3,
    sigma: f64,
    spec: &QuadratureSpec,
    reps: &[Representation],
) -> Result<CurvatureReport> {
    let frame = frame_at(scene, z)?;
    let ds = directional_samples(scene, &frame, sigma, spec, false)?;
    let mut diag = ds.diagnostics.clone();
    let vol = volume_pv_integral(scene, &frame, sigma, spec)?;
    diag.merge(&vol.diagnostics);
    let n = scene.dim();
    let h_avg = ds.mean_curvature();
    let angular = ds.angular_tensor()?;
    let mut tensors = Vec::new();
    for &rep in reps {
        let tensor = match rep {
            Representation::Angular => angular.clone(),
            Representation::Fullspace => {
                let c = (n as f64 - 1.0) / ((1.0 + sigma) * tangent_sphere_measure(n));
                SymTangentTensor::new(
                    frame.clone(),
                    vol.tensor.iter().map(|r| r.iter().map(|x| c * x).collect()).collect(),
                )?
            }
            Representation::Surface => {
                let sc = surface_curvature(scene, z, sigma, spec)?;
                diag.merge(&sc.diagnostics);
                sc.tensor
            }
        };
        tensors.push(TensorEntry { representation: rep, tensor });
    }
    let k_gauss = tensors.first().map_or(angular.det(), |t| t.tensor.det());
    Ok(CurvatureReport {
        z: *z,
        sigma,
        dim: n,
        psi: ds.grid.psi.clone(),
        k_samples: ds.k.clone(),
        h_volume: vol.scalar / tangent_sphere_measure(n),
        h_avg,
        tensors,
        k_gauss,
        trace_residual: (h_avg - angular.trace() / (n as f64 - 1.0)).abs(),
        diagnostics: diag,
    })
}
