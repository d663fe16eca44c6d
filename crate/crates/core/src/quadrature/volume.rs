//! Principal-value integrals of χ̂(z,·) |z−y|^{-n-σ} over all of ℝⁿ in spherical
//! coordinates about z. Rays come in antipodal pairs, whose ε^{-σ} coefficients
//! cancel; the polar variable is the normal component `t = a·n`, where the finite
//! part behaves like |t|^{-σ}.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quadrature::halfplane::CANCELLATION_TOL;
use crate::quadrature::radial::{radial_pv, ray_signs_jittered};
use crate::quadrature::rules::endpoint_singular;
use crate::quadrature::spec::{Diagnostics, QuadratureSpec, TailHandling};
use crate::surface::{SurfaceScene, TangentFrame, Vec3};

/// Angle to ±n below which the ê⊗ê term is dropped.
pub const NORMAL_RAY_ANGLE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct VolumeIntegral {
    /// `∫_{ℝⁿ} χ̂ |z−y|^{-n-σ} dy`
    pub scalar: f64,
    /// `∫_{ℝⁿ} χ̂ |z−y|^{-n-σ} ((n+σ)ê⊗ê − 1) dy`, frame coordinates.
    pub tensor: Vec<Vec<f64>>,
    pub diagnostics: Diagnostics,
}

struct Acc {
    scalar: f64,
    tensor: Vec<Vec<f64>>,
    div: f64,
    tail: f64,
    jittered: usize,
}

impl Acc {
    fn new(m: usize) -> Self {
        Acc { scalar: 0.0, tensor: vec![vec![0.0; m]; m], div: 0.0, tail: 0.0, jittered: 0 }
    }

    fn add(&mut self, o: &Acc) {
        self.scalar += o.scalar;
        for (r, q) in self.tensor.iter_mut().zip(&o.tensor) {
            for (a, b) in r.iter_mut().zip(q) {
                *a += b;
            }
        }
        self.div += o.div;
        self.tail += o.tail;
        self.jittered += o.jittered;
    }
}

#[allow(clippy::too_many_arguments)]
fn ray(
    scene: &SurfaceScene,
    frame: &TangentFrame,
    a: &Vec3,
    jitter: &Vec3,
    ehat: Option<&[f64]>,
    w: f64,
    sigma: f64,
    r_max: f64,
    tail: TailHandling,
    acc: &mut Acc,
) -> Result<()> {
    let n = scene.dim() as f64;
    let (rp, jit) = ray_signs_jittered(scene, &frame.origin, &frame.normal, a, jitter, sigma, r_max)?;
    let pv = radial_pv(&rp, w, Some(r_max), tail);
    acc.scalar += pv.finite_part;
    acc.div += pv.divergence_coeff;
    acc.tail += pv.tail.abs();
    acc.jittered += jit as usize;
    let m = acc.tensor.len();
    for i in 0..m {
        for j in 0..m {
            let ee = ehat.map_or(0.0, |e| e[i] * e[j]);
            let delta = if i == j { 1.0 } else { 0.0 };
            acc.tensor[i][j] += pv.finite_part * ((n + sigma) * ee - delta);
        }
    }
    Ok(())
}

/// Scalar and tensor integrals over ℝⁿ with `spec.n_polar` polar nodes per hemisphere
/// and, for n = 3, `spec.n_azimuth` azimuths (offset by half a step).
pub fn volume_pv_integral(
    scene: &SurfaceScene,
    frame: &TangentFrame,
    sigma: f64,
    spec: &QuadratureSpec,
) -> Result<VolumeIntegral> {
    if !(sigma > 0.0 && sigma < 1.0) {
        return Err(Error::Domain(format!("sigma = {sigma} must lie in (0, 1)")));
    }
    let r_max = spec.r_max_for(scene.scale());
    let tail = spec.tail_handling;
    let n = frame.normal;
    let m = frame.tangent_dim();
    let parts: Vec<Result<Acc>> = match scene.dim() {
        2 => {
            let e = frame.tangents[0];
            let rule = endpoint_singular(spec.n_polar / 2, sigma, std::f64::consts::FRAC_PI_2)?;
            rule.nodes
                .par_iter()
                .zip(rule.weights.par_iter())
                .map(|(&x, &w)| {
                    let mut acc = Acc::new(m);
                    let (sx, cx) = x.sin_cos();
                    // θ = x and π − x on the normal side, both antipodes
                    for (ce, sn) in [(cx, sx), (-cx, sx), (-cx, -sx), (cx, -sx)] {
                        let a = ce * e + sn * n;
                        let jitter = -sn * e + ce * n;
                        let eh = [ce.signum()];
                        ray(scene, frame, &a, &jitter, Some(&eh), w, sigma, r_max, tail, &mut acc)?;
                    }
                    Ok(acc)
                })
                .collect()
        }
        _ => {
            let (e1, e2) = (frame.tangents[0], frame.tangents[1]);
            let rule = endpoint_singular(spec.n_polar, sigma, 1.0)?;
            let naz = spec.n_azimuth;
            let dpsi = 2.0 * std::f64::consts::PI / naz as f64;
            rule.nodes
                .par_iter()
                .zip(rule.weights.par_iter())
                .map(|(&t, &wt)| {
                    let mut acc = Acc::new(m);
                    let s = (1.0 - t * t).max(0.0).sqrt();
                    let near_normal = s < NORMAL_RAY_ANGLE.sin();
                    for j in 0..naz {
                        let psi = (j as f64 + 0.5) * dpsi;
                        let (sp, cp) = psi.sin_cos();
                        let tan = cp * e1 + sp * e2;
                        let a = t * n + s * tan;
                        let jitter = -sp * e1 + cp * e2;
                        let eh = [cp, sp];
                        let eh = (!near_normal).then_some(&eh[..]);
                        ray(scene, frame, &a, &jitter, eh, wt * dpsi, sigma, r_max, tail, &mut acc)?;
                        ray(scene, frame, &-a, &jitter, eh, wt * dpsi, sigma, r_max, tail, &mut acc)?;
                    }
                    Ok(acc)
                })
                .collect()
        }
    };
    let mut total = Acc::new(m);
    for p in parts {
        total.add(&p?);
    }
    let mut diag = Diagnostics {
        tail_bound: total.tail,
        cancel_residual: total.div.abs(),
        jittered: total.jittered,
        nodes: match scene.dim() {
            2 => 2 * spec.n_polar,
            _ => 2 * spec.n_polar * spec.n_azimuth,
        },
        ..Default::default()
    };
    if diag.cancel_residual > CANCELLATION_TOL {
        return Err(Error::CancellationFailure(diag.cancel_residual));
    }
    if tail == TailHandling::Truncate && diag.tail_bound > 1e-6 * total.scalar.abs() {
        diag.warnings.push(format!("TruncationWarning: tail bound {:e}", diag.tail_bound));
    }
    Ok(VolumeIntegral { scalar: total.scalar, tensor: total.tensor, diagnostics: diag })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::{beta, tangent_sphere_measure};

    #[test]
    fn plane_vanishes() {
        let p = SurfaceScene::plane(3, Vec3::zeros(), Vec3::z()).unwrap();
        let f = p.tangent_frame(&Vec3::zeros()).unwrap();
        let spec = QuadratureSpec { n_polar: 32, n_azimuth: 16, ..Default::default() };
        let v = volume_pv_integral(&p, &f, 0.5, &spec).unwrap();
        assert!(v.scalar.abs() < 1e-12);
        assert!(v.tensor.iter().flatten().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn sphere_mean_curvature() {
        for (dim, rho, sigma) in [(3usize, 1.0f64, 0.5f64), (2, 0.5, 0.3)] {
            let s = SurfaceScene::sphere(dim, Vec3::zeros(), rho).unwrap();
            let z = Vec3::new(rho, 0.0, 0.0);
            let f = s.tangent_frame(&z).unwrap();
            let spec = QuadratureSpec { n_polar: 128, n_azimuth: 32, ..Default::default() };
            let v = volume_pv_integral(&s, &f, sigma, &spec).unwrap();
            let h = v.scalar / tangent_sphere_measure(dim);
            let want = -beta((1.0 - sigma) / 2.0, (dim as f64 - 1.0) / 2.0).unwrap() / (sigma * (2.0 * rho).powf(sigma));
            assert!(((h - want) / want).abs() < 1e-4, "n={dim}: {h} vs {want}");
        }
    }
}
