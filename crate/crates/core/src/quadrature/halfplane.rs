//! Half-plane principal-value integral behind the directional curvature k_{σ,e}.
//!
//! In polar coordinates about z on the half-plane spanned by the normal and e,
//! the integrand is `sin^{n-2}φ · r^{-1-σ} χ̂`. Crossing radii along rays close to
//! the tangent direction shrink like |φ − π/2|, so the finite part has an
//! integrable |φ − π/2|^{-σ} singularity; the angular rule therefore puts
//! Jacobi-weighted nodes on both sides of π/2, mirrored, which also makes the
//! ε^{-σ} coefficients cancel pairwise.

use crate::error::{Error, Result};
use crate::quadrature::radial::{radial_eps, radial_pv, ray_signs_jittered, RadialPiecewise};
use crate::quadrature::rules::{adaptive, endpoint_singular, Rule};
use crate::quadrature::spec::{Diagnostics, PvMode, QuadratureSpec, TailHandling};
use crate::surface::{SurfaceScene, TangentFrame, Vec3};

/// Residual ε^{-σ} coefficient above which cancellation is declared failed.
pub const CANCELLATION_TOL: f64 = 1e-10;

/// Angular rule on `(0, π/2)` in the offset `x = |φ − π/2|`, reused for both sides.
#[derive(Debug, Clone)]
pub struct AngularRule {
    pub half: Rule,
    pub sigma: f64,
}

impl AngularRule {
    pub fn new(n_phi: usize, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma < 1.0) {
            return Err(Error::Domain(format!("sigma = {sigma} must lie in (0, 1)")));
        }
        let half = endpoint_singular(n_phi / 2, sigma, std::f64::consts::FRAC_PI_2)?;
        Ok(AngularRule { half, sigma })
    }

    /// All nodes `(φ, weight)` on (0, π).
    pub fn nodes(&self) -> Vec<(f64, f64)> {
        let h = std::f64::consts::FRAC_PI_2;
        let mut v: Vec<(f64, f64)> = self
            .half
            .nodes
            .iter()
            .zip(&self.half.weights)
            .flat_map(|(&x, &w)| [(h - x, w), (h + x, w)])
            .collect();
        v.sort_by(|a, b| a.0.total_cmp(&b.0));
        v
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HalfPlaneResult {
    pub value: f64,
    pub diagnostics: Diagnostics,
}

/// Sign pattern along the ray at offset `x` from the tangent direction; `upper`
/// selects φ = π/2 + x (heading to the side opposite the normal).
pub(crate) fn halfplane_ray(
    scene: &SurfaceScene,
    frame: &TangentFrame,
    e: &Vec3,
    x: f64,
    upper: bool,
    sigma: f64,
    r_max: f64,
) -> Result<(RadialPiecewise, bool)> {
    let n = &frame.normal;
    let (sx, cx) = x.sin_cos();
    let ns = if upper { -sx } else { sx };
    let a = ns * n + cx * e;
    // d a / dφ stays in the half-plane
    let jitter = if upper { -cx * n - sx * e } else { -cx * n + sx * e };
    ray_signs_jittered(scene, &frame.origin, n, &a, &jitter, sigma, r_max)
}

fn check_unit_tangent(frame: &TangentFrame, e: &Vec3) -> Result<()> {
    if (e.norm() - 1.0).abs() > 1e-10 || e.dot(&frame.normal).abs() > 1e-10 {
        return Err(Error::InvalidInput("direction must be a unit tangent vector".into()));
    }
    Ok(())
}

/// k_{σ,e} with the rule built from `spec.n_phi`.
pub fn halfplane_pv_integral(
    scene: &SurfaceScene,
    frame: &TangentFrame,
    e: &Vec3,
    sigma: f64,
    spec: &QuadratureSpec,
) -> Result<HalfPlaneResult> {
    match spec.pv_mode {
        PvMode::Analytic => {
            let rule = AngularRule::new(spec.n_phi, sigma)?;
            halfplane_pv_with_rule(scene, frame, e, &rule, spec)
        }
        PvMode::EpsExtrapolation => halfplane_eps_extrapolated(scene, frame, e, sigma, spec),
    }
}

/// k_{σ,e} on a prebuilt angular rule.
pub fn halfplane_pv_with_rule(
    scene: &SurfaceScene,
    frame: &TangentFrame,
    e: &Vec3,
    rule: &AngularRule,
    spec: &QuadratureSpec,
) -> Result<HalfPlaneResult> {
    check_unit_tangent(frame, e)?;
    let sigma = rule.sigma;
    let n = scene.dim();
    let r_max = spec.r_max_for(scene.scale());
    let tail_r = Some(r_max);
    let mut value = 0.0;
    let mut div = 0.0;
    let mut diag = Diagnostics::default();
    for (&x, &w) in rule.half.nodes.iter().zip(&rule.half.weights) {
        // sin φ = cos x on both sides of π/2
        let sw = w * x.cos().powi(n as i32 - 2);
        for upper in [false, true] {
            let (rp, jit) = halfplane_ray(scene, frame, e, x, upper, sigma, r_max)?;
            let pv = radial_pv(&rp, sw, tail_r, spec.tail_handling);
            value += pv.finite_part;
            div += pv.divergence_coeff;
            diag.tail_bound += pv.tail.abs();
            diag.jittered += jit as usize;
        }
    }
    diag.nodes = 2 * rule.half.len();
    diag.cancel_residual = div.abs();
    if diag.cancel_residual > CANCELLATION_TOL {
        return Err(Error::CancellationFailure(diag.cancel_residual));
    }
    if spec.tail_handling == TailHandling::Truncate && diag.tail_bound > 1e-6 * value.abs() {
        diag.warnings.push(format!(
            "TruncationWarning: tail bound {:e} exceeds 1e-6 of |k| = {:e}",
            diag.tail_bound,
            value.abs()
        ));
    }
    Ok(HalfPlaneResult { value, diagnostics: diag })
}

/// Brute-force finite-ε evaluation on `π(z,e) ∖ B_ε(z)`, with adaptive angular integration.
pub fn halfplane_at_eps(
    scene: &SurfaceScene,
    frame: &TangentFrame,
    e: &Vec3,
    sigma: f64,
    eps: f64,
    r_max: f64,
) -> Result<f64> {
    check_unit_tangent(frame, e)?;
    let n = scene.dim();
    let mut err = None;
    let v = adaptive(
        |x| {
            let mut acc = 0.0;
            for upper in [false, true] {
                match halfplane_ray(scene, frame, e, x, upper, sigma, r_max) {
                    Ok((rp, _)) => acc += radial_eps(&rp, eps),
                    Err(e) => {
                        err.get_or_insert(e);
                    }
                }
            }
            acc * x.cos().powi(n as i32 - 2)
        },
        0.0,
        std::f64::consts::FRAC_PI_2,
        1e-12,
        1e-10,
        4000,
    )?;
    match err {
        Some(e) => Err(e),
        None => Ok(v),
    }
}

/// Richardson extrapolation of the finite-ε values in ε^{1-σ} (the size of the
/// excluded near-tangent wedge contribution).
pub fn halfplane_eps_extrapolated(
    scene: &SurfaceScene,
    frame: &TangentFrame,
    e: &Vec3,
    sigma: f64,
    spec: &QuadratureSpec,
) -> Result<HalfPlaneResult> {
    let r_max = spec.r_max_for(scene.scale());
    let eps0 = spec.eps_cutoff * scene.scale();
    let p = 1.0 - sigma;
    let q = 10f64.powf(p);
    let vals: Vec<f64> = [1.0, 0.1, 0.01]
        .iter()
        .map(|f| halfplane_at_eps(scene, frame, e, sigma, eps0 * f, r_max))
        .collect::<Result<_>>()?;
    let r1 = (q * vals[1] - vals[0]) / (q - 1.0);
    let r2 = (q * vals[2] - vals[1]) / (q - 1.0);
    let mut diag = Diagnostics { nodes: 3, cancel_residual: (r2 - r1).abs(), ..Default::default() };
    diag.warnings.push(format!("eps-extrapolation residual {:e}", (r2 - r1).abs()));
    Ok(HalfPlaneResult { value: r2, diagnostics: diag })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::beta;

    fn sphere_k(n: usize, rho: f64, sigma: f64) -> f64 {
        -beta((1.0 - sigma) / 2.0, (n as f64 - 1.0) / 2.0).unwrap() / (sigma * (2.0 * rho).powf(sigma))
    }

    fn k_on(scene: &SurfaceScene, z: Vec3, sigma: f64, spec: &QuadratureSpec) -> HalfPlaneResult {
        let f = scene.tangent_frame(&z).unwrap();
        halfplane_pv_integral(scene, &f, &f.tangents[0], sigma, spec).unwrap()
    }

    #[test]
    fn plane_gives_zero() {
        let p = SurfaceScene::plane(3, Vec3::zeros(), Vec3::z()).unwrap();
        let r = k_on(&p, Vec3::zeros(), 0.5, &QuadratureSpec::default());
        assert!(r.value.abs() < 1e-12);
        assert_eq!(r.diagnostics.cancel_residual, 0.0);
    }

    #[test]
    fn sphere_closed_form() {
        let spec = QuadratureSpec::default();
        let s = SurfaceScene::sphere(3, Vec3::zeros(), 0.5).unwrap();
        let r = k_on(&s, Vec3::new(0.0, 0.0, 0.5), 0.5, &spec);
        assert!((r.value + 8.0).abs() < 8e-6, "{}", r.value);
        let c = SurfaceScene::sphere(2, Vec3::zeros(), 1.0).unwrap();
        let r = k_on(&c, Vec3::new(1.0, 0.0, 0.0), 0.5, &spec);
        assert!((r.value - sphere_k(2, 1.0, 0.5)).abs() < 1e-5 * r.value.abs());
    }

    #[test]
    fn reflected_grid_is_identical() {
        let s = SurfaceScene::sphere(3, Vec3::zeros(), 1.0).unwrap();
        let z = Vec3::new(0.6, 0.0, 0.8);
        let f = s.tangent_frame(&z).unwrap();
        let e = f.tangents[1];
        let rule = AngularRule::new(128, 0.3).unwrap();
        let r_max = 1e4;
        // evaluate on φ ↦ π − φ: the node set maps onto itself with sides swapped
        let mut reflected = 0.0;
        for (&x, &w) in rule.half.nodes.iter().zip(&rule.half.weights).rev() {
            for upper in [true, false] {
                let (rp, _) = halfplane_ray(&s, &f, &e, x, upper, 0.3, r_max).unwrap();
                reflected += radial_pv(&rp, w * x.cos(), Some(r_max), TailHandling::Analytic).finite_part;
            }
        }
        let spec = QuadratureSpec { n_phi: 128, ..Default::default() };
        let direct = halfplane_pv_with_rule(&s, &f, &e, &rule, &spec).unwrap().value;
        assert!((direct - reflected).abs() <= 1e-12 * direct.abs());
    }

    #[test]
    fn angular_convergence() {
        let s = SurfaceScene::sphere(3, Vec3::zeros(), 1.0).unwrap();
        let z = Vec3::new(1.0, 0.0, 0.0);
        let a = k_on(&s, z, 0.75, &QuadratureSpec::default()).value;
        let b = k_on(&s, z, 0.75, &QuadratureSpec { n_phi: 1024, ..Default::default() }).value;
        assert!(((a - b) / b).abs() < 1e-4);
    }

    #[test]
    fn eps_mode_agrees_with_analytic() {
        let s = SurfaceScene::sphere(3, Vec3::zeros(), 1.0).unwrap();
        let z = Vec3::new(0.0, 1.0, 0.0);
        let spec = QuadratureSpec { pv_mode: PvMode::EpsExtrapolation, ..Default::default() };
        let brute = k_on(&s, z, 0.5, &spec).value;
        let want = sphere_k(3, 1.0, 0.5);
        assert!(((brute - want) / want).abs() < 1e-3, "{brute} vs {want}");
    }

    #[test]
    fn truncation_reports_tail() {
        let s = SurfaceScene::sphere(3, Vec3::zeros(), 1.0).unwrap();
        let spec = QuadratureSpec { tail_handling: TailHandling::Truncate, r_max: Some(20.0), ..Default::default() };
        let r = k_on(&s, Vec3::new(0.0, 0.0, 1.0), 0.5, &spec);
        assert!(r.diagnostics.warnings.iter().any(|w| w.starts_with("TruncationWarning")));
        let exact = k_on(&s, Vec3::new(0.0, 0.0, 1.0), 0.5, &QuadratureSpec::default()).value;
        // every ray ends outside (χ̂ = −1), so the dropped tail is −tail_bound
        assert!((r.value - exact - r.diagnostics.tail_bound).abs() < 1e-10 * exact.abs());
    }
}
