//! Numerical checks of the kernel identities behind the fractional Hessian, and the
//! bridge from the fractional Laplacian of an indicator to nonlocal mean curvature.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fracops::field::{Decay, GridField};
use crate::fracops::ops::{frac_laplacian, FracKernelTensor};
use crate::quadrature::rules::{adaptive_semi_infinite, endpoint_singular, gauss_legendre};
use crate::specfun::{gamma, mu_alpha, nu_alpha, tangent_sphere_measure};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelIdentityCheck {
    pub lhs: Vec<Vec<f64>>,
    pub rhs: Vec<Vec<f64>>,
    /// Frobenius ‖lhs − rhs‖/‖rhs‖.
    pub rel_err: f64,
}

fn frobenius_diff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let d: f64 = a.iter().zip(b).flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q).powi(2))).sum();
    d.sqrt()
}

fn frobenius(a: &[Vec<f64>]) -> f64 {
    a.iter().flatten().map(|x| x * x).sum::<f64>().sqrt()
}

fn lemma_integrand(u: [f64; 2], v: [f64; 2], alpha: f64, beta: f64) -> [[f64; 2]; 2] {
    let w = [v[0] - u[0], v[1] - u[1]];
    let c = 1.0 / (w[0].hypot(w[1]).powf(3.0 + beta) * u[0].hypot(u[1]).powf(3.0 + alpha));
    [[c * w[0] * u[0], c * w[0] * u[1]], [c * w[1] * u[0], c * w[1] * u[1]]]
}

fn add(acc: &mut [[f64; 2]; 2], m: [[f64; 2]; 2], s: f64) {
    for i in 0..2 {
        for j in 0..2 {
            acc[i][j] += s * m[i][j];
        }
    }
}

/// `∫ (v−u)⊗u / (|u−v|^{n+β+1} |u|^{n+α+1}) du` in the plane, as a principal value at
/// u = 0 and u = v.
///
/// With R = |v|/3 the plane splits into: discs of radius R about 0 and v, where the
/// integrand is paired with its reflection through the centre (cancelling the odd
/// leading singularity) and the remaining r^{−p} is absorbed by a Gauss–Jacobi rule;
/// the full annulus R < |u| < |v|−R; the annulus |v|−R < |u| < |v|+R minus the disc
/// about v (angular Gauss–Legendre between the r-dependent arc ends); and the exterior
/// |u| > |v|+R, mapped to (0, 1] by r = (|v|+R)/x. Angular integrals over full circles
/// use the trapezoid rule. `nodes` sets the radial rule sizes (angular: 4×).
pub fn kernel_lemma_lhs(v: [f64; 2], alpha: f64, beta: f64, nodes: usize) -> Result<Vec<Vec<f64>>> {
    let vn = v[0].hypot(v[1]);
    if vn == 0.0 {
        return Err(Error::Domain("offset v must be nonzero".into()));
    }
    for (x, name) in [(alpha, "alpha"), (beta, "beta")] {
        if !(x > 0.0 && x < 1.0) {
            return Err(Error::Domain(format!("{name} = {x} must lie in (0, 1)")));
        }
    }
    if nodes < 8 {
        return Err(Error::QuadBudgetExceeded(format!("{nodes} radial nodes is too coarse")));
    }
    let f = |u: [f64; 2]| lemma_integrand(u, v, alpha, beta);
    let s = alpha + beta;
    let r = vn / 3.0;
    let na = 4 * nodes;
    let theta_v = v[1].atan2(v[0]);
    let at = |c: [f64; 2], rad: f64, th: f64| [c[0] + rad * th.cos(), c[1] + rad * th.sin()];
    let mut acc = [[0.0; 2]; 2];
    // discs, paired through their centres: θ over [0, π)
    for (c, p) in [([0.0, 0.0], alpha), (v, beta)] {
        let radial = endpoint_singular(nodes, p, r)?;
        for (&rad, &wr) in radial.nodes.iter().zip(&radial.weights) {
            for k in 0..na {
                let th = PI * (k as f64 + 0.5) / na as f64;
                let w = wr * rad * PI / na as f64;
                add(&mut acc, f(at(c, rad, th)), w);
                add(&mut acc, f(at(c, rad, th + PI)), w);
            }
        }
    }
    let gl = gauss_legendre(2 * nodes);
    let origin = [0.0, 0.0];
    // full annulus
    for (&x, &wx) in gl.nodes.iter().zip(&gl.weights) {
        let rad = r + (vn - 2.0 * r) * 0.5 * (1.0 + x);
        let wr = wx * 0.5 * (vn - 2.0 * r) * rad;
        for k in 0..na {
            let th = 2.0 * PI * k as f64 / na as f64;
            add(&mut acc, f(at(origin, rad, th)), wr * 2.0 * PI / na as f64);
        }
    }
    // annulus cut by the disc about v; r = a + (b−a)(1 − cos πx)/2 smooths the arc ends
    let (lo, hi) = (vn - r, vn + r);
    for (&x, &wx) in gl.nodes.iter().zip(&gl.weights) {
        let xx = 0.5 * (1.0 + x);
        let rad = lo + (hi - lo) * 0.5 * (1.0 - (PI * xx).cos());
        let dr = (hi - lo) * 0.5 * PI * (PI * xx).sin() * 0.5 * wx;
        let cphi = ((rad * rad + vn * vn - r * r) / (2.0 * rad * vn)).clamp(-1.0, 1.0);
        let phi = cphi.acos();
        let span = 2.0 * PI - 2.0 * phi;
        for (&y, &wy) in gl.nodes.iter().zip(&gl.weights) {
            let th = theta_v + phi + span * 0.5 * (1.0 + y);
            add(&mut acc, f(at(origin, rad, th)), dr * rad * wy * 0.5 * span);
        }
    }
    // exterior, r = (|v|+R)/x with the x^{1+s} decay absorbed by the rule
    let ext = endpoint_singular(2 * nodes, -(1.0 + s), 1.0)?;
    for (&x, &wx) in ext.nodes.iter().zip(&ext.weights) {
        let rad = hi / x;
        let wr = wx * hi / (x * x) * rad;
        for k in 0..na {
            let th = 2.0 * PI * k as f64 / na as f64;
            add(&mut acc, f(at(origin, rad, th)), wr * 2.0 * PI / na as f64);
        }
    }
    if acc.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::QuadBudgetExceeded("non-finite kernel lemma quadrature".into()));
    }
    Ok(acc.iter().map(|row| row.to_vec()).collect())
}

/// Numeric left side against `FracKernelTensor(v)/(μ_α μ_β)`.
pub fn hessian_kernel_identity_check(v: [f64; 2], alpha: f64, beta: f64, nodes: usize) -> Result<KernelIdentityCheck> {
    let lhs = kernel_lemma_lhs(v, alpha, beta, nodes)?;
    let k = FracKernelTensor::new(2, alpha + beta)?;
    let c = 1.0 / (mu_alpha(alpha, 2)? * mu_alpha(beta, 2)?);
    let rhs: Vec<Vec<f64>> = k.value(&v).into_iter().map(|r| r.into_iter().map(|x| c * x).collect()).collect();
    let rel_err = frobenius_diff(&lhs, &rhs) / frobenius(&rhs);
    Ok(KernelIdentityCheck { lhs, rhs, rel_err })
}

/// Relative Frobenius mismatch between two matrices.
pub fn matrix_rel_diff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    frobenius_diff(a, b) / frobenius(b)
}

/// Gauss–Weierstrass kernel `g_t(u) = (4πt)^{−n/2} e^{−|u|²/4t}`.
pub fn gw_kernel(t: f64, u: &[f64]) -> f64 {
    let r2: f64 = u.iter().map(|x| x * x).sum();
    (4.0 * PI * t).powf(-0.5 * u.len() as f64) * (-r2 / (4.0 * t)).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GwComparison {
    pub numeric: f64,
    pub closed_form: f64,
}

impl GwComparison {
    pub fn rel_err(&self) -> f64 {
        ((self.numeric - self.closed_form) / self.closed_form).abs()
    }
}

/// `((t v/(s+t))^γ + [γ = 2e_i] 2st/(s+t)) g_{s+t}(v)`; the bracketed diagonal term can be
/// dropped to build a negative control.
pub fn gw_closed_form(gamma: &[usize], s: f64, t: f64, v: &[f64], diagonal_term: bool) -> f64 {
    let m: f64 = v.iter().zip(gamma).map(|(x, &g)| (t * x / (s + t)).powi(g as i32)).product();
    let diag = gamma.iter().sum::<usize>() == 2 && gamma.iter().any(|&g| g == 2);
    let extra = if diag && diagonal_term { 2.0 * s * t / (s + t) } else { 0.0 };
    (m + extra) * gw_kernel(s + t, v)
}

/// `∫ u^γ g_s(v−u) g_t(u) du` by the lattice (trapezoid) rule, which is spectrally
/// accurate for Gaussians, against the closed form.
pub fn gw_convolution_check(gamma: &[usize], s: f64, t: f64, v: &[f64]) -> Result<GwComparison> {
    let n = v.len();
    if gamma.len() != n || !(1..=3).contains(&n) {
        return Err(Error::InvalidInput("multi-index and offset must share a dimension in 1..=3".into()));
    }
    if gamma.iter().sum::<usize>() > 2 {
        return Err(Error::Domain("only |γ| ≤ 2 has a closed form here".into()));
    }
    if !(s > 0.0 && t > 0.0) {
        return Err(Error::Domain("heat times must be positive".into()));
    }
    // the product is a Gaussian about t v/(s+t) with variance 2st/(s+t)
    let sd = (2.0 * s * t / (s + t)).sqrt();
    let centre: Vec<f64> = v.iter().map(|x| t * x / (s + t)).collect();
    let h = sd / 4.0;
    let m = (14.0 * sd / h).ceil() as i64;
    let mut sum = 0.0;
    let mut idx = vec![-m; n];
    let mut u = vec![0.0; n];
    let mut w = vec![0.0; n];
    loop {
        for d in 0..n {
            u[d] = centre[d] + idx[d] as f64 * h;
            w[d] = v[d] - u[d];
        }
        let mono: f64 = u.iter().zip(gamma).map(|(x, &g)| x.powi(g as i32)).product();
        sum += mono * gw_kernel(s, &w) * gw_kernel(t, &u);
        let mut d = 0;
        while d < n {
            idx[d] += 1;
            if idx[d] <= m {
                break;
            }
            idx[d] = -m;
            d += 1;
        }
        if d == n {
            break;
        }
    }
    Ok(GwComparison { numeric: sum * h.powi(n as i32), closed_form: gw_closed_form(gamma, s, t, v, true) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Subordination {
    pub numeric: f64,
    pub closed_form: f64,
    /// `π^{n/2}/(2^{α+1}Γ((n+α+1)/2))`
    pub prefactor: f64,
    /// `1/(2μ_α Γ((1−α)/2))`
    pub prefactor_via_mu: f64,
}

/// `|u|^{−n−α−1}` against `prefactor · ∫₀^∞ g_t(u) t^{−(α+3)/2} dt`, integrated in
/// τ = |u|²/(4t).
pub fn gw_subordination_check(n: usize, alpha: f64, u_norm: f64) -> Result<Subordination> {
    if !(alpha > 0.0 && alpha < 1.0) || !(u_norm > 0.0) {
        return Err(Error::Domain(format!("need α ∈ (0,1) and |u| > 0, got {alpha}, {u_norm}")));
    }
    let nf = n as f64;
    let r2 = u_norm * u_norm;
    let integral = adaptive_semi_infinite(
        |tau| {
            if tau <= 0.0 {
                return 0.0;
            }
            let t = r2 / (4.0 * tau);
            (4.0 * PI * t).powf(-0.5 * nf) * (-tau).exp() * t.powf(-0.5 * (alpha + 3.0)) * r2 / (4.0 * tau * tau)
        },
        0.0,
        0.0,
        1e-14,
        4000,
    )?;
    let prefactor = PI.powf(0.5 * nf) / (2f64.powf(alpha + 1.0) * gamma(0.5 * (nf + alpha + 1.0))?);
    let prefactor_via_mu = 1.0 / (2.0 * mu_alpha(alpha, n)? * gamma(0.5 * (1.0 - alpha))?);
    Ok(Subordination {
        numeric: prefactor * integral,
        closed_form: u_norm.powf(-nf - alpha - 1.0),
        prefactor,
        prefactor_via_mu,
    })
}

/// Least-squares slope of log f against log x.
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let m = points.len() as f64;
    let (sx, sy) = points.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x.ln(), b + y.ln()));
    let (mx, my) = (sx / m, sy / m);
    let (num, den) = points.iter().fold((0.0, 0.0), |(a, b), (x, y)| {
        let dx = x.ln() - mx;
        (a + dx * (y.ln() - my), b + dx * dx)
    });
    num / den
}

/// χ̂ = +1 inside the ball of the given radius and −1 outside, with a linear ramp one
/// cell wide across the sphere; the background (−1) makes it a compact deviation.
pub fn ball_indicator_field(dim: usize, nodes: usize, length: f64, radius: f64) -> Result<GridField> {
    let h = length / nodes as f64;
    let mut f = GridField::from_fn(dim, nodes, length, Decay::Compact, |x| {
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        (-(r - radius) / h).clamp(-1.0, 1.0)
    })?;
    f.background = vec![-1.0];
    Ok(f)
}

/// `(−Δ)^{σ/2}χ̂ / (ν_σ ω_{n−2})` at every node.
pub fn bridge_mean_curvature(chi: &GridField, sigma: f64) -> Result<GridField> {
    let l = frac_laplacian(chi, sigma)?;
    let c = 1.0 / (nu_alpha(sigma, chi.dim)? * tangent_sphere_measure(chi.dim));
    let data = l.data.iter().map(|x| c * x).collect();
    Ok(GridField { data, ..l })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn convolution_semigroup_and_moments() {
        let c = gw_convolution_check(&[0, 0], 0.7, 0.4, &[0.0, 0.0]).unwrap();
        assert!((c.numeric - (4.0 * PI * 1.1f64).powi(-1)).abs() < 1e-6 * c.closed_form);
        let c1 = gw_convolution_check(&[1, 0], 1.0, 1.0, &[2.0, 0.0]).unwrap();
        assert!((c1.closed_form - gw_kernel(2.0, &[2.0, 0.0])).abs() < 1e-15);
        assert!(c1.rel_err() < 1e-6);
        let c2 = gw_convolution_check(&[2, 0], 1.0, 1.0, &[2.0, 0.0]).unwrap();
        assert!(c2.rel_err() < 1e-6);
        let bare = gw_closed_form(&[2, 0], 1.0, 1.0, &[2.0, 0.0], false);
        assert!(((c2.numeric - bare) / bare).abs() > 1e-5);
    }

    #[test]
    fn subordination_identity() {
        let s = gw_subordination_check(2, 0.5, 1.0).unwrap();
        assert!((s.numeric - 1.0).abs() < 1e-8);
        assert!((s.prefactor - s.prefactor_via_mu).abs() < 1e-13 * s.prefactor);
    }

    #[test]
    fn kernel_lemma_and_equivariance() {
        let c = hessian_kernel_identity_check([1.0, 0.0], 0.3, 0.3, 32).unwrap();
        assert!(c.rel_err < 1e-3, "{}", c.rel_err);
        let (sn, cs) = 0.7f64.sin_cos();
        let rot = kernel_lemma_lhs([cs, sn], 0.3, 0.3, 32).unwrap();
        let r = [[cs, -sn], [sn, cs]];
        let conj: Vec<Vec<f64>> = (0..2)
            .map(|i| (0..2).map(|j| (0..2).flat_map(|k| (0..2).map(move |l| (k, l))).map(|(k, l)| r[i][k] * c.lhs[k][l] * r[j][l]).sum()).collect())
            .collect();
        assert!(matrix_rel_diff(&rot, &conj) < 1e-6);
        let big = kernel_lemma_lhs([2.5, 0.0], 0.3, 0.3, 32).unwrap();
        let scaled: Vec<Vec<f64>> = c.lhs.iter().map(|row| row.iter().map(|x| x * 2.5f64.powf(-2.6)).collect()).collect();
        assert!(matrix_rel_diff(&big, &scaled) < 1e-6);
    }

    #[test]
    fn subordination_exponent() {
        let pts: Vec<(f64, f64)> = [0.5, 1.0, 2.0, 4.0].iter().map(|&r| (r, gw_subordination_check(2, 0.5, r).unwrap().numeric)).collect();
        assert!((log_log_slope(&pts) + 3.5).abs() < 1e-3);
    }

    #[test]
    fn bridge_on_unit_circle() {
        let chi = ball_indicator_field(2, 256, 4.0, 1.0).unwrap();
        let h = bridge_mean_curvature(&chi, 0.5).unwrap();
        // node (1, 0)
        let z = 192 * 256 + 128;
        assert_eq!(h.coords(z), vec![1.0, 0.0]);
        let exact = -crate::specfun::beta(0.25, 0.5).unwrap() / (0.5 * 2f64.sqrt());
        assert!(((h.data[z] - exact) / exact).abs() < 0.05);
    }

    #[test]
    fn ramp_indicator() {
        let f = ball_indicator_field(2, 16, 4.0, 1.0).unwrap();
        assert_eq!(f.data[8 * 16 + 8], 1.0);
        assert_eq!(f.data[0], -1.0);
        assert_eq!(f.data[8 * 16 + 12], 0.0);
        assert_eq!(f.deviation(0)[0], 0.0);
    }
}
