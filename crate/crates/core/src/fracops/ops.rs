//! Fractional gradient, divergence, Laplacian and Hessian of lattice fields.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fracops::field::{Decay, GridField};
use crate::fracops::lattice::{Kernel, LatticePlan};
use crate::quadrature::rules::gauss_legendre;
use crate::specfun::{mu_alpha, nu_alpha};

/// Boundary-to-max ratio above which a Gaussian/compact field is rejected.
pub const BOUNDARY_TOLERANCE: f64 = 1e-8;

/// Box enlargement for the intermediate field of nested operators, by dimension.
const NESTED_PAD: [usize; 3] = [16, 4, 2];

fn norm(k: &[f64]) -> f64 {
    k.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn check_order(a: f64, what: &str, hi: f64) -> Result<()> {
    if !(a > 0.0 && a < hi) {
        return Err(Error::Domain(format!("{what} = {a} must lie in (0, {hi})")));
    }
    Ok(())
}

/// Padding factor implied by the decay class.
fn padding(f: &GridField) -> Result<usize> {
    match f.decay {
        Decay::Periodic => Err(Error::UnsupportedDecay("periodic fields are handled by the spectral oracle only".into())),
        Decay::Algebraic { exponent } if exponent <= f.dim as f64 + 2.0 => Err(Error::UnsupportedDecay(format!(
            "algebraic decay |x|^-{exponent} needs an exponent above n + 2 = {}",
            f.dim + 2
        ))),
        Decay::Algebraic { .. } => Ok(2),
        Decay::Gaussian | Decay::Compact => {
            let r = f.boundary_ratio();
            if r > BOUNDARY_TOLERANCE {
                return Err(Error::UnsupportedDecay(format!("field reaches {r:e} of its maximum on the box boundary")));
            }
            Ok(1)
        }
    }
}

/// Component `c` minus its background on the box enlarged `pad` times (same spacing).
fn extend(f: &GridField, c: usize, pad: usize) -> Vec<f64> {
    let u = f.deviation(c);
    if pad == 1 {
        return u;
    }
    let (n, s) = (f.dim, f.nodes);
    let big = pad * s;
    let off = (big - s) / 2;
    let half = 0.5 * f.length;
    let h = f.spacing();
    let exponent = match f.decay {
        Decay::Algebraic { exponent } => Some(exponent),
        _ => None,
    };
    let mut out = vec![0.0; big.pow(n as u32)];
    for (i, o) in out.iter_mut().enumerate() {
        let mut rem = i;
        let mut m = vec![0usize; n];
        for d in (0..n).rev() {
            m[d] = rem % big;
            rem /= big;
        }
        let inside = m.iter().all(|&x| x >= off && x < off + s);
        if inside {
            let j = m.iter().fold(0, |acc, &x| acc * s + (x - off));
            *o = u[j];
        } else if let Some(p) = exponent {
            // radial power-law continuation from the nearest boundary node
            let y: Vec<f64> = m.iter().map(|&x| (x as f64 - off as f64) * h - half).collect();
            let r = norm(&y);
            let t = (half - h) / y.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            let j = y.iter().fold(0, |acc, v| {
                let q = ((v * t + half) / h).round().clamp(0.0, (s - 1) as f64) as usize;
                acc * s + q
            });
            *o = u[j] * t.powf(p) * if r > 0.0 { 1.0 } else { 0.0 };
        }
    }
    out
}

fn crop(big: &[f64], dim: usize, big_side: usize, side: usize) -> Vec<f64> {
    if big_side == side {
        return big.to_vec();
    }
    let off = (big_side - side) / 2;
    (0..side.pow(dim as u32))
        .map(|i| {
            let mut rem = i;
            let mut j = 0;
            let mut mult = 1;
            for _ in 0..dim {
                j += (rem % side + off) * mult;
                rem /= side;
                mult *= big_side;
            }
            big[j]
        })
        .collect()
}

fn laplacian_kernel(n: usize, s: f64) -> Result<Kernel> {
    let c = nu_alpha(s, n)?;
    let p = n as f64 + s;
    Ok(Kernel { f: Arc::new(move |k: &[f64]| c * norm(k).powf(-p)), degree: -p, even: true })
}

fn gradient_kernel(n: usize, a: f64, i: usize) -> Result<Kernel> {
    let c = mu_alpha(a, n)?;
    let p = n as f64 + a + 1.0;
    Ok(Kernel { f: Arc::new(move |k: &[f64]| c * k[i] * norm(k).powf(-p)), degree: 1.0 - p, even: false })
}

fn hessian_kernel(n: usize, s: f64, i: usize, j: usize) -> Result<Kernel> {
    let t = FracKernelTensor::new(n, s)?;
    Ok(Kernel { f: Arc::new(move |k: &[f64]| t.entry(k, i, j)), degree: -(n as f64) - s, even: true })
}

/// The lattice-, output- and kernel-independent part of every operator below:
/// `out[o] = Σ_{(k, c) ∈ terms[o]} ∫ K_k(v) (f_c(x+v) − f_c(x)) dv`.
fn run(f: &GridField, kernels: &[Kernel], terms: &[Vec<(usize, usize)>], decay: Decay) -> Result<GridField> {
    let pad = padding(f)?;
    let big = pad * f.nodes;
    let h = f.spacing();
    let plan = LatticePlan::new(f.dim, big, h, kernels)?;
    let ext: Vec<Vec<f64>> = (0..f.comps).map(|c| extend(f, c, pad)).collect();
    let comps = terms
        .iter()
        .map(|t| {
            let tt: Vec<(usize, &[f64])> = t.iter().map(|&(k, c)| (k, ext[c].as_slice())).collect();
            crop(&plan.apply_sum(&tt), f.dim, big, f.nodes)
        })
        .collect();
    Ok(f.with_components(comps, decay))
}

/// (−Δ)^{α/2} of every component, α ∈ (0, 2).
pub fn frac_laplacian(f: &GridField, alpha: f64) -> Result<GridField> {
    check_order(alpha, "alpha", 2.0)?;
    let k = laplacian_kernel(f.dim, alpha)?;
    let terms: Vec<Vec<(usize, usize)>> = (0..f.comps).map(|c| vec![(0, c)]).collect();
    run(f, &[k], &terms, Decay::Algebraic { exponent: f.dim as f64 + alpha })
}

/// ∇^α of a scalar (vector result) or of a vector field (matrix with entry (j, i) = ∂^α_i w_j).
pub fn frac_gradient(f: &GridField, alpha: f64) -> Result<GridField> {
    check_order(alpha, "alpha", 1.0)?;
    let n = f.dim;
    if f.comps != 1 && f.comps != n {
        return Err(Error::InvalidInput("gradient needs a scalar or vector field".into()));
    }
    let ks = (0..n).map(|i| gradient_kernel(n, alpha, i)).collect::<Result<Vec<_>>>()?;
    let terms: Vec<Vec<(usize, usize)>> = (0..f.comps).flat_map(|c| (0..n).map(move |i| vec![(i, c)])).collect();
    run(f, &ks, &terms, Decay::Algebraic { exponent: n as f64 + alpha })
}

/// div^α of a vector field.
pub fn frac_divergence(w: &GridField, alpha: f64) -> Result<GridField> {
    check_order(alpha, "alpha", 1.0)?;
    let n = w.dim;
    if w.comps != n {
        return Err(Error::InvalidInput("divergence needs a vector field".into()));
    }
    let ks = (0..n).map(|i| gradient_kernel(n, alpha, i)).collect::<Result<Vec<_>>>()?;
    let terms = vec![(0..n).map(|i| (i, i)).collect()];
    run(w, &ks, &terms, Decay::Algebraic { exponent: n as f64 + alpha })
}

/// Single-integral form of ∇^α∇^β f (row-major n×n components).
pub fn frac_hessian_direct(f: &GridField, alpha: f64, beta: f64) -> Result<GridField> {
    check_order(alpha, "alpha", 1.0)?;
    check_order(beta, "beta", 1.0)?;
    if f.comps != 1 {
        return Err(Error::InvalidInput("Hessian needs a scalar field".into()));
    }
    let n = f.dim;
    let s = alpha + beta;
    let mut ks = Vec::new();
    let mut index = vec![vec![0; n]; n];
    for i in 0..n {
        for j in i..n {
            index[i][j] = ks.len();
            index[j][i] = ks.len();
            ks.push(hessian_kernel(n, s, i, j)?);
        }
    }
    let terms: Vec<Vec<(usize, usize)>> = (0..n * n).map(|e| vec![(index[e / n][e % n], 0)]).collect();
    run(f, &ks, &terms, Decay::Algebraic { exponent: n as f64 + s })
}

/// `∫_{ℝⁿ∖[−1,1]ⁿ} |y|^{−2n−s} dy`, through the cube faces:
/// `2n/(n+s) ∫_{[−1,1]^{n−1}} (1+|u|²)^{−(2n+s)/2} du`.
fn outside_cube_moment(n: usize, s: f64) -> f64 {
    let nf = n as f64;
    let q = 0.5 * (2.0 * nf + s);
    let gl = gauss_legendre(40);
    let face = match n {
        1 => 1.0,
        2 => gl.integrate(|u| (1.0 + u * u).powf(-q)),
        _ => gl.integrate(|u| gl.integrate(|v| (1.0 + u * u + v * v).powf(-q))),
    };
    2.0 * nf / (nf + s) * face
}

/// Evaluates the inner gradient on an enlarged box, so the outer operator sees the
/// intermediate field's algebraic tail, then crops back. The part of that tail beyond
/// the enlarged box is added analytically from its monopole form −μ_β M x|x|^{−n−β−1}.
fn nested(f: &GridField, alpha: f64, beta: f64, divergence: bool) -> Result<GridField> {
    check_order(alpha, "alpha", 1.0)?;
    check_order(beta, "beta", 1.0)?;
    if f.comps != 1 {
        return Err(Error::InvalidInput("nested operators need a scalar field".into()));
    }
    if padding(f)? != 1 {
        return Err(Error::UnsupportedDecay("nested operators need a Gaussian-class or compact field".into()));
    }
    let n = f.dim;
    let pad = NESTED_PAD[n - 1];
    let big = pad * f.nodes;
    let h = f.spacing();
    let u = {
        let mut g = f.clone();
        g.decay = Decay::Compact;
        extend(&g, 0, 1)
    };
    let u_big = {
        let mut b = vec![0.0; big.pow(n as u32)];
        let off = (big - f.nodes) / 2;
        for (i, v) in u.iter().enumerate() {
            let mut rem = i;
            let mut j = 0;
            let mut mult = 1;
            for _ in 0..n {
                j += (rem % f.nodes + off) * mult;
                rem /= f.nodes;
                mult *= big;
            }
            b[j] = *v;
        }
        b
    };
    let inner = LatticePlan::new(n, big, h, &(0..n).map(|i| gradient_kernel(n, beta, i)).collect::<Result<Vec<_>>>()?)?;
    let g: Vec<Vec<f64>> = (0..n).map(|i| inner.apply_sum(&[(i, &u_big)])).collect();
    let outer = LatticePlan::new(n, big, h, &(0..n).map(|i| gradient_kernel(n, alpha, i)).collect::<Result<Vec<_>>>()?)?;
    // μ_α ∫_{outside} y·g(y)|y|^{−n−α−1} dy at x ≈ 0, for the trace
    let mass = u.iter().sum::<f64>() * h.powi(n as i32);
    let b = 0.5 * big as f64 * h;
    let s = alpha + beta;
    let tail = -mu_alpha(alpha, n)? * mu_alpha(beta, n)? * mass * b.powf(-(n as f64) - s) * outside_cube_moment(n, s);
    let comps: Vec<Vec<f64>> = if divergence {
        let t: Vec<(usize, &[f64])> = (0..n).map(|i| (i, g[i].as_slice())).collect();
        vec![crop(&outer.apply_sum(&t), n, big, f.nodes).into_iter().map(|v| v + tail).collect()]
    } else {
        // entry (j, i) = ∂^α_i (∇^β f)_j; by cubic symmetry the tail is diagonal
        (0..n * n)
            .map(|e| {
                let add = if e / n == e % n { tail / n as f64 } else { 0.0 };
                crop(&outer.apply_sum(&[(e % n, &g[e / n])]), n, big, f.nodes).into_iter().map(|v| v + add).collect()
            })
            .collect()
    };
    Ok(f.with_components(comps, Decay::Algebraic { exponent: n as f64 + alpha + beta }))
}

/// div^α(∇^β f).
pub fn frac_div_grad(f: &GridField, alpha: f64, beta: f64) -> Result<GridField> {
    nested(f, alpha, beta, true)
}

/// ∇^α(∇^β f) by composing two gradients.
pub fn frac_hessian_nested(f: &GridField, alpha: f64, beta: f64) -> Result<GridField> {
    nested(f, alpha, beta, false)
}

/// Trace of a matrix field (n² components, row-major).
pub fn trace_field(m: &GridField) -> Result<GridField> {
    let n = m.dim;
    if m.comps != n * n {
        return Err(Error::InvalidInput("trace needs a matrix field".into()));
    }
    let len = m.len();
    let t = (0..len).map(|i| (0..n).map(|d| m.data[(d * n + d) * len + i]).sum()).collect();
    Ok(m.with_components(vec![t], m.decay))
}

/// Closed-form kernel of the single-integral Hessian of order s = α+β:
/// `(−ν_s/s)|v|^{−n−s}((n+s) v⊗v/|v|² − 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FracKernelTensor {
    pub dim: usize,
    pub order: f64,
    coeff: f64,
}

impl FracKernelTensor {
    pub fn new(dim: usize, order: f64) -> Result<Self> {
        check_order(order, "alpha + beta", 2.0)?;
        Ok(FracKernelTensor { dim, order, coeff: -nu_alpha(order, dim)? / order })
    }

    pub fn entry(&self, v: &[f64], i: usize, j: usize) -> f64 {
        let r = norm(v);
        let n = self.dim as f64;
        let d = if i == j { 1.0 } else { 0.0 };
        self.coeff * r.powf(-n - self.order) * ((n + self.order) * v[i] * v[j] / (r * r) - d)
    }

    pub fn value(&self, v: &[f64]) -> Vec<Vec<f64>> {
        (0..self.dim).map(|i| (0..self.dim).map(|j| self.entry(v, i, j)).collect()).collect()
    }

    pub fn trace(&self, v: &[f64]) -> f64 {
        self.coeff * norm(v).powf(-(self.dim as f64) - self.order) * self.order
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fracops::field::gaussian_field;

    #[test]
    fn kernel_tensor_trace() {
        let t = FracKernelTensor::new(2, 0.6).unwrap();
        let v = [0.3, -1.1];
        let m = t.value(&v);
        assert!((m[0][0] + m[1][1] - t.trace(&v)).abs() < 1e-14 * t.trace(&v).abs());
        assert_eq!(m[0][1], m[1][0]);
    }

    #[test]
    fn constants_are_annihilated() {
        let mut c = GridField::from_fn(2, 16, 4.0, Decay::Compact, |_| 3.0).unwrap();
        c.background = vec![3.0];
        let l = frac_laplacian(&c, 0.5).unwrap();
        assert_eq!(l.max_abs(), 0.0);
        let g = frac_gradient(&c, 0.5).unwrap();
        assert_eq!(g.max_abs(), 0.0);
        let mut w = GridField::from_vector_fn(2, 16, 4.0, Decay::Compact, |_| vec![1.0, -2.0]).unwrap();
        w.background = vec![1.0, -2.0];
        assert_eq!(frac_divergence(&w, 0.4).unwrap().max_abs(), 0.0);
        let h = frac_hessian_direct(&c, 0.3, 0.3).unwrap();
        assert_eq!(h.max_abs(), 0.0);
    }

    #[test]
    fn rejects_bad_decay() {
        let c = GridField::from_fn(1, 16, 4.0, Decay::Gaussian, |_| 1.0).unwrap();
        assert!(matches!(frac_laplacian(&c, 0.5), Err(Error::UnsupportedDecay(_))));
        let a = GridField::from_fn(1, 16, 4.0, Decay::Algebraic { exponent: 2.5 }, |x| 1.0 / (1.0 + x[0].powi(4))).unwrap();
        assert!(matches!(frac_laplacian(&a, 0.5), Err(Error::UnsupportedDecay(_))));
        let p = GridField::from_fn(1, 16, 4.0, Decay::Periodic, |x| x[0].cos()).unwrap();
        assert!(frac_gradient(&p, 0.5).is_err());
    }

    #[test]
    fn gaussian_peak_sign_and_symmetry() {
        let f = gaussian_field(2, 64, 6.0).unwrap();
        let l = frac_laplacian(&f, 0.5).unwrap();
        let centre = 32 * 64 + 32;
        assert!(l.data[centre] > 0.0);
        let g = frac_gradient(&f, 0.5).unwrap();
        // odd about the centre along each axis
        let len = g.len();
        assert!((g.data[centre]).abs() < 1e-12 && (g.data[len + centre]).abs() < 1e-12);
        let w = f.with_components(vec![f.data.clone(), f.data.clone()], Decay::Gaussian);
        let tr = trace_field(&frac_gradient(&w, 0.4).unwrap()).unwrap();
        let dv = frac_divergence(&w, 0.4).unwrap();
        let scale = dv.max_abs();
        assert!(tr.data.iter().zip(&dv.data).all(|(a, b)| (a - b).abs() <= 1e-12 * scale));
    }
}
