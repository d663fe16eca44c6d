//! Fourier-multiplier fractional operators on the (zero-padded) periodic extension.

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fracops::fft::{fft_nd, signed_freq};
use crate::fracops::field::{Decay, GridField};
use crate::specfun::{mu_alpha, nu_alpha, unit_sphere_measure};

/// Largest boundary-to-max ratio accepted before periodization is refused.
pub const PERIODIZATION_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "op", content = "order")]
pub enum SpectralSymbol {
    /// |2πξ|^α
    Laplacian(f64),
    /// i ξ/|ξ| · |2πξ|^α, per axis
    Gradient(f64),
    /// Σ_j i ξ_j/|ξ| · |2πξ|^α
    Divergence(f64),
}

/// Applies `symbol` to `f` after zero-padding the box `pad` times per axis
/// (pad = 1 is the plain periodic extension). Periodic fields are transformed as is.
///
/// The outputs decay only algebraically, so the periodic computation also picks up
/// the images of their far fields. For non-periodic inputs the images of the
/// monopole far field (set by the input's mass) are subtracted analytically, to
/// second order in x/period; what remains is O(period^{−n−α−1}).
///
/// Gradient of a vector field gives the matrix with entry (j, i) = ∂_i w_j.
pub fn spectral_frac_op(f: &GridField, symbol: SpectralSymbol, pad: usize) -> Result<GridField> {
    let pad = if f.decay == Decay::Periodic { 1 } else { pad.max(1) };
    if f.decay != Decay::Periodic {
        let r = f.boundary_ratio();
        if r > PERIODIZATION_TOLERANCE {
            return Err(Error::PeriodizationError(r));
        }
    }
    let (n, s) = (f.dim, f.nodes);
    let big = pad * s;
    let total = big.pow(n as u32);
    let period = pad as f64 * f.length;
    let off = (big - s) / 2;
    let place = |i: usize| -> usize {
        let mut rem = i;
        let mut j = 0;
        let mut mult = 1;
        for _ in 0..n {
            j += (rem % s + off) * mult;
            rem /= s;
            mult *= big;
        }
        j
    };
    let spectra: Vec<Vec<Complex64>> = (0..f.comps)
        .map(|c| {
            let mut buf = vec![Complex64::new(0.0, 0.0); total];
            for (i, v) in f.deviation(c).into_iter().enumerate() {
                buf[place(i)] = Complex64::new(v, 0.0);
            }
            fft_nd(&mut buf, n, big, false);
            buf
        })
        .collect();
    // ξ per bin; Nyquist planes are dropped by every symbol (odd symbols would turn
    // them complex), which keeps div∘grad and the Laplacian on exactly the same band
    let freqs = |k: usize| -> (Vec<f64>, bool) {
        let mut rem = k;
        let mut xi = vec![0.0; n];
        let mut nyquist = false;
        for d in (0..n).rev() {
            let b = rem % big;
            rem /= big;
            nyquist |= b == big / 2;
            xi[d] = signed_freq(b, big) / period;
        }
        (xi, nyquist)
    };
    let radial = |xi: &[f64], a: f64| -> f64 {
        let r = xi.iter().map(|x| x * x).sum::<f64>().sqrt();
        if r == 0.0 {
            0.0
        } else {
            (2.0 * std::f64::consts::PI * r).powf(a)
        }
    };
    let riesz = |xi: &[f64], j: usize, a: f64, nyquist: bool| -> Complex64 {
        let r = xi.iter().map(|x| x * x).sum::<f64>().sqrt();
        if r == 0.0 || nyquist {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(0.0, xi[j] / r * radial(xi, a))
        }
    };
    let outputs: Vec<Vec<Complex64>> = match symbol {
        SpectralSymbol::Laplacian(a) => spectra
            .iter()
            .map(|sp| {
                sp.iter()
                    .enumerate()
                    .map(|(k, v)| {
                        let (xi, ny) = freqs(k);
                        if ny {
                            Complex64::new(0.0, 0.0)
                        } else {
                            v * radial(&xi, a)
                        }
                    })
                    .collect()
            })
            .collect(),
        SpectralSymbol::Gradient(a) => spectra
            .iter()
            .flat_map(|sp| {
                (0..n).map(move |i| {
                    sp.iter()
                        .enumerate()
                        .map(|(k, v)| {
                            let (xi, ny) = freqs(k);
                            v * riesz(&xi, i, a, ny)
                        })
                        .collect()
                })
            })
            .collect(),
        SpectralSymbol::Divergence(a) => {
            if f.comps != n {
                return Err(Error::InvalidInput("divergence needs a vector field".into()));
            }
            vec![(0..total)
                .map(|k| {
                    let (xi, ny) = freqs(k);
                    (0..n).map(|j| spectra[j][k] * riesz(&xi, j, a, ny)).sum()
                })
                .collect()]
        }
    };
    let mut comps: Vec<Vec<f64>> = outputs
        .into_iter()
        .map(|mut buf| {
            fft_nd(&mut buf, n, big, true);
            (0..f.len()).map(|i| buf[place(i)].re).collect()
        })
        .collect();
    if f.decay != Decay::Periodic {
        subtract_images(f, symbol, period, &mut comps)?;
    }
    let order = match symbol {
        SpectralSymbol::Laplacian(a) | SpectralSymbol::Gradient(a) | SpectralSymbol::Divergence(a) => a,
    };
    let decay = if f.decay == Decay::Periodic { Decay::Periodic } else { Decay::Algebraic { exponent: n as f64 + order } };
    Ok(f.with_components(comps, decay))
}

/// Smooth radial cutoff: 1 on [0, ½], 0 beyond 1.
fn bump(t: f64) -> f64 {
    let u = 2.0 * t - 1.0;
    if u <= 0.0 {
        return 1.0;
    }
    if u >= 1.0 {
        return 0.0;
    }
    let g = |x: f64| (-1.0 / x).exp();
    g(1.0 - u) / (g(1.0 - u) + g(u))
}

/// `Σ_{m ∈ ℤⁿ∖0} |m|^{−s}` for s > n: smoothly cut-off lattice sum plus the exact
/// integral of the remainder (the Poisson error of a smooth remainder is negligible).
pub fn lattice_zeta(n: usize, s: f64) -> f64 {
    let r: i64 = match n {
        1 => 4000,
        2 => 300,
        _ => 60,
    };
    let rf = r as f64;
    let mut m = vec![-r; n];
    let mut sum = 0.0;
    loop {
        let q: i64 = m.iter().map(|x| x * x).sum();
        if q > 0 && q < r * r {
            let d = (q as f64).sqrt();
            sum += d.powf(-s) * bump(d / rf);
        }
        let mut k = 0;
        while k < n {
            m[k] += 1;
            if m[k] <= r {
                break;
            }
            m[k] = -r;
            k += 1;
        }
        if k == n {
            break;
        }
    }
    // ∫_{|u|>R/2} |u|^{−s}(1 − χ(|u|/R)) du, Simpson on [½, 1] plus the exact tail beyond 1
    let p = n as f64 - 1.0 - s;
    let steps = 20_000;
    let h = 0.5 / steps as f64;
    let g = |t: f64| t.powf(p) * (1.0 - bump(t));
    let mut simpson = g(0.5) + g(1.0);
    for i in 1..steps {
        simpson += g(0.5 + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    let radial = simpson * h / 3.0 + 1.0 / (s - n as f64);
    sum + unit_sphere_measure(n) * rf.powf(n as f64 - s) * radial
}

/// Removes `Σ_{m≠0} T(x + mP)` for the monopole far field T of each output.
fn subtract_images(f: &GridField, symbol: SpectralSymbol, period: f64, comps: &mut [Vec<f64>]) -> Result<()> {
    let n = f.dim;
    let nf = n as f64;
    let cell = f.spacing().powi(n as i32);
    let mass: Vec<f64> = (0..f.comps).map(|c| f.deviation(c).iter().sum::<f64>() * cell).collect();
    let coords: Vec<Vec<f64>> = (0..f.len()).map(|i| f.coords(i)).collect();
    match symbol {
        SpectralSymbol::Laplacian(a) => {
            // T = ν M |x|^{−s}
            let s = nf + a;
            let c0 = nu_alpha(a, n)? * period.powf(-s) * lattice_zeta(n, s);
            let c2 = nu_alpha(a, n)? * period.powf(-s - 2.0) * 0.5 * s * (s + 2.0 - nf) / nf * lattice_zeta(n, s + 2.0);
            for (c, out) in comps.iter_mut().enumerate() {
                for (o, x) in out.iter_mut().zip(&coords) {
                    let r2: f64 = x.iter().map(|v| v * v).sum();
                    *o -= mass[c] * (c0 + c2 * r2);
                }
            }
        }
        SpectralSymbol::Gradient(a) | SpectralSymbol::Divergence(a) => {
            // T_i = −μ M x_i |x|^{−t}; only the part linear in x survives the image sum
            let t = nf + a + 1.0;
            let c1 = -mu_alpha(a, n)? * period.powf(-t) * lattice_zeta(n, t) * (1.0 - t / nf);
            if let SpectralSymbol::Gradient(_) = symbol {
                for (k, out) in comps.iter_mut().enumerate() {
                    let (c, i) = (k / n, k % n);
                    for (o, x) in out.iter_mut().zip(&coords) {
                        *o -= mass[c] * c1 * x[i];
                    }
                }
            } else {
                for (o, x) in comps[0].iter_mut().zip(&coords) {
                    *o -= c1 * (0..n).map(|j| mass[j] * x[j]).sum::<f64>();
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fracops::field::gaussian_field;
    use std::f64::consts::PI;

    #[test]
    fn pure_mode_eigenvalue() {
        let (l, k) = (3.0, [2.0, -1.0]);
        let f = GridField::from_fn(2, 16, l, Decay::Periodic, |x| (2.0 * PI * (k[0] * x[0] + k[1] * x[1]) / l).cos()).unwrap();
        let a = 0.7;
        let lam = (2.0 * PI * (k[0] * k[0] + k[1] * k[1]).sqrt() / l).powf(a);
        let g = spectral_frac_op(&f, SpectralSymbol::Laplacian(a), 1).unwrap();
        for (u, v) in g.data.iter().zip(&f.data) {
            assert!((u - lam * v).abs() < 1e-12);
        }
    }

    #[test]
    fn div_grad_is_minus_laplacian() {
        let f = gaussian_field(2, 32, 6.0).unwrap();
        let g = spectral_frac_op(&f, SpectralSymbol::Gradient(0.3), 2).unwrap();
        let dg = spectral_frac_op(&g, SpectralSymbol::Divergence(0.5), 1);
        // the gradient's algebraic tail is not periodizable
        assert!(matches!(dg, Err(Error::PeriodizationError(_))));
        let mut gp = g.clone();
        gp.decay = Decay::Periodic;
        let f1 = {
            let mut p = f.clone();
            p.decay = Decay::Periodic;
            p
        };
        let g1 = spectral_frac_op(&f1, SpectralSymbol::Gradient(0.3), 1).unwrap();
        let dg1 = spectral_frac_op(&g1, SpectralSymbol::Divergence(0.5), 1).unwrap();
        let l1 = spectral_frac_op(&f1, SpectralSymbol::Laplacian(0.8), 1).unwrap();
        let scale = l1.max_abs();
        for (a, b) in dg1.data.iter().zip(&l1.data) {
            assert!((a + b).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn lattice_zeta_values() {
        // 2ζ(3) and 2ζ(1.3)
        assert!((lattice_zeta(1, 3.0) - 2.0 * 1.202_056_903_159_594_3).abs() < 1e-10);
        assert!((lattice_zeta(1, 1.3) - 2.0 * 3.931_949_211_809_54).abs() < 1e-10);
        // Σ'|m|^{-4} over ℤ² = 4ζ(2)β(2) (Catalan's constant)
        let z = 4.0 * PI * PI / 6.0 * 0.915_965_594_177_219;
        assert!((lattice_zeta(2, 4.0) - z).abs() < 1e-10);
    }

    #[test]
    fn refuses_wide_fields() {
        let f = gaussian_field(1, 32, 2.0).unwrap();
        assert!(matches!(spectral_frac_op(&f, SpectralSymbol::Laplacian(0.5), 2), Err(Error::PeriodizationError(_))));
    }
}
