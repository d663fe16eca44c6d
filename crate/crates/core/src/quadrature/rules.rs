//! One-dimensional quadrature rules: Gauss–Jacobi (Golub–Welsch), Gauss–Legendre,
//! and adaptive Gauss–Kronrod.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::specfun::gamma;

/// Nodes and weights on some interval.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// Affine map of a rule on [-1, 1] onto [a, b].
    pub fn mapped(&self, a: f64, b: f64) -> Rule {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        Rule {
            nodes: self.nodes.iter().map(|t| mid + half * t).collect(),
            weights: self.weights.iter().map(|w| w * half).collect(),
        }
    }
}

/// Gauss–Jacobi rule for the weight `(1-t)^a (1+t)^b` on [-1, 1].
pub fn gauss_jacobi(n: usize, a: f64, b: f64) -> Result<Rule> {
    if n == 0 {
        return Err(Error::InvalidInput("rule needs at least one node".into()));
    }
    if !(a > -1.0 && b > -1.0) {
        return Err(Error::Domain(format!("jacobi exponents ({a}, {b}) must exceed -1")));
    }
    let ab = a + b;
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        let kf = k as f64;
        let s = 2.0 * kf + ab;
        jac[(k, k)] = if k == 0 {
            (b - a) / (ab + 2.0)
        } else {
            (b * b - a * a) / (s * (s + 2.0))
        };
        if k + 1 < n {
            let k1 = kf + 1.0;
            let s1 = 2.0 * k1 + ab;
            let num = 4.0 * k1 * (k1 + a) * (k1 + b) * (k1 + ab);
            let den = s1 * s1 * (s1 + 1.0) * (s1 - 1.0);
            let off = (num / den).sqrt();
            jac[(k, k + 1)] = off;
            jac[(k + 1, k)] = off;
        }
    }
    let mu0 = 2f64.powf(ab + 1.0) * gamma(a + 1.0)? * gamma(b + 1.0)? / gamma(ab + 2.0)?;
    let eig = SymmetricEigen::new(jac);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], mu0 * v0 * v0)
        })
        .collect();
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
    Ok(Rule {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
    })
}

/// Gauss–Legendre rule on [-1, 1], nodes from Newton iteration on P_n.
pub fn gauss_legendre(n: usize) -> Rule {
    assert!(n > 0);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { x } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = nf * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Rule { nodes, weights }
}

/// Rule for `∫_0^L g(x) dx` where `g` behaves like `x^{-s}` at the origin;
/// the Jacobi weight is folded into the returned weights so the rule applies to `g` directly.
pub fn endpoint_singular(n: usize, s: f64, len: f64) -> Result<Rule> {
    let base = gauss_jacobi(n, 0.0, -s)?;
    let half = 0.5 * len;
    let nodes: Vec<f64> = base.nodes.iter().map(|t| half * (1.0 + t)).collect();
    let weights = base
        .weights
        .iter()
        .zip(&nodes)
        .map(|(w, x)| w * half * (x / half).powf(s))
        .collect();
    Ok(Rule { nodes, weights })
}

const GK_X: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const GK_WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * GK_WK[7];
    let mut g = fc * GK_WG[3];
    for j in 0..7 {
        let dx = h * GK_X[j];
        let s = f(c - dx) + f(c + dx);
        k += GK_WK[j] * s;
        if j % 2 == 1 {
            g += GK_WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Globally adaptive Gauss–Kronrod (7/15) integration on a finite interval.
pub fn adaptive<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_intervals: usize,
) -> Result<f64> {
    let (v, e) = gk15(&mut f, a, b);
    let mut parts = vec![(a, b, v, e)];
    loop {
        let total: f64 = parts.iter().map(|p| p.2).sum();
        let err: f64 = parts.iter().map(|p| p.3).sum();
        if err <= abs_tol.max(rel_tol * total.abs()) {
            return Ok(total);
        }
        if parts.len() >= max_intervals {
            return Err(Error::QuadBudgetExceeded(format!(
                "{} intervals, error estimate {err:e}",
                parts.len()
            )));
        }
        let (idx, _) = parts
            .iter()
            .enumerate()
            .max_by(|p, q| p.1 .3.total_cmp(&q.1 .3))
            .expect("non-empty");
        let (lo, hi, _, _) = parts.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&mut f, lo, mid);
        let (v2, e2) = gk15(&mut f, mid, hi);
        parts.push((lo, mid, v1, e1));
        parts.push((mid, hi, v2, e2));
    }
}

/// Adaptive integration over [a, ∞) through `x = a + t/(1-t)`.
pub fn adaptive_semi_infinite<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_intervals: usize,
) -> Result<f64> {
    adaptive(
        |t| {
            if t >= 1.0 {
                return 0.0;
            }
            let s = 1.0 - t;
            let v = f(a + t / s);
            if v == 0.0 {
                0.0
            } else {
                v / (s * s)
            }
        },
        0.0,
        1.0,
        abs_tol,
        rel_tol,
        max_intervals,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_integrates_polynomials() {
        let r = gauss_legendre(10);
        let i = r.integrate(|x| x.powi(18) + x.powi(3));
        assert!((i - 2.0 / 19.0).abs() < 1e-14);
        assert!((r.weights.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        let odd = gauss_legendre(7);
        assert_eq!(odd.nodes[3], 0.0);
    }

    #[test]
    fn jacobi_matches_legendre() {
        let j = gauss_jacobi(12, 0.0, 0.0).unwrap();
        let l = gauss_legendre(12);
        for (a, b) in j.nodes.iter().zip(&l.nodes) {
            assert!((a - b).abs() < 1e-13);
        }
        for (a, b) in j.weights.iter().zip(&l.weights) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn endpoint_singular_rule() {
        // ∫_0^2 x^{-0.7} cos x dx against adaptive integration after x = u^{1/0.3}
        let r = endpoint_singular(40, 0.7, 2.0).unwrap();
        let got = r.integrate(|x| x.powf(-0.7) * x.cos());
        let p = 1.0 / 0.3;
        let want = adaptive(
            |u: f64| {
                let x = u.powf(p);
                p * x.cos()
            },
            0.0,
            2f64.powf(0.3),
            1e-15,
            1e-14,
            500,
        )
        .unwrap();
        assert!((got - want).abs() < 1e-12 * want.abs(), "{got} vs {want}");
        let r = endpoint_singular(16, 0.5, std::f64::consts::FRAC_PI_2).unwrap();
        let m = r.integrate(|x| x.powf(-0.5));
        assert!((m - 2.0 * std::f64::consts::FRAC_PI_2.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn adaptive_semi_infinite_gamma() {
        let v = adaptive_semi_infinite(|x| x.powf(1.5) * (-x).exp(), 0.0, 1e-14, 1e-13, 2000).unwrap();
        let want = gamma(2.5).unwrap();
        assert!((v - want).abs() < 1e-11);
    }

    #[test]
    fn adaptive_budget() {
        let r = adaptive(|x| (1.0 / x).sin(), 1e-9, 1.0, 1e-15, 1e-15, 4);
        assert!(matches!(r, Err(Error::QuadBudgetExceeded(_))));
    }
}
