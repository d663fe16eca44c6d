//! Gamma and beta functions, plus the normalizing constants built from them.
//!
//! Every module obtains unit-ball volumes, sphere measures and the Riesz
//! constants from here so there is a single definition of each.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quadrature::rules::adaptive;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Lanczos sum for arguments >= 0.5.
fn lanczos(x: f64) -> f64 {
    let x = x - 1.0;
    let mut acc = LANCZOS_COEF[0];
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    // split the power so that t^(x+1/2) does not overflow near x = 170
    let half = t.powf(0.5 * (x + 0.5));
    (2.0 * PI).sqrt() * half * (half * (-t).exp()) * acc
}

/// Euler gamma function.
///
/// Arguments below 1/2 are brought into the Lanczos range with
/// `Γ(x) = Γ(x+1)/x`, which also covers negative non-integers.
pub fn gamma(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("gamma({x})")));
    }
    if x <= 0.0 && x == x.floor() {
        return Err(Error::Pole(x));
    }
    if x > 171.6 {
        return Err(Error::Domain(format!("gamma({x}) overflows")));
    }
    let mut shift = 1.0;
    let mut y = x;
    while y < 0.5 {
        shift *= y;
        y += 1.0;
    }
    Ok(lanczos(y) / shift)
}

/// Beta function through the gamma quotient.
pub fn beta(x: f64, y: f64) -> Result<f64> {
    if !(x > 0.0 && y > 0.0) {
        return Err(Error::Domain(format!("beta({x}, {y}) needs positive arguments")));
    }
    if x + y > 170.0 {
        return Err(Error::Domain(format!("beta({x}, {y}) out of range")));
    }
    Ok(gamma(x)? * gamma(y)? / gamma(x + y)?)
}

/// Volume of the unit ball in ℝ^m.
pub fn unit_ball_volume(m: usize) -> f64 {
    let h = m as f64 / 2.0;
    PI.powf(h) / gamma(h + 1.0).expect("positive argument")
}

/// Measure of the unit sphere S^{m-1} ⊂ ℝ^m (m = 1 gives the two points ±1).
pub fn unit_sphere_measure(m: usize) -> f64 {
    assert!(m >= 1, "sphere in ℝ^0 is undefined");
    let h = m as f64 / 2.0;
    2.0 * PI.powf(h) / gamma(h).expect("positive argument")
}

/// `α_{n-1}`: volume of the unit ball of the tangent space of a hypersurface in ℝⁿ.
pub fn tangent_ball_volume(n: usize) -> f64 {
    unit_ball_volume(n - 1)
}

/// `ω_{n-2}`: measure of the unit sphere of the tangent space of a hypersurface in ℝⁿ.
pub fn tangent_sphere_measure(n: usize) -> f64 {
    unit_sphere_measure(n - 1)
}

/// Normalization of the fractional gradient and divergence of order `alpha` in ℝⁿ.
pub fn mu_alpha(alpha: f64, n: usize) -> Result<f64> {
    let nf = n as f64;
    Ok(2f64.powf(alpha) * gamma((nf + alpha + 1.0) / 2.0)?
        / (PI.powf(nf / 2.0) * gamma((1.0 - alpha) / 2.0)?))
}

/// Normalization of the fractional Laplacian of order `alpha` in ℝⁿ (negative for alpha in (0,2)).
pub fn nu_alpha(alpha: f64, n: usize) -> Result<f64> {
    let nf = n as f64;
    Ok(2f64.powf(alpha) * gamma((nf + alpha) / 2.0)?
        / (PI.powf(nf / 2.0) * gamma(-alpha / 2.0)?))
}

/// `B(x, y) = ∫₀¹ t^{x−1}(1−t)^{y−1} dt` by adaptive quadrature, independent of [`gamma`].
///
/// Each half of the interval is mapped so the endpoint power becomes smooth:
/// `t = u^{1/x}` near 0 and `1 − t = u^{1/y}` near 1.
pub fn beta_integral(x: f64, y: f64) -> Result<f64> {
    if !(x > 0.0 && y > 0.0) {
        return Err(Error::Domain(format!("beta_integral({x}, {y}) needs positive arguments")));
    }
    let piece = |p: f64, q: f64| {
        adaptive(|u| (1.0 - u.powf(1.0 / p)).powf(q - 1.0) / p, 0.0, 0.5f64.powf(p), 1e-300, 1e-14, 4000)
    };
    Ok(piece(x, y)? + piece(y, x)?)
}

/// `|Γ(x)Γ(x+½) − 2^{1−2x}√π Γ(2x)| / |Γ(2x)|`.
pub fn duplication_residual(x: f64) -> Result<f64> {
    let g2 = gamma(2.0 * x)?;
    Ok((gamma(x)? * gamma(x + 0.5)? - 2f64.powf(1.0 - 2.0 * x) * PI.sqrt() * g2).abs() / g2.abs())
}

/// `|Γ(½−x)Γ(½+x)cos(πx) − π| / π`.
pub fn reflection_residual(x: f64) -> Result<f64> {
    Ok((gamma(0.5 - x)? * gamma(0.5 + x)? * (PI * x).cos() - PI).abs() / PI)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn gamma_values() {
        assert!(rel(gamma(0.5).unwrap(), 1.772_453_850_905_516) < 1e-14);
        assert!(rel(gamma(5.0).unwrap(), 24.0) < 1e-14);
        assert!(rel(gamma(-0.5).unwrap(), -3.544_907_701_811_032) < 1e-14);
        assert!(rel(gamma(170.0).unwrap(), 4.269_068_009_004_705e304) < 1e-12);
    }

    #[test]
    fn gamma_poles() {
        assert_eq!(gamma(0.0), Err(Error::Pole(0.0)));
        assert_eq!(gamma(-3.0), Err(Error::Pole(-3.0)));
        assert!(gamma(f64::NAN).is_err());
    }

    #[test]
    fn beta_values() {
        assert!(rel(beta(0.5, 0.5).unwrap(), PI) < 1e-14);
        assert!(rel(beta(0.25, 1.0).unwrap(), 4.0) < 1e-14);
        assert!(rel(beta(1.5, 2.5).unwrap(), PI / 16.0) < 1e-14);
        assert!(beta(0.0, 1.0).is_err());
        assert!(beta(1.0, -2.0).is_err());
    }

    #[test]
    fn riesz_constants() {
        // frozen from a 30-digit evaluation
        assert!(rel(mu_alpha(0.5, 2).unwrap(), 0.114_111_419_793_701_56) < 1e-13);
        assert!(rel(nu_alpha(0.5, 2).unwrap(), -0.083_241_983_875_425_07) < 1e-13);
        assert!(rel(mu_alpha(1e-12, 1).unwrap(), 1.0 / PI) < 1e-10);
        assert!(nu_alpha(0.5, 2).unwrap() < 0.0);
        for n in 1..=3 {
            for a in [0.1, 0.5, 0.9] {
                assert!(mu_alpha(a, n).unwrap() > 0.0);
            }
        }
    }

    #[test]
    fn sphere_and_ball_measures() {
        assert!(rel(unit_sphere_measure(1), 2.0) < 1e-15);
        assert!(rel(unit_sphere_measure(2), 2.0 * PI) < 1e-15);
        assert!(rel(unit_sphere_measure(3), 4.0 * PI) < 1e-15);
        assert!(rel(unit_ball_volume(2), PI) < 1e-15);
        assert!(rel(unit_ball_volume(3), 4.0 * PI / 3.0) < 1e-15);
        for n in 2..=6 {
            let lhs = tangent_sphere_measure(n);
            let rhs = (n as f64 - 1.0) * tangent_ball_volume(n);
            assert!(rel(lhs, rhs) < 1e-13, "n = {n}");
        }
    }

    #[test]
    fn gamma_identities() {
        for i in 0..200 {
            let x = 0.05 + (20.0 - 0.05) * i as f64 / 199.0;
            let r = duplication_residual(x).unwrap();
            assert!(r <= 1e-12, "duplication at {x}: {r:e}");
        }
        for i in 0..181 {
            let x = -0.45 + 0.9 * i as f64 / 180.0;
            let r = reflection_residual(x).unwrap();
            assert!(r <= 1e-12, "reflection at {x}: {r:e}");
        }
    }

    #[test]
    fn beta_matches_integral() {
        for i in 0..10 {
            for j in 0..10 {
                let x = 0.1 + 4.9 * i as f64 / 9.0;
                let y = 0.1 + 4.9 * j as f64 / 9.0;
                let b = beta(x, y).unwrap();
                assert_eq!(b, beta(y, x).unwrap());
                assert!(rel(beta_integral(x, y).unwrap(), b) < 1e-10, "({x}, {y})");
            }
        }
    }
}
