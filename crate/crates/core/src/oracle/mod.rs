//! Ground truths that share no code with the quadrature or curvature routes.

mod spectral;

pub use spectral::{spectral_frac_op, SpectralSymbol, PERIODIZATION_TOLERANCE};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::beta;

/// The round sphere (or circle, n = 2) of radius ρ at nonlocal order σ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphereOracle {
    pub n: usize,
    pub rho: f64,
    pub sigma: f64,
}

impl SphereOracle {
    pub fn new(n: usize, rho: f64, sigma: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain(format!("dimension {n} has no curved hypersurfaces")));
        }
        if !(rho > 0.0) || !rho.is_finite() {
            return Err(Error::Domain(format!("radius {rho} must be positive")));
        }
        if !(sigma > 0.0 && sigma < 1.0) {
            return Err(Error::Domain(format!("sigma = {sigma} must lie in (0, 1)")));
        }
        Ok(SphereOracle { n, rho, sigma })
    }

    /// Directional curvature, the same for every tangent direction.
    pub fn k(&self) -> f64 {
        let s = self.sigma;
        let b = beta(0.5 * (1.0 - s), 0.5 * (self.n as f64 - 1.0)).expect("arguments are positive");
        -b / (s * (2.0 * self.rho).powf(s))
    }

    pub fn h(&self) -> f64 {
        self.k()
    }

    /// Curvature tensor `k·1` on the (n−1)-dimensional tangent space.
    pub fn l(&self) -> Vec<Vec<f64>> {
        let k = self.k();
        (0..self.n - 1).map(|i| (0..self.n - 1).map(|j| if i == j { k } else { 0.0 }).collect()).collect()
    }

    /// Gaussian curvature analogue `det L = k^{n−1}`.
    pub fn gauss(&self) -> f64 {
        self.k().powi(self.n as i32 - 1)
    }
}

pub fn sphere_k(n: usize, rho: f64, sigma: f64) -> Result<f64> {
    Ok(SphereOracle::new(n, rho, sigma)?.k())
}

pub fn sphere_h(n: usize, rho: f64, sigma: f64) -> Result<f64> {
    sphere_k(n, rho, sigma)
}

pub fn sphere_l(n: usize, rho: f64, sigma: f64) -> Result<Vec<Vec<f64>>> {
    Ok(SphereOracle::new(n, rho, sigma)?.l())
}

/// Where the circle of radius r about z meets the sphere, in the (e, n(z)) chart
/// centred at z; the sphere's centre sits at (0, −ρ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphereGeometry {
    pub p: [f64; 2],
    pub phi: f64,
}

pub fn sphere_geometry(r: f64, rho: f64) -> Result<SphereGeometry> {
    if !(r > 0.0 && r < 2.0 * rho) {
        return Err(Error::Domain(format!("need 0 < r < 2ρ, got r = {r}, ρ = {rho}")));
    }
    let q = r / (2.0 * rho);
    let c = (1.0 - q * q).sqrt();
    Ok(SphereGeometry {
        p: [r * c, -r * r / (2.0 * rho)],
        phi: std::f64::consts::PI - (c / q).atan(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn sphere_values() {
        assert!((sphere_k(3, 0.5, 0.5).unwrap() + 8.0).abs() < 1e-12);
        let s = 1.0 - 1e-6;
        assert!(((1.0 - s) * sphere_k(3, 1.0, s).unwrap() + 1.0).abs() < 1e-4);
        let mut last = f64::INFINITY;
        for rho in [0.25, 0.5, 1.0, 2.0, 4.0] {
            let k = sphere_k(3, rho, 0.3).unwrap().abs();
            assert!(k < last);
            last = k;
        }
        // circle: second beta argument ½
        let c = SphereOracle::new(2, 1.5, 0.4).unwrap();
        let direct = -beta(0.3, 0.5).unwrap() / (0.4 * 3f64.powf(0.4));
        assert_eq!(c.k(), direct);
        assert_eq!(c.l(), vec![vec![direct]]);
        assert!(sphere_k(3, -1.0, 0.5).is_err() && sphere_k(3, 1.0, 1.0).is_err());
    }

    #[test]
    fn geometry() {
        for (r, rho) in [(0.1, 1.0), (1.0, 1.0), (1.9, 1.0), (0.3, 0.25)] {
            let g = sphere_geometry(r, rho).unwrap();
            assert!((g.p[0].hypot(g.p[1]) - r).abs() < 1e-14);
            assert!((g.p[0].hypot(g.p[1] + rho) - rho).abs() < 1e-12);
        }
        let g = sphere_geometry(2e-8, 1.0).unwrap();
        assert!((g.phi - FRAC_PI_2).abs() <= 1e-7);
        assert!(sphere_geometry(2.0, 1.0).is_err());
    }
}
