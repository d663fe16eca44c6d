use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailHandling {
    /// Integrate each ray to infinity assuming the last sign persists.
    Analytic,
    /// Stop at `r_max` and report the neglected tail.
    Truncate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PvMode {
    /// ε-divergences summed symbolically and cancelled exactly.
    Analytic,
    /// Finite-ε evaluation extrapolated to ε → 0 (cross-check only).
    EpsExtrapolation,
}

/// Truncation, cutoff and resolution parameters for every integrator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureSpec {
    /// Smallest inner radius of the brute-force mode, relative to the scene scale.
    pub eps_cutoff: f64,
    /// Outer truncation radius; `None` means `1e4 · scene scale`.
    pub r_max: Option<f64>,
    /// Angular nodes on each half-plane (split evenly across the tangent direction).
    pub n_phi: usize,
    /// Directions on the unit circle of the tangent plane (n = 3).
    pub n_dir: usize,
    /// Polar nodes per hemisphere for spherical-coordinate integrals over ℝⁿ.
    pub n_polar: usize,
    /// Azimuthal nodes for spherical-coordinate integrals (n = 3).
    pub n_azimuth: usize,
    pub mc_samples: u64,
    pub mc_batches: usize,
    pub rng_seed: u64,
    pub tail_handling: TailHandling,
    pub pv_mode: PvMode,
    /// Maximum 4-fold refinement depth for near-singular mesh triangles.
    pub max_refine_depth: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            eps_cutoff: 1e-2,
            r_max: None,
            n_phi: 512,
            n_dir: 256,
            n_polar: 256,
            n_azimuth: 256,
            mc_samples: 1_000_000,
            mc_batches: 32,
            rng_seed: 0,
            tail_handling: TailHandling::Analytic,
            pv_mode: PvMode::Analytic,
            max_refine_depth: 12,
        }
    }
}

impl QuadratureSpec {
    pub fn r_max_for(&self, scale: f64) -> f64 {
        self.r_max.unwrap_or(1e4 * scale)
    }

    pub fn validate(&self, scale: f64) -> Result<()> {
        let counts = [
            ("n_phi", self.n_phi),
            ("n_dir", self.n_dir),
            ("n_polar", self.n_polar),
            ("n_azimuth", self.n_azimuth),
            ("mc_batches", self.mc_batches),
        ];
        for (name, c) in counts {
            if c < 8 {
                return Err(Error::InvalidInput(format!("{name} = {c} must be at least 8")));
            }
        }
        if self.n_phi % 2 != 0 || self.n_polar % 2 != 0 {
            return Err(Error::InvalidInput("n_phi and n_polar must be even".into()));
        }
        if self.mc_samples < 8 {
            return Err(Error::InvalidInput("mc_samples must be at least 8".into()));
        }
        if !(self.eps_cutoff > 0.0 && self.eps_cutoff < 1.0) {
            return Err(Error::InvalidInput(format!(
                "eps_cutoff = {} must lie in (0, 1) (relative to the scene scale)",
                self.eps_cutoff
            )));
        }
        let r = self.r_max_for(scale);
        if !(r > 10.0 * scale) {
            return Err(Error::InvalidInput(format!("r_max = {r} must exceed 10x the scene scale {scale}")));
        }
        if self.max_refine_depth == 0 || self.max_refine_depth > 30 {
            return Err(Error::InvalidInput("max_refine_depth must lie in 1..=30".into()));
        }
        Ok(())
    }
}

/// Quality information gathered while integrating.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Largest |tail| summed over rays (exact when tails are analytic).
    pub tail_bound: f64,
    /// Residual coefficient of ε^{-σ} after symbolic cancellation.
    pub cancel_residual: f64,
    pub nodes: usize,
    /// Rays re-evaluated with a jittered direction after a tangency.
    pub jittered: usize,
    pub warnings: Vec<String>,
}

impl Diagnostics {
    pub fn merge(&mut self, other: &Diagnostics) {
        self.tail_bound = self.tail_bound.max(other.tail_bound);
        self.cancel_residual = self.cancel_residual.max(other.cancel_residual);
        self.nodes += other.nodes;
        self.jittered += other.jittered;
        for w in &other.warnings {
            if !self.warnings.contains(w) {
                self.warnings.push(w.clone());
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        let s = QuadratureSpec::default();
        s.validate(1.0).unwrap();
        assert_eq!(s.r_max_for(0.5), 5e3);
    }

    #[test]
    fn bad_specs() {
        let s = QuadratureSpec { n_phi: 4, ..Default::default() };
        assert!(s.validate(1.0).is_err());
        let s = QuadratureSpec { r_max: Some(5.0), ..Default::default() };
        assert!(s.validate(1.0).is_err());
        let s = QuadratureSpec { eps_cutoff: 2.0, ..Default::default() };
        assert!(s.validate(1.0).is_err());
    }

    #[test]
    fn json_round_trip() {
        let s = QuadratureSpec { r_max: Some(100.0), tail_handling: TailHandling::Truncate, ..Default::default() };
        let j = serde_json::to_string(&s).unwrap();
        assert!(j.contains("\"truncate\""));
        let back: QuadratureSpec = serde_json::from_str(&j).unwrap();
        assert_eq!(back, s);
        let partial: QuadratureSpec = serde_json::from_str(r#"{"n_phi": 128}"#).unwrap();
        assert_eq!(partial.n_phi, 128);
        assert!(serde_json::from_str::<QuadratureSpec>(r#"{"nphi": 128}"#).is_err());
    }
}
