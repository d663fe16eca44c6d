//! `nlcurv perimeter`: σ-Area(∂B_r, B_R) against σ-Per(B_r, B_R), and the
//! dilation law σ-Per(λE, λΩ) = λ^{n−σ} σ-Per(E, Ω).

use nlcurv::quadrature::montecarlo::{sigma_area, sigma_perimeter, BoundingBox, McEstimate};
use nlcurv::quadrature::QuadratureSpec;
use nlcurv::surface::{SurfaceScene, Vec3};
use serde::Serialize;

use crate::config::{Format, PerimeterSpec, RunConfig};
use crate::error::{CliError, CliResult};
use crate::output::{num, write_csv, write_json};

#[derive(Debug, Clone, Serialize)]
pub struct PerimeterRow {
    pub sigma: f64,
    pub area: McEstimate,
    pub perimeter: McEstimate,
    /// |area − perimeter| in combined standard errors.
    pub area_z: f64,
    pub dilated: McEstimate,
    /// |dilated − λ^{n−σ}·perimeter| in combined standard errors.
    pub scaling_z: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

/// From σ = 1/2 on, the near-field weights of the pair sampler have infinite
/// variance, so batch standard errors understate the spread.
pub const FINITE_VARIANCE_SIGMA: f64 = 0.5;

fn z_score(a: f64, sa: f64, b: f64, sb: f64) -> f64 {
    let se = (sa * sa + sb * sb).sqrt();
    if se == 0.0 {
        if a == b {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (a - b).abs() / se
    }
}

pub fn perimeter_row(p: &PerimeterSpec, sigma: f64, spec: &QuadratureSpec) -> nlcurv::Result<PerimeterRow> {
    let (r, big, lam) = (p.radius, p.omega_radius, p.lambda);
    let n = p.dim;
    let scene = SurfaceScene::sphere(n, Vec3::zeros(), r)?;
    let ball = |rad: f64| move |x: &Vec3| x.norm() < rad;
    let omega = ball(big);
    let area = sigma_area(&scene, &omega, sigma, &BoundingBox::cube(Vec3::zeros(), big), spec)?;
    let perimeter = sigma_perimeter(&ball(r), &omega, sigma, n, &BoundingBox::cube(Vec3::zeros(), r), spec)?;
    let dilated = sigma_perimeter(&ball(lam * r), &ball(lam * big), sigma, n, &BoundingBox::cube(Vec3::zeros(), lam * r), spec)?;
    let f = lam.powf(n as f64 - sigma);
    Ok(PerimeterRow {
        sigma,
        area,
        perimeter,
        area_z: z_score(area.estimate, area.std_error, perimeter.estimate, perimeter.std_error),
        dilated,
        scaling_z: z_score(dilated.estimate, dilated.std_error, f * perimeter.estimate, f * perimeter.std_error),
        warning: (sigma >= FINITE_VARIANCE_SIGMA)
            .then(|| format!("sigma >= {FINITE_VARIANCE_SIGMA}: standard errors are unreliable (infinite-variance near field)")),
    })
}

fn check(p: &PerimeterSpec) -> CliResult<()> {
    if !(2..=3).contains(&p.dim) {
        return Err(CliError::Config(format!("perimeter.dim: {} must be 2 or 3", p.dim)));
    }
    if !(p.radius > 0.0 && p.omega_radius > p.radius) {
        return Err(CliError::Config("perimeter: need 0 < radius < omega_radius".into()));
    }
    if !(p.lambda > 0.0) {
        return Err(CliError::Config("perimeter.lambda: must be positive".into()));
    }
    Ok(())
}

#[derive(Serialize)]
struct Report<'a> {
    config: &'a PerimeterSpec,
    samples: u64,
    rows: &'a [PerimeterRow],
}

pub fn cmd_perimeter(cfg: &RunConfig) -> CliResult<()> {
    cfg.validate()?;
    check(&cfg.perimeter)?;
    cfg.quadrature.validate(cfg.perimeter.radius).map_err(|e| CliError::Config(format!("quadrature: {e}")))?;
    let rows = cfg
        .sigmas
        .iter()
        .map(|&s| perimeter_row(&cfg.perimeter, s, &cfg.quadrature))
        .collect::<nlcurv::Result<Vec<_>>>()
        .map_err(|e| CliError::Numerical(e.to_string()))?;
    match cfg.output.format {
        Format::Json => write_json(&cfg.output, &Report { config: &cfg.perimeter, samples: cfg.quadrature.mc_samples, rows: &rows })?,
        Format::Csv => {
            let head: Vec<String> = [
                "n", "sigma", "area", "area_se", "perimeter", "perimeter_se", "area_z", "lambda", "dilated", "dilated_se", "scaling_z", "warning",
            ]
            .iter()
            .map(|s| s.to_string())
            .collect();
            let body: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    vec![
                        cfg.perimeter.dim.to_string(),
                        num(r.sigma),
                        num(r.area.estimate),
                        num(r.area.std_error),
                        num(r.perimeter.estimate),
                        num(r.perimeter.std_error),
                        num(r.area_z),
                        num(cfg.perimeter.lambda),
                        num(r.dilated.estimate),
                        num(r.dilated.std_error),
                        num(r.scaling_z),
                        r.warning.clone().unwrap_or_default(),
                    ]
                })
                .collect();
            write_csv(&cfg.output, &head, &body)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_run_agrees() {
        let spec = QuadratureSpec { mc_samples: 200_000, ..Default::default() };
        let row = perimeter_row(&PerimeterSpec { dim: 2, ..Default::default() }, 0.3, &spec).unwrap();
        assert!(row.warning.is_none());
        assert!(row.area_z < 4.0 && row.scaling_z < 4.0, "{row:?}");
        assert!(row.dilated.estimate > row.perimeter.estimate);
    }

    #[test]
    fn z_scores() {
        assert_eq!(z_score(1.0, 0.0, 1.0, 0.0), 0.0);
        assert!((z_score(1.0, 3.0, 0.0, 4.0) - 0.2).abs() < 1e-15);
    }
}
