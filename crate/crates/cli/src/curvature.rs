//! `nlcurv curvature`: directional samples, both mean curvatures, tensors and
//! the Gaussian curvature at every (point, σ), plus optional σ → 1 limit rows.

use nlcurv::curvature::{curvature_report, sigma_to_one_limit, sigma_to_one_limit_tensor, CurvatureReport, Representation};
use nlcurv::surface::Vec3;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Format, RunConfig};
use crate::error::{CliError, CliResult};
use crate::output::{num, opt_num, write_csv, write_json};

#[derive(Debug, Clone, Serialize)]
pub struct Record {
    pub point: Vec3,
    pub sigma: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<CurvatureReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Limits of (1−σ)·quantity as σ → 1 at one point.
#[derive(Debug, Clone, Serialize)]
pub struct LimitRecord {
    pub point: Vec3,
    /// Directional curvature along the first grid direction.
    pub k: Option<f64>,
    pub h_volume: Option<f64>,
    pub h_avg: Option<f64>,
    pub tensors: Vec<(Representation, Vec<Vec<f64>>)>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub messages: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CurvatureRun {
    pub scene: String,
    pub dim: usize,
    pub representations: Vec<Representation>,
    pub records: Vec<Record>,
    pub limits: Vec<LimitRecord>,
    /// Failed (point, σ) evaluations and failed limits.
    pub failures: usize,
}

fn limit_at(point: Vec3, records: &[&Record], reps: &[Representation]) -> LimitRecord {
    let mut out = LimitRecord { point, k: None, h_volume: None, h_avg: None, tensors: Vec::new(), messages: Vec::new() };
    let reports: Vec<&CurvatureReport> = records.iter().filter_map(|r| r.report.as_ref()).collect();
    if reports.len() != records.len() {
        out.messages.push("limit skipped: some sigma values failed".into());
        return out;
    }
    let mut scalar = |name: &str, f: &dyn Fn(&CurvatureReport) -> Option<f64>| -> Option<f64> {
        let samples: Option<Vec<(f64, f64)>> = reports.iter().map(|r| f(r).map(|v| (r.sigma, v))).collect();
        match sigma_to_one_limit(&samples?) {
            Ok(l) => Some(l.estimate),
            Err(e) => {
                out.messages.push(format!("{name}: {e}"));
                None
            }
        }
    };
    let k = scalar("k", &|r| r.k_samples.first().copied());
    let hv = scalar("H_vol", &|r| Some(r.h_volume));
    let ha = scalar("H_avg", &|r| Some(r.h_avg));
    (out.k, out.h_volume, out.h_avg) = (k, hv, ha);
    for &rep in reps {
        let samples: Option<Vec<_>> = reports.iter().map(|r| r.tensor(rep).map(|t| (r.sigma, t.clone()))).collect();
        match samples.map(|s| sigma_to_one_limit_tensor(&s)) {
            Some(Ok((t, _))) => out.tensors.push((rep, t.matrix)),
            Some(Err(e)) => out.messages.push(format!("L_{}: {e}", rep.name())),
            None => out.messages.push(format!("L_{}: missing", rep.name())),
        }
    }
    out
}

pub fn run_curvature(cfg: &RunConfig) -> CliResult<CurvatureRun> {
    cfg.validate()?;
    let spec = cfg.scene_spec()?;
    let scene = spec.build()?;
    if cfg.representations.contains(&Representation::Surface) && !spec.is_mesh() {
        return Err(CliError::Config("representations: 'surface' needs a mesh scene".into()));
    }
    cfg.quadrature.validate(scene.scale()).map_err(|e| CliError::Config(format!("quadrature: {e}")))?;
    let points = cfg.resolve_points(&spec, &scene)?;
    let tasks: Vec<(Vec3, f64)> = points.iter().flat_map(|p| cfg.sigmas.iter().map(move |&s| (*p, s))).collect();
    let records: Vec<Record> = tasks
        .par_iter()
        .map(|&(point, sigma)| match curvature_report(&scene, &point, sigma, &cfg.quadrature, &cfg.representations) {
            Ok(r) => Record { point, sigma, report: Some(r), error: None },
            Err(e) => Record { point, sigma, report: None, error: Some(e.to_string()) },
        })
        .collect();
    let mut failures = records.iter().filter(|r| r.error.is_some()).count();
    let mut limits = Vec::new();
    if cfg.extrapolate {
        for (i, p) in points.iter().enumerate() {
            let mine: Vec<&Record> = records[i * cfg.sigmas.len()..(i + 1) * cfg.sigmas.len()].iter().collect();
            let l = limit_at(*p, &mine, &cfg.representations);
            if !l.messages.is_empty() {
                failures += 1;
            }
            limits.push(l);
        }
    }
    Ok(CurvatureRun {
        scene: cfg.scene.clone(),
        dim: scene.dim(),
        representations: cfg.representations.clone(),
        records,
        limits,
        failures,
    })
}

impl CurvatureRun {
    pub fn csv_header(&self) -> Vec<String> {
        let mut h: Vec<String> = ["scene", "n", "point_xyz", "sigma", "direction_index", "k_sigma_e", "H_vol", "H_avg"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let m = self.dim - 1;
        for rep in &self.representations {
            for a in 1..=m {
                for b in 1..=m {
                    h.push(format!("L_{}_{a}{b}", rep.name()));
                }
            }
        }
        h.extend(["K_sigma", "tail_bound", "cancel_residual", "kind", "message"].iter().map(|s| s.to_string()));
        h
    }

    pub fn csv_rows(&self) -> Vec<Vec<String>> {
        let m = self.dim - 1;
        let n_l = self.representations.len() * m * m;
        let xyz = |p: &Vec3| format!("{};{};{}", num(p.x), num(p.y), num(p.z));
        let row = |p: &Vec3, sigma: f64, j: String, k: String, hv: String, ha: String, l: Vec<String>, tail: [String; 3], kind: &str, msg: String| {
            let mut r = vec![self.scene.clone(), self.dim.to_string(), xyz(p), num(sigma), j, k, hv, ha];
            r.extend(l);
            r.extend(tail);
            r.push(kind.into());
            r.push(msg);
            r
        };
        let blank_l = || vec![String::new(); n_l];
        let blank3 = || [String::new(), String::new(), String::new()];
        let mut rows = Vec::new();
        for rec in &self.records {
            match &rec.report {
                Some(rep) => {
                    for (j, k) in rep.k_samples.iter().enumerate() {
                        rows.push(row(&rec.point, rec.sigma, j.to_string(), num(*k), String::new(), String::new(), blank_l(), blank3(), "direction", String::new()));
                    }
                    let l: Vec<String> = rep.tensors.iter().flat_map(|t| t.tensor.matrix.iter().flatten().map(|x| num(*x))).collect();
                    let d = &rep.diagnostics;
                    rows.push(row(
                        &rec.point,
                        rec.sigma,
                        String::new(),
                        String::new(),
                        num(rep.h_volume),
                        num(rep.h_avg),
                        l,
                        [num(rep.k_gauss), num(d.tail_bound), num(d.cancel_residual)],
                        "point",
                        d.warnings.join("; "),
                    ));
                }
                None => rows.push(row(&rec.point, rec.sigma, String::new(), String::new(), String::new(), String::new(), blank_l(), blank3(), "error", rec.error.clone().unwrap_or_default())),
            }
        }
        for lim in &self.limits {
            let mut l = Vec::with_capacity(n_l);
            for rep in &self.representations {
                match lim.tensors.iter().find(|(r, _)| r == rep) {
                    Some((_, mat)) => l.extend(mat.iter().flatten().map(|x| num(*x))),
                    None => l.extend(vec![String::new(); m * m]),
                }
            }
            rows.push(row(&lim.point, 1.0, String::new(), opt_num(lim.k), opt_num(lim.h_volume), opt_num(lim.h_avg), l, blank3(), "limit", lim.messages.join("; ")));
        }
        rows
    }
}

/// Runs and writes the report; per-point failures become exit code 1 after output.
pub fn cmd_curvature(cfg: &RunConfig) -> CliResult<()> {
    let run = run_curvature(cfg)?;
    match cfg.output.format {
        Format::Csv => write_csv(&cfg.output, &run.csv_header(), &run.csv_rows())?,
        Format::Json => write_json(&cfg.output, &run)?,
    }
    if run.failures > 0 {
        return Err(CliError::Numerical(format!("{} evaluation(s) failed; see the report", run.failures)));
    }
    Ok(())
}
