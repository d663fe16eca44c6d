//! `nlcurv fracops`: applies fractional operators to a built-in or loaded field,
//! writes the results and compares each against an independent route.

use std::path::PathBuf;

use nlcurv::fracops::{
    frac_div_grad, frac_divergence, frac_gradient, frac_hessian_direct, frac_hessian_nested, frac_laplacian,
    gaussian_field, trace_field, Decay, GridField,
};
use nlcurv::oracle::{spectral_frac_op, SpectralSymbol};
use serde::Serialize;

use crate::config::{Format, FracOpSpec, FracopsSpec, RunConfig};
use crate::error::{CliError, CliResult};
use crate::output::{opt_num, write_csv, write_json};

#[derive(Debug, Clone, Serialize)]
pub struct OpResult {
    pub op: FracOpSpec,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    /// What the result was compared against.
    pub reference: String,
    /// L² relative difference to the reference.
    pub rel_l2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// The built-in input: exp(−π|x|²), or one shifted Gaussian per component.
pub fn builtin_field(spec: &FracopsSpec) -> nlcurv::Result<GridField> {
    if !spec.vector {
        return gaussian_field(spec.dim, spec.nodes, spec.length);
    }
    let n = spec.dim;
    GridField::from_vector_fn(n, spec.nodes, spec.length, Decay::Gaussian, |x| {
        (0..n)
            .map(|c| {
                let r2: f64 = x.iter().enumerate().map(|(i, v)| (v - if i == c { 0.3 } else { 0.0 }).powi(2)).sum();
                (-std::f64::consts::PI * r2).exp()
            })
            .collect()
    })
}

fn negated(f: GridField) -> GridField {
    let z = GridField::zeros(f.dim, f.nodes, f.length, f.comps, f.decay).expect("same shape");
    z.axpby(1.0, &f, -1.0).expect("same shape")
}

/// Result field, reference field and the reference's name.
fn apply(f: &GridField, op: FracOpSpec, pad: usize) -> nlcurv::Result<(GridField, nlcurv::Result<GridField>, String)> {
    let spectral = |s| spectral_frac_op(f, s, pad);
    Ok(match op {
        FracOpSpec::Laplacian { alpha } => {
            (frac_laplacian(f, alpha)?, spectral(SpectralSymbol::Laplacian(alpha)), "spectral laplacian".into())
        }
        FracOpSpec::Gradient { alpha } => {
            let r = frac_gradient(f, alpha)?;
            if f.comps == 1 {
                (r, spectral(SpectralSymbol::Gradient(alpha)), "spectral gradient".into())
            } else {
                (r, frac_divergence(f, alpha), "divergence (through the trace)".into())
            }
        }
        FracOpSpec::Divergence { alpha } => {
            (frac_divergence(f, alpha)?, spectral(SpectralSymbol::Divergence(alpha)), "spectral divergence".into())
        }
        FracOpSpec::DivGrad { alpha, beta } => {
            let r = frac_div_grad(f, alpha, beta)?;
            (r, frac_laplacian(f, alpha + beta).map(negated), "minus laplacian of order alpha+beta".into())
        }
        FracOpSpec::HessianDirect { alpha, beta } => {
            (frac_hessian_direct(f, alpha, beta)?, frac_hessian_nested(f, alpha, beta), "nested gradients".into())
        }
        FracOpSpec::HessianNested { alpha, beta } => {
            (frac_hessian_nested(f, alpha, beta)?, frac_hessian_direct(f, alpha, beta), "single-integral hessian".into())
        }
    })
}

pub fn run_fracops(spec: &FracopsSpec) -> CliResult<(GridField, Vec<OpResult>)> {
    if spec.ops.is_empty() {
        return Err(CliError::Config("fracops.ops: no operators requested".into()));
    }
    if spec.pad == 0 {
        return Err(CliError::Config("fracops.pad: must be at least 1".into()));
    }
    let f = match &spec.input {
        Some(p) => GridField::load(p).map_err(|e| CliError::Config(format!("fracops.input {}: {e}", p.display())))?,
        None => builtin_field(spec).map_err(|e| CliError::Config(format!("fracops: {e}")))?,
    };
    if let Some(d) = &spec.out_dir {
        std::fs::create_dir_all(d)?;
    }
    let mut results = Vec::new();
    for (i, &op) in spec.ops.iter().enumerate() {
        let mut res = OpResult { op, output: None, reference: String::new(), rel_l2: None, error: None };
        match apply(&f, op, spec.pad) {
            Ok((out, reference, name)) => {
                res.reference = name;
                // the gradient of a vector field is compared through its trace
                let cmp = match (&op, f.comps) {
                    (FracOpSpec::Gradient { .. }, c) if c > 1 => trace_field(&out),
                    _ => Ok(out.clone()),
                };
                match (cmp, reference) {
                    (Ok(c), Ok(r)) => res.rel_l2 = c.rel_l2_diff(&r).ok(),
                    (_, Err(e)) | (Err(e), _) => res.reference = format!("{} unavailable: {e}", res.reference),
                }
                if let Some(d) = &spec.out_dir {
                    let path = d.join(format!("{i:02}_{}.bin", op.name()));
                    out.save(&path).map_err(|e| CliError::Io(e.to_string()))?;
                    out.write_csv_slice(&path.with_extension("csv")).map_err(|e| CliError::Io(e.to_string()))?;
                    res.output = Some(path);
                }
            }
            Err(e) => res.error = Some(e.to_string()),
        }
        results.push(res);
    }
    Ok((f, results))
}

#[derive(Serialize)]
struct Report<'a> {
    dim: usize,
    nodes: usize,
    length: f64,
    components: usize,
    results: &'a [OpResult],
}

pub fn cmd_fracops(cfg: &RunConfig) -> CliResult<()> {
    let (f, results) = run_fracops(&cfg.fracops)?;
    match cfg.output.format {
        Format::Json => {
            write_json(&cfg.output, &Report { dim: f.dim, nodes: f.nodes, length: f.length, components: f.comps, results: &results })?
        }
        Format::Csv => {
            let head: Vec<String> = ["op", "reference", "rel_l2", "output", "error"].iter().map(|s| s.to_string()).collect();
            let rows: Vec<Vec<String>> = results
                .iter()
                .map(|r| {
                    vec![
                        r.op.name(),
                        r.reference.clone(),
                        opt_num(r.rel_l2),
                        r.output.as_ref().map(|p| p.display().to_string()).unwrap_or_default(),
                        r.error.clone().unwrap_or_default(),
                    ]
                })
                .collect();
            write_csv(&cfg.output, &head, &rows)?;
        }
    }
    let failed = results.iter().filter(|r| r.error.is_some()).count();
    if failed > 0 {
        return Err(CliError::Numerical(format!("{failed} operator(s) failed")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn laplacian_against_spectral() {
        let spec = FracopsSpec { dim: 1, nodes: 128, length: 8.0, ..Default::default() };
        let (_, r) = run_fracops(&spec).unwrap();
        assert!(r[0].rel_l2.unwrap() < 1e-3);
    }

    #[test]
    fn writes_fields() {
        let dir = tempfile::tempdir().unwrap();
        let spec = FracopsSpec {
            dim: 2,
            nodes: 16,
            length: 8.0,
            vector: true,
            ops: vec![FracOpSpec::Divergence { alpha: 0.4 }, FracOpSpec::Gradient { alpha: 0.4 }],
            out_dir: Some(dir.path().to_path_buf()),
            ..Default::default()
        };
        let (_, r) = run_fracops(&spec).unwrap();
        assert!(r.iter().all(|x| x.error.is_none()), "{r:?}");
        assert!(r[1].rel_l2.unwrap() < 1e-8);
        let g = GridField::load(r[0].output.as_ref().unwrap()).unwrap();
        assert_eq!(g.comps, 1);
    }

    #[test]
    fn order_out_of_range_is_recorded() {
        let spec = FracopsSpec { dim: 1, nodes: 32, ops: vec![FracOpSpec::Laplacian { alpha: 2.5 }], ..Default::default() };
        let (_, r) = run_fracops(&spec).unwrap();
        assert!(r[0].error.is_some());
    }
}
