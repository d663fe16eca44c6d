//! σ → 1 extrapolation of (1−σ)·quantity, polynomial in h = 1−σ.

use serde::{Deserialize, Serialize};

use crate::curvature::tensor::SymTangentTensor;
use crate::error::{Error, Result};

/// Successive extrapolants further apart than this (relative) are rejected.
pub const LIMIT_TOLERANCE: f64 = 0.1;

pub const DEFAULT_SIGMAS: [f64; 3] = [0.9, 0.95, 0.99];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitEstimate {
    pub estimate: f64,
    /// |last extrapolant − previous one|.
    pub residual: f64,
}

/// Neville's scheme at h = 0; returns the extrapolants using 1, 2, … of the points.
fn neville_at_zero(h: &[f64], f: &[f64]) -> Vec<f64> {
    let mut p = f.to_vec();
    let mut diag = vec![p[0]];
    for m in 1..h.len() {
        for i in 0..h.len() - m {
            p[i] = (h[i + m] * p[i] - h[i] * p[i + 1]) / (h[i + m] - h[i]);
        }
        diag.push(p[0]);
    }
    diag
}

fn prepare(sigmas: &[f64]) -> Result<(Vec<usize>, Vec<f64>)> {
    if sigmas.len() < 2 {
        return Err(Error::InvalidInput("at least two sigma values are needed".into()));
    }
    if sigmas.iter().any(|&s| !(s > 0.0 && s < 1.0)) {
        return Err(Error::Domain("sigma values must lie in (0, 1)".into()));
    }
    let mut idx: Vec<usize> = (0..sigmas.len()).collect();
    // farthest from 1 first, so the last extrapolant uses every point
    idx.sort_by(|&a, &b| sigmas[a].total_cmp(&sigmas[b]));
    if idx.windows(2).any(|w| sigmas[w[0]] == sigmas[w[1]]) {
        return Err(Error::InvalidInput("sigma values must be distinct".into()));
    }
    let h = idx.iter().map(|&i| 1.0 - sigmas[i]).collect();
    Ok((idx, h))
}

/// Limit of (1−σ)·value(σ) as σ → 1 from samples `(σ, value)`.
pub fn sigma_to_one_limit(samples: &[(f64, f64)]) -> Result<LimitEstimate> {
    let sig: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let (idx, h) = prepare(&sig)?;
    let f: Vec<f64> = idx.iter().zip(&h).map(|(&i, hi)| hi * samples[i].1).collect();
    let ex = neville_at_zero(&h, &f);
    let (prev, last) = (ex[ex.len() - 2], ex[ex.len() - 1]);
    let residual = (last - prev).abs();
    if residual > LIMIT_TOLERANCE * last.abs().max(prev.abs()) && residual > 1e-12 {
        return Err(Error::NonConvergent(prev, last));
    }
    Ok(LimitEstimate { estimate: last, residual })
}

/// Entrywise tensor version; convergence is judged on the Frobenius norm.
pub fn sigma_to_one_limit_tensor(samples: &[(f64, SymTangentTensor)]) -> Result<(SymTangentTensor, f64)> {
    let sig: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let (idx, h) = prepare(&sig)?;
    let first = &samples[idx[0]].1;
    let d = first.dim();
    let mut last = vec![vec![0.0; d]; d];
    let mut prev = vec![vec![0.0; d]; d];
    for a in 0..d {
        for b in 0..d {
            let f: Vec<f64> = idx
                .iter()
                .zip(&h)
                .map(|(&i, hi)| hi * samples[i].1.in_frame(&first.frame).map(|t| t.matrix[a][b]).unwrap_or(f64::NAN))
                .collect();
            let ex = neville_at_zero(&h, &f);
            prev[a][b] = ex[ex.len() - 2];
            last[a][b] = ex[ex.len() - 1];
        }
    }
    let fro = |m: &Vec<Vec<f64>>| m.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
    let diff: Vec<Vec<f64>> = (0..d).map(|a| (0..d).map(|b| last[a][b] - prev[a][b]).collect()).collect();
    let residual = fro(&diff);
    if !residual.is_finite() || (residual > LIMIT_TOLERANCE * fro(&last).max(fro(&prev)) && residual > 1e-12) {
        return Err(Error::NonConvergent(fro(&prev), fro(&last)));
    }
    Ok((SymTangentTensor::new(first.frame.clone(), last)?, residual))
}
