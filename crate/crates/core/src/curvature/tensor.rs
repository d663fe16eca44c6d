use nalgebra::{DMatrix, Matrix3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::surface::TangentFrame;

/// Symmetric tensor on T_zS, stored in frame coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymTangentTensor {
    pub frame: TangentFrame,
    pub matrix: Vec<Vec<f64>>,
    /// max |M − Mᵀ| before symmetrization.
    pub asymmetry: f64,
}

impl SymTangentTensor {
    /// Symmetrizes `m`, recording the removed asymmetry.
    pub fn new(frame: TangentFrame, m: Vec<Vec<f64>>) -> Result<Self> {
        let d = frame.tangent_dim();
        if m.len() != d || m.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidInput(format!("tensor must be {d}x{d}")));
        }
        let mut asym: f64 = 0.0;
        let mut s = m.clone();
        for i in 0..d {
            for j in 0..d {
                asym = asym.max((m[i][j] - m[j][i]).abs());
                s[i][j] = 0.5 * (m[i][j] + m[j][i]);
            }
        }
        Ok(SymTangentTensor { frame, matrix: s, asymmetry: asym })
    }

    pub fn dim(&self) -> usize {
        self.matrix.len()
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.matrix[i][i]).sum()
    }

    pub fn det(&self) -> f64 {
        DMatrix::from_fn(self.dim(), self.dim(), |i, j| self.matrix[i][j]).determinant()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let m = DMatrix::from_fn(self.dim(), self.dim(), |i, j| self.matrix[i][j]);
        let mut v: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
        v.sort_by(f64::total_cmp);
        v
    }

    pub fn max_abs(&self) -> f64 {
        self.matrix.iter().flatten().fold(0.0, |a, &x| a.max(x.abs()))
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.matrix.iter().flatten().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn ambient(&self) -> Matrix3<f64> {
        self.frame.lift(&self.matrix)
    }

    /// Components in another frame of the same tangent space.
    pub fn in_frame(&self, other: &TangentFrame) -> Result<SymTangentTensor> {
        if other.tangent_dim() != self.dim() {
            return Err(Error::InvalidInput("frames of different dimension".into()));
        }
        let a = self.ambient();
        let m = other
            .tangents
            .iter()
            .map(|ei| other.tangents.iter().map(|ej| (ei.transpose() * a * ej)[0]).collect())
            .collect();
        SymTangentTensor::new(other.clone(), m)
    }

    /// Largest entrywise difference after expressing `other` in this frame.
    pub fn max_diff(&self, other: &SymTangentTensor) -> Result<f64> {
        let o = other.in_frame(&self.frame)?;
        Ok(self
            .matrix
            .iter()
            .flatten()
            .zip(o.matrix.iter().flatten())
            .fold(0.0, |a, (x, y)| a.max((x - y).abs())))
    }

    pub fn scaled(&self, c: f64) -> SymTangentTensor {
        let matrix = self.matrix.iter().map(|r| r.iter().map(|x| c * x).collect()).collect();
        SymTangentTensor { frame: self.frame.clone(), matrix, asymmetry: c.abs() * self.asymmetry }
    }
}
