//! Uniform lattices on the centred box [−L/2, L/2)ⁿ and their file formats.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How a field behaves beyond its box; drives tail handling and padding.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Decay {
    /// Gaussian-class: negligible at the box boundary, zero beyond.
    Gaussian,
    /// Compactly supported inside the box.
    Compact,
    /// |f(x)| ~ |x|^{-exponent}; extended beyond the box by a radial power law.
    Algebraic { exponent: f64 },
    /// One period of a periodic field (spectral oracle only).
    Periodic,
}

/// Scalar (`comps = 1`), vector (`comps = n`) or matrix (`comps = n²`, row-major) field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridField {
    pub dim: usize,
    /// Nodes per axis.
    pub nodes: usize,
    /// Box side L; node i sits at −L/2 + i·h with h = L/nodes.
    pub length: f64,
    pub comps: usize,
    pub decay: Decay,
    /// Per-component value at infinity (empty = all zero); the decay class describes
    /// how fast the field approaches it. Every operator here annihilates constants.
    #[serde(default)]
    pub background: Vec<f64>,
    /// Component-major: `data[c * len + idx]`, idx row-major with the last axis fastest.
    pub data: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSidecar {
    pub dim: usize,
    pub nodes: usize,
    pub length: f64,
    pub spacing: f64,
    pub origin: f64,
    pub components: usize,
    pub decay: Decay,
    #[serde(default)]
    pub background: Vec<f64>,
    pub byte_order: String,
}

const MAGIC: &[u8; 4] = b"NLCF";

impl GridField {
    pub fn zeros(dim: usize, nodes: usize, length: f64, comps: usize, decay: Decay) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidInput(format!("field dimension {dim} unsupported")));
        }
        if nodes < 4 || nodes % 2 != 0 {
            return Err(Error::InvalidInput(format!("nodes per axis = {nodes} must be even and at least 4")));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::InvalidInput(format!("box length {length} must be positive")));
        }
        if comps == 0 {
            return Err(Error::InvalidInput("a field needs at least one component".into()));
        }
        let len = nodes.pow(dim as u32);
        Ok(GridField { dim, nodes, length, comps, decay, background: Vec::new(), data: vec![0.0; len * comps] })
    }

    pub fn from_fn(dim: usize, nodes: usize, length: f64, decay: Decay, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let mut g = Self::zeros(dim, nodes, length, 1, decay)?;
        for i in 0..g.len() {
            g.data[i] = f(&g.coords(i));
        }
        Ok(g)
    }

    pub fn from_vector_fn(dim: usize, nodes: usize, length: f64, decay: Decay, f: impl Fn(&[f64]) -> Vec<f64>) -> Result<Self> {
        let mut g = Self::zeros(dim, nodes, length, dim, decay)?;
        let len = g.len();
        for i in 0..len {
            let v = f(&g.coords(i));
            for (c, x) in v.iter().take(dim).enumerate() {
                g.data[c * len + i] = *x;
            }
        }
        Ok(g)
    }

    /// Builds a field from component arrays on the same lattice as `self`.
    pub fn with_components(&self, comps: Vec<Vec<f64>>, decay: Decay) -> GridField {
        let c = comps.len();
        GridField { dim: self.dim, nodes: self.nodes, length: self.length, comps: c, decay, background: Vec::new(), data: comps.concat() }
    }

    /// Number of lattice nodes.
    pub fn len(&self) -> usize {
        self.nodes.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.nodes as f64
    }

    pub fn coords(&self, idx: usize) -> Vec<f64> {
        let h = self.spacing();
        self.multi_index(idx).iter().map(|&i| -0.5 * self.length + i as f64 * h).collect()
    }

    pub fn multi_index(&self, mut idx: usize) -> Vec<usize> {
        let mut m = vec![0; self.dim];
        for d in (0..self.dim).rev() {
            m[d] = idx % self.nodes;
            idx /= self.nodes;
        }
        m
    }

    pub fn component(&self, c: usize) -> &[f64] {
        let len = self.len();
        &self.data[c * len..(c + 1) * len]
    }

    pub fn components(&self) -> Vec<Vec<f64>> {
        (0..self.comps).map(|c| self.component(c).to_vec()).collect()
    }

    /// Discrete L² norm over the box, all components.
    pub fn l2_norm(&self) -> f64 {
        (self.data.iter().map(|x| x * x).sum::<f64>() * self.spacing().powi(self.dim as i32)).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |a, &x| a.max(x.abs()))
    }

    /// Relative L² distance ‖self − other‖/‖other‖.
    pub fn rel_l2_diff(&self, other: &GridField) -> Result<f64> {
        self.check_same(other)?;
        let num: f64 = self.data.iter().zip(&other.data).map(|(a, b)| (a - b).powi(2)).sum();
        let den: f64 = other.data.iter().map(|b| b * b).sum();
        Ok((num / den.max(f64::MIN_POSITIVE)).sqrt())
    }

    pub fn check_same(&self, other: &GridField) -> Result<()> {
        if self.dim != other.dim || self.nodes != other.nodes || self.comps != other.comps || self.length != other.length {
            return Err(Error::InvalidInput("fields live on different lattices".into()));
        }
        Ok(())
    }

    pub fn background_of(&self, c: usize) -> f64 {
        self.background.get(c).copied().unwrap_or(0.0)
    }

    /// Component `c` minus its value at infinity.
    pub fn deviation(&self, c: usize) -> Vec<f64> {
        let b = self.background_of(c);
        self.component(c).iter().map(|x| x - b).collect()
    }

    /// max |f − background| over boundary nodes divided by its max over the box.
    pub fn boundary_ratio(&self) -> f64 {
        let len = self.len();
        let (mut b, mut mx): (f64, f64) = (0.0, 0.0);
        for c in 0..self.comps {
            let bg = self.background_of(c);
            for i in 0..len {
                let v = (self.data[c * len + i] - bg).abs();
                mx = mx.max(v);
                if self.multi_index(i).iter().any(|&m| m == 0 || m == self.nodes - 1) {
                    b = b.max(v);
                }
            }
        }
        if mx == 0.0 {
            0.0
        } else {
            b / mx
        }
    }

    /// Linear combination a·self + b·other.
    pub fn axpby(&self, a: f64, other: &GridField, b: f64) -> Result<GridField> {
        self.check_same(other)?;
        let mut out = self.clone();
        for (o, y) in out.data.iter_mut().zip(&other.data) {
            *o = a * *o + b * y;
        }
        out.background = (0..self.comps).map(|c| a * self.background_of(c) + b * other.background_of(c)).collect();
        Ok(out)
    }

    /// Cyclic shift by a lattice vector (values wrapping around the box).
    pub fn shifted(&self, by: &[i64]) -> GridField {
        let mut out = self.clone();
        let len = self.len();
        let nn = self.nodes as i64;
        for i in 0..len {
            let m = self.multi_index(i);
            let mut j = 0usize;
            for d in 0..self.dim {
                j = j * self.nodes + (m[d] as i64 + by[d]).rem_euclid(nn) as usize;
            }
            for c in 0..self.comps {
                out.data[c * len + j] = self.data[c * len + i];
            }
        }
        out
    }

    pub fn sidecar(&self) -> FieldSidecar {
        FieldSidecar {
            dim: self.dim,
            nodes: self.nodes,
            length: self.length,
            spacing: self.spacing(),
            origin: -0.5 * self.length,
            components: self.comps,
            decay: self.decay,
            background: self.background.clone(),
            byte_order: "little-endian f64".into(),
        }
    }

    /// Binary layout: b"NLCF", n (u64), n axis sizes (u64), L (f64), components (u64), values (f64).
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut b = Vec::with_capacity(8 * (self.data.len() + 8));
        b.extend_from_slice(MAGIC);
        b.extend_from_slice(&(self.dim as u64).to_le_bytes());
        for _ in 0..self.dim {
            b.extend_from_slice(&(self.nodes as u64).to_le_bytes());
        }
        b.extend_from_slice(&self.length.to_le_bytes());
        b.extend_from_slice(&(self.comps as u64).to_le_bytes());
        for x in &self.data {
            b.extend_from_slice(&x.to_le_bytes());
        }
        b
    }

    pub fn from_bytes(bytes: &[u8], decay: Decay) -> Result<GridField> {
        let bad = |m: &str| Error::Parse { line: 0, msg: m.to_string() };
        let mut pos = 0usize;
        let mut take = |k: usize| -> Result<&[u8]> {
            let s = bytes.get(pos..pos + k).ok_or_else(|| bad("truncated field file"))?;
            pos += k;
            Ok(s)
        };
        if take(4)? != MAGIC {
            return Err(bad("not a field file (bad magic)"));
        }
        let u = |s: &[u8]| u64::from_le_bytes(s.try_into().expect("8 bytes")) as usize;
        let dim = u(take(8)?);
        if !(1..=3).contains(&dim) {
            return Err(bad("field dimension must be 1, 2 or 3"));
        }
        let mut sizes = Vec::new();
        for _ in 0..dim {
            sizes.push(u(take(8)?));
        }
        if sizes.iter().any(|&s| s != sizes[0]) {
            return Err(bad("only cubic lattices are supported"));
        }
        let length = f64::from_le_bytes(take(8)?.try_into().expect("8 bytes"));
        let comps = u(take(8)?);
        let mut g = GridField::zeros(dim, sizes[0], length, comps, decay)?;
        for x in g.data.iter_mut() {
            *x = f64::from_le_bytes(take(8)?.try_into().expect("8 bytes"));
        }
        if pos != bytes.len() {
            return Err(bad("trailing bytes after field data"));
        }
        Ok(g)
    }

    /// Writes `path` (binary) and `path.json` (sidecar).
    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes())?;
        let side = serde_json::to_string_pretty(&self.sidecar()).map_err(|e| Error::Io(e.to_string()))?;
        fs::write(sidecar_path(path), side)?;
        Ok(())
    }

    /// Reads a binary field, taking the decay class from the sidecar when present.
    pub fn load(path: &Path) -> Result<GridField> {
        let bytes = fs::read(path)?;
        let side = sidecar_path(path);
        let (decay, background) = if side.exists() {
            let s: FieldSidecar = serde_json::from_str(&fs::read_to_string(&side)?)
                .map_err(|e| Error::Parse { line: e.line(), msg: e.to_string() })?;
            (s.decay, s.background)
        } else {
            (Decay::Gaussian, Vec::new())
        };
        let mut g = GridField::from_bytes(&bytes, decay)?;
        g.background = background;
        Ok(g)
    }

    /// CSV of the whole field (n = 1, 2) or of the x₃ = 0 plane (n = 3).
    pub fn write_csv_slice(&self, path: &Path) -> Result<()> {
        let mut w = std::io::BufWriter::new(fs::File::create(path)?);
        let axes = ["x", "y", "z"];
        let shown = self.dim.min(2);
        let mut head: Vec<String> = axes[..shown].iter().map(|s| s.to_string()).collect();
        head.extend((0..self.comps).map(|c| format!("v{c}")));
        writeln!(w, "{}", head.join(","))?;
        let len = self.len();
        for i in 0..len {
            let m = self.multi_index(i);
            if self.dim == 3 && m[2] != self.nodes / 2 {
                continue;
            }
            let x = self.coords(i);
            let mut row: Vec<String> = x[..shown].iter().map(|v| format!("{v:.16e}")).collect();
            row.extend((0..self.comps).map(|c| format!("{:.16e}", self.data[c * len + i])));
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

pub fn sidecar_path(path: &Path) -> std::path::PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    s.into()
}

/// `e^{−π|x|²}`, whose Fourier transform is itself.
pub fn gaussian_field(dim: usize, nodes: usize, length: f64) -> Result<GridField> {
    GridField::from_fn(dim, nodes, length, Decay::Gaussian, |x| {
        (-std::f64::consts::PI * x.iter().map(|v| v * v).sum::<f64>()).exp()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_and_coords() {
        let g = gaussian_field(2, 8, 4.0).unwrap();
        assert_eq!(g.len(), 64);
        assert_eq!(g.spacing(), 0.5);
        assert_eq!(g.coords(0), vec![-2.0, -2.0]);
        assert_eq!(g.coords(4 * 8 + 4), vec![0.0, 0.0]);
        assert_eq!(g.data[4 * 8 + 4], 1.0);
        assert_eq!(g.multi_index(13), vec![1, 5]);
    }

    #[test]
    fn binary_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.bin");
        let g = GridField::from_vector_fn(2, 6, 3.0, Decay::Compact, |x| vec![x[0], x[1] * 2.0]).unwrap();
        g.save(&p).unwrap();
        let back = GridField::load(&p).unwrap();
        assert_eq!(back, g);
        let side: FieldSidecar = serde_json::from_str(&fs::read_to_string(sidecar_path(&p)).unwrap()).unwrap();
        assert_eq!(side.spacing, 0.5);
        let mut bytes = g.to_bytes();
        bytes.pop();
        assert!(GridField::from_bytes(&bytes, Decay::Gaussian).is_err());
        g.write_csv_slice(&dir.path().join("f.csv")).unwrap();
        let csv = fs::read_to_string(dir.path().join("f.csv")).unwrap();
        assert_eq!(csv.lines().count(), 37);
        assert!(csv.starts_with("x,y,v0,v1"));
    }

    #[test]
    fn boundary_and_shift() {
        let g = gaussian_field(1, 64, 6.0).unwrap();
        assert!(g.boundary_ratio() < 1e-10);
        let s = g.shifted(&[3]);
        assert_eq!(s.data[35], g.data[32]);
    }
}
