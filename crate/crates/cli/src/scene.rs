//! Scene strings: `kind[:key=value,...]`, e.g. `sphere:r=0.5`, `torus:R=2,r=0.5`,
//! `icosphere:r=1,sub=5`, `mesh:path/to/file.off`. The bare flag `inward` flips
//! the orientation.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::PathBuf;
use std::sync::Arc;

use nlcurv::surface::mesh::{icosphere, torus_mesh};
use nlcurv::surface::meshio::load_mesh;
use nlcurv::surface::{Geometry, QuadraticGraph, SurfaceScene, Torus, Vec3};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq)]
pub enum SceneKind {
    Sphere { dim: usize, center: Vec3, radius: f64 },
    Plane { dim: usize },
    Torus { major: f64, minor: f64 },
    Graph { a: f64, b: f64, c: f64 },
    Icosphere { radius: f64, subdivisions: usize },
    TorusMesh { major: f64, minor: f64, nu: usize, nv: usize },
    Mesh { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneSpec {
    pub kind: SceneKind,
    pub inward: bool,
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Config(format!("scene: {}", msg.into()))
}

struct Params {
    map: BTreeMap<String, String>,
    flags: Vec<String>,
}

impl Params {
    fn parse(rest: &str) -> CliResult<Self> {
        let mut map = BTreeMap::new();
        let mut flags = Vec::new();
        for item in rest.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            match item.split_once('=') {
                Some((k, v)) => {
                    if map.insert(k.trim().to_string(), v.trim().to_string()).is_some() {
                        return Err(bad(format!("parameter '{k}' given twice")));
                    }
                }
                None => flags.push(item.to_string()),
            }
        }
        Ok(Params { map, flags })
    }

    fn f64_or(&mut self, key: &str, default: f64) -> CliResult<f64> {
        match self.map.remove(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| bad(format!("'{key}={v}' is not a number"))),
        }
    }

    fn usize_or(&mut self, key: &str, default: usize) -> CliResult<usize> {
        match self.map.remove(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| bad(format!("'{key}={v}' is not a non-negative integer"))),
        }
    }

    fn finish(self, kind: &str) -> CliResult<bool> {
        if let Some(k) = self.map.keys().next() {
            return Err(bad(format!("unknown parameter '{k}' for {kind}")));
        }
        let mut inward = false;
        for f in self.flags {
            if f == "inward" {
                inward = true;
            } else {
                return Err(bad(format!("unknown flag '{f}' for {kind}")));
            }
        }
        Ok(inward)
    }
}

impl std::str::FromStr for SceneSpec {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
        let kind = kind.trim();
        if kind == "mesh" {
            let path = rest.trim();
            if path.is_empty() {
                return Err(bad("mesh needs a file path, e.g. mesh:model.off"));
            }
            return Ok(SceneSpec { kind: SceneKind::Mesh { path: PathBuf::from(path) }, inward: false });
        }
        let mut p = Params::parse(rest)?;
        let k = match kind {
            "sphere" | "circle" => {
                let dim = p.usize_or("n", if kind == "circle" { 2 } else { 3 })?;
                let center = Vec3::new(p.f64_or("cx", 0.0)?, p.f64_or("cy", 0.0)?, p.f64_or("cz", 0.0)?);
                SceneKind::Sphere { dim, center, radius: p.f64_or("r", 1.0)? }
            }
            "plane" | "line" => SceneKind::Plane { dim: p.usize_or("n", if kind == "line" { 2 } else { 3 })? },
            "torus" => SceneKind::Torus { major: p.f64_or("R", 2.0)?, minor: p.f64_or("r", 0.5)? },
            "graph" => SceneKind::Graph { a: p.f64_or("a", 0.5)?, b: p.f64_or("b", 0.0)?, c: p.f64_or("c", 0.5)? },
            "icosphere" => SceneKind::Icosphere { radius: p.f64_or("r", 1.0)?, subdivisions: p.usize_or("sub", 5)? },
            "torus-mesh" => SceneKind::TorusMesh {
                major: p.f64_or("R", 2.0)?,
                minor: p.f64_or("r", 0.5)?,
                nu: p.usize_or("nu", 256)?,
                nv: p.usize_or("nv", 64)?,
            },
            other => {
                return Err(bad(format!(
                    "unknown kind '{other}' (expected sphere, circle, plane, line, torus, graph, icosphere, torus-mesh or mesh)"
                )))
            }
        };
        let inward = p.finish(kind)?;
        Ok(SceneSpec { kind: k, inward })
    }
}

impl SceneSpec {
    pub fn build(&self) -> CliResult<SurfaceScene> {
        let cfg = |e: nlcurv::Error| bad(e.to_string());
        let scene = match &self.kind {
            SceneKind::Sphere { dim, center, radius } => SurfaceScene::sphere(*dim, *center, *radius).map_err(cfg)?,
            SceneKind::Plane { dim } => {
                let mut normal = Vec3::zeros();
                normal[dim.saturating_sub(1).min(2)] = 1.0;
                SurfaceScene::plane(*dim, Vec3::zeros(), normal).map_err(cfg)?
            }
            SceneKind::Torus { major, minor } => {
                SurfaceScene::implicit(Arc::new(Torus::new(*major, *minor).map_err(cfg)?)).map_err(cfg)?
            }
            SceneKind::Graph { a, b, c } => {
                SurfaceScene::implicit(Arc::new(QuadraticGraph { a: *a, b: *b, c: *c })).map_err(cfg)?
            }
            SceneKind::Icosphere { radius, subdivisions } => {
                if *subdivisions > 7 {
                    return Err(bad(format!("icosphere subdivision {subdivisions} is too fine (at most 7)")));
                }
                SurfaceScene::mesh(Arc::new(icosphere(Vec3::zeros(), *radius, *subdivisions).map_err(cfg)?))
            }
            SceneKind::TorusMesh { major, minor, nu, nv } => {
                SurfaceScene::mesh(Arc::new(torus_mesh(*major, *minor, *nu, *nv).map_err(cfg)?))
            }
            SceneKind::Mesh { path } => SurfaceScene::mesh(Arc::new(
                load_mesh(path).map_err(|e| bad(format!("{}: {e}", path.display())))?,
            )),
        };
        Ok(if self.inward { scene.flipped() } else { scene })
    }

    pub fn is_mesh(&self) -> bool {
        matches!(self.kind, SceneKind::Icosphere { .. } | SceneKind::TorusMesh { .. } | SceneKind::Mesh { .. })
    }

    /// Radius of the sphere scene, if it is one.
    pub fn sphere_radius(&self) -> Option<f64> {
        match self.kind {
            SceneKind::Sphere { radius, .. } => Some(radius),
            _ => None,
        }
    }
}

/// `N` points spread over the surface, before projection onto it.
pub fn sample_points(spec: &SceneSpec, scene: &SurfaceScene, count: usize) -> Vec<Vec3> {
    let golden = 0.5 * (5f64.sqrt() - 1.0);
    let frac = |x: f64| x - x.floor();
    (0..count)
        .map(|i| {
            let t = (i as f64 + 0.5) / count as f64;
            match &spec.kind {
                SceneKind::Sphere { dim, center, radius } => {
                    if *dim == 2 {
                        let a = 2.0 * PI * i as f64 / count as f64;
                        center + *radius * Vec3::new(a.cos(), a.sin(), 0.0)
                    } else {
                        let z = 1.0 - 2.0 * t;
                        let s = (1.0 - z * z).sqrt();
                        let a = 2.0 * PI * frac(i as f64 * golden);
                        center + *radius * Vec3::new(s * a.cos(), s * a.sin(), z)
                    }
                }
                SceneKind::Plane { .. } => Vec3::new(0.5 * i as f64, 0.0, 0.0),
                SceneKind::Torus { major, minor } => {
                    let u = 2.0 * PI * i as f64 / count as f64;
                    let v = 2.0 * PI * frac(i as f64 * golden);
                    let w = major + minor * v.cos();
                    Vec3::new(w * u.cos(), w * u.sin(), minor * v.sin())
                }
                SceneKind::Graph { .. } => {
                    let a = 2.0 * PI * frac(i as f64 * golden);
                    let r = 0.5 * t.sqrt();
                    Vec3::new(r * a.cos(), r * a.sin(), 0.0)
                }
                SceneKind::Icosphere { .. } | SceneKind::TorusMesh { .. } | SceneKind::Mesh { .. } => match scene.geometry() {
                    Geometry::Mesh(m) => m.vertices[(i * m.vertices.len()) / count.max(1)],
                    _ => Vec3::zeros(),
                },
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_catalog() {
        let s: SceneSpec = "sphere:r=0.5".parse().unwrap();
        assert_eq!(s.kind, SceneKind::Sphere { dim: 3, center: Vec3::zeros(), radius: 0.5 });
        let t: SceneSpec = "torus:R=3,r=1,inward".parse().unwrap();
        assert!(t.inward);
        assert_eq!(t.kind, SceneKind::Torus { major: 3.0, minor: 1.0 });
        assert_eq!("plane".parse::<SceneSpec>().unwrap().kind, SceneKind::Plane { dim: 3 });
        let m: SceneSpec = "mesh:a,b.off".parse().unwrap();
        assert_eq!(m.kind, SceneKind::Mesh { path: "a,b.off".into() });
    }

    #[test]
    fn rejects_bad_strings() {
        for s in ["cube", "sphere:r=x", "sphere:q=1", "sphere:r=1,r=2", "sphere:outward", "mesh:"] {
            assert!(matches!(s.parse::<SceneSpec>(), Err(CliError::Config(_))), "{s}");
        }
    }

    #[test]
    fn sampled_points_project_onto_surface() {
        for s in ["sphere:r=2", "circle:r=0.5", "torus", "graph:a=1,c=-0.5", "plane", "icosphere:sub=2"] {
            let spec: SceneSpec = s.parse().unwrap();
            let scene = spec.build().unwrap();
            for p in sample_points(&spec, &scene, 7) {
                let q = scene.project_onto(&p).unwrap();
                assert!(scene.distance(&q) < 1e-9 * scene.scale(), "{s}");
            }
        }
    }
}
