//! Run configuration: one JSON file, with command-line flags layered on top.

use std::path::{Path, PathBuf};

use nlcurv::curvature::Representation;
use nlcurv::quadrature::QuadratureSpec;
use nlcurv::surface::{SurfaceScene, Vec3};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::scene::{sample_points, SceneSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PointSpec {
    /// Explicit points; missing trailing coordinates are zero.
    List(Vec<Vec<f64>>),
    /// Sampling rule, currently only `"grid-on-surface N"`.
    Rule(String),
}

impl Default for PointSpec {
    fn default() -> Self {
        PointSpec::List(Vec::new())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = CliError;
    fn from_str(s: &str) -> CliResult<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(CliError::Config(format!("format: expected csv or json, got '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    /// Report file; standard output when absent.
    pub path: Option<PathBuf>,
    pub format: Format,
    /// Omit the timestamp header so identical runs give identical bytes.
    pub reproducible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PerimeterSpec {
    pub dim: usize,
    /// Radius of the ball E (and of the sphere ∂E).
    pub radius: f64,
    /// Radius of the ball Ω.
    pub omega_radius: f64,
    /// Dilation for the scaling-law check.
    pub lambda: f64,
}

impl Default for PerimeterSpec {
    fn default() -> Self {
        PerimeterSpec { dim: 3, radius: 1.0, omega_radius: 2.0, lambda: 2.0 }
    }
}

/// One fractional operator application.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum FracOpSpec {
    Laplacian { alpha: f64 },
    Gradient { alpha: f64 },
    Divergence { alpha: f64 },
    DivGrad { alpha: f64, beta: f64 },
    HessianDirect { alpha: f64, beta: f64 },
    HessianNested { alpha: f64, beta: f64 },
}

impl FracOpSpec {
    pub fn name(&self) -> String {
        match self {
            FracOpSpec::Laplacian { alpha } => format!("laplacian_{alpha}"),
            FracOpSpec::Gradient { alpha } => format!("gradient_{alpha}"),
            FracOpSpec::Divergence { alpha } => format!("divergence_{alpha}"),
            FracOpSpec::DivGrad { alpha, beta } => format!("div_grad_{alpha}_{beta}"),
            FracOpSpec::HessianDirect { alpha, beta } => format!("hessian_direct_{alpha}_{beta}"),
            FracOpSpec::HessianNested { alpha, beta } => format!("hessian_nested_{alpha}_{beta}"),
        }
    }
}

/// `laplacian:0.5`, `div-grad:0.3,0.5`, ...
impl std::str::FromStr for FracOpSpec {
    type Err = CliError;
    fn from_str(s: &str) -> CliResult<Self> {
        let bad = || CliError::Config(format!("op: cannot parse '{s}' (e.g. laplacian:0.5 or div-grad:0.3,0.5)"));
        let (name, args) = s.split_once(':').ok_or_else(bad)?;
        let v: Vec<f64> = args.split(',').map(|a| a.trim().parse()).collect::<Result<_, _>>().map_err(|_| bad())?;
        let one = |f: fn(f64) -> FracOpSpec| if v.len() == 1 { Ok(f(v[0])) } else { Err(bad()) };
        let two = |f: fn(f64, f64) -> FracOpSpec| if v.len() == 2 { Ok(f(v[0], v[1])) } else { Err(bad()) };
        match name.replace('-', "_").as_str() {
            "laplacian" => one(|alpha| FracOpSpec::Laplacian { alpha }),
            "gradient" => one(|alpha| FracOpSpec::Gradient { alpha }),
            "divergence" => one(|alpha| FracOpSpec::Divergence { alpha }),
            "div_grad" => two(|alpha, beta| FracOpSpec::DivGrad { alpha, beta }),
            "hessian_direct" => two(|alpha, beta| FracOpSpec::HessianDirect { alpha, beta }),
            "hessian_nested" => two(|alpha, beta| FracOpSpec::HessianNested { alpha, beta }),
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FracopsSpec {
    /// Field file (binary with JSON sidecar); the built-in Gaussian when absent.
    pub input: Option<PathBuf>,
    /// Built-in field is vector-valued (one shifted Gaussian per component).
    pub vector: bool,
    pub dim: usize,
    pub nodes: usize,
    pub length: f64,
    pub ops: Vec<FracOpSpec>,
    /// Where result fields are written; nothing is written when absent.
    pub out_dir: Option<PathBuf>,
    /// Zero-padding factor of the spectral comparison.
    pub pad: usize,
}

impl Default for FracopsSpec {
    fn default() -> Self {
        FracopsSpec {
            input: None,
            vector: false,
            dim: 2,
            nodes: 64,
            length: 6.0,
            ops: vec![FracOpSpec::Laplacian { alpha: 0.5 }],
            out_dir: None,
            pad: 8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Specfun,
    Sphere,
    Identities,
    Fracops,
    Perimeter,
}

impl Suite {
    pub const ALL: [Suite; 5] = [Suite::Specfun, Suite::Sphere, Suite::Identities, Suite::Fracops, Suite::Perimeter];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Specfun => "specfun",
            Suite::Sphere => "sphere",
            Suite::Identities => "identities",
            Suite::Fracops => "fracops",
            Suite::Perimeter => "perimeter",
        }
    }
}

impl std::str::FromStr for Suite {
    type Err = CliError;
    fn from_str(s: &str) -> CliResult<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| CliError::Config(format!("verify: unknown suite '{s}' (specfun, sphere, identities, fracops, perimeter)")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifySpec {
    pub suites: Vec<Suite>,
}

impl Default for VerifySpec {
    fn default() -> Self {
        VerifySpec { suites: Suite::ALL.to_vec() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub scene: String,
    pub points: PointSpec,
    pub sigmas: Vec<f64>,
    /// Add σ → 1 limit rows (needs at least two σ values).
    pub extrapolate: bool,
    pub representations: Vec<Representation>,
    pub quadrature: QuadratureSpec,
    pub output: OutputSpec,
    pub perimeter: PerimeterSpec,
    pub fracops: FracopsSpec,
    pub verify: VerifySpec,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            scene: "sphere:r=1".into(),
            points: PointSpec::default(),
            sigmas: vec![0.5],
            extrapolate: false,
            representations: vec![Representation::Angular, Representation::Fullspace],
            quadrature: QuadratureSpec::default(),
            output: OutputSpec::default(),
            perimeter: PerimeterSpec::default(),
            fracops: FracopsSpec::default(),
            verify: VerifySpec::default(),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> CliResult<Self> {
        serde_json::from_str(text)
            .map_err(|e| CliError::Config(format!("line {}, column {}: {e}", e.line(), e.column())))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn scene_spec(&self) -> CliResult<SceneSpec> {
        self.scene.parse()
    }

    /// Checks the fields shared by every command.
    pub fn validate(&self) -> CliResult<()> {
        for (i, &s) in self.sigmas.iter().enumerate() {
            if !(s > 0.0 && s < 1.0) {
                return Err(CliError::Config(format!("sigmas[{i}]: {s} must lie in (0, 1)")));
            }
        }
        if self.sigmas.is_empty() {
            return Err(CliError::Config("sigmas: at least one value is needed".into()));
        }
        if self.extrapolate && self.sigmas.len() < 2 {
            return Err(CliError::Config("extrapolate: needs at least two sigma values".into()));
        }
        if self.representations.is_empty() {
            return Err(CliError::Config("representations: at least one is needed".into()));
        }
        Ok(())
    }

    /// Validated points, projected onto the scene.
    pub fn resolve_points(&self, spec: &SceneSpec, scene: &SurfaceScene) -> CliResult<Vec<Vec3>> {
        let raw: Vec<Vec3> = match &self.points {
            PointSpec::List(list) => {
                let mut out = Vec::new();
                for (i, p) in list.iter().enumerate() {
                    if p.is_empty() || p.len() > 3 || p.iter().any(|x| !x.is_finite()) {
                        return Err(CliError::Config(format!("points[{i}]: expected 1 to 3 finite coordinates")));
                    }
                    let mut v = Vec3::zeros();
                    for (k, x) in p.iter().enumerate() {
                        v[k] = *x;
                    }
                    out.push(v);
                }
                out
            }
            PointSpec::Rule(rule) => {
                let count = rule
                    .strip_prefix("grid-on-surface")
                    .and_then(|n| n.trim().parse::<usize>().ok())
                    .filter(|&n| n > 0)
                    .ok_or_else(|| CliError::Config(format!("points: unknown rule '{rule}' (expected \"grid-on-surface N\")")))?;
                sample_points(spec, scene, count)
            }
        };
        if raw.is_empty() {
            return Err(CliError::Config("points: no evaluation points given".into()));
        }
        raw.iter()
            .enumerate()
            .map(|(i, p)| {
                if scene.dim() == 2 && p.z != 0.0 {
                    return Err(CliError::Config(format!("points[{i}]: a planar scene needs x3 = 0")));
                }
                scene.project_onto(p).map_err(|e| CliError::Config(format!("points[{i}]: {e}")))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let c = RunConfig::default();
        assert_eq!(RunConfig::from_json(&c.to_json()).unwrap(), c);
    }

    #[test]
    fn partial_file_and_diagnostics() {
        let c = RunConfig::from_json(r#"{"scene": "torus:R=2,r=0.5", "points": "grid-on-surface 4"}"#).unwrap();
        assert_eq!(c.points, PointSpec::Rule("grid-on-surface 4".into()));
        assert_eq!(c.sigmas, vec![0.5]);
        let e = RunConfig::from_json("{\n  \"scene\": \"plane\",\n  \"sigma\": [0.5]\n}").unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("line 3") && msg.contains("sigma"), "{msg}");
        let bad = RunConfig { sigmas: vec![0.5, 1.0], ..Default::default() };
        assert!(bad.validate().unwrap_err().to_string().contains("sigmas[1]"));
    }

    #[test]
    fn ops_parse() {
        assert_eq!("div-grad:0.3,0.5".parse::<FracOpSpec>().unwrap(), FracOpSpec::DivGrad { alpha: 0.3, beta: 0.5 });
        assert!("laplacian:0.3,0.5".parse::<FracOpSpec>().is_err());
        let j = serde_json::to_string(&FracOpSpec::Gradient { alpha: 0.25 }).unwrap();
        assert_eq!(j, r#"{"op":"gradient","alpha":0.25}"#);
    }

    #[test]
    fn points_are_projected() {
        let c = RunConfig { scene: "sphere:r=0.5".into(), points: PointSpec::List(vec![vec![1.0, 0.0, 0.0]]), ..Default::default() };
        let spec = c.scene_spec().unwrap();
        let p = c.resolve_points(&spec, &spec.build().unwrap()).unwrap();
        assert!((p[0] - Vec3::new(0.5, 0.0, 0.0)).norm() < 1e-15);
        let c = RunConfig { points: PointSpec::Rule("grid 3".into()), ..c };
        assert!(c.resolve_points(&spec, &spec.build().unwrap()).is_err());
    }
}
