use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nlcurv::curvature::Representation;
use nlcurv::quadrature::TailHandling;
use nlcurv_cli::config::{Format, FracOpSpec, PointSpec, Suite};
use nlcurv_cli::{curvature, fracops, init_threads, perimeter, sphere_table, verify, CliError, CliResult, RunConfig};

#[derive(Parser)]
#[command(name = "nlcurv", version, about = "Nonlocal curvature and fractional operator computations")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Default)]
struct Common {
    /// JSON run configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Report file (standard output by default).
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// csv or json.
    #[arg(long)]
    format: Option<Format>,
    /// Suppress the timestamp header.
    #[arg(long)]
    reproducible: bool,
    /// Print the effective configuration as JSON and exit.
    #[arg(long)]
    print_config: bool,
}

#[derive(Args, Default)]
struct Quad {
    #[arg(long)]
    n_phi: Option<usize>,
    #[arg(long)]
    n_dir: Option<usize>,
    #[arg(long)]
    n_polar: Option<usize>,
    #[arg(long)]
    n_azimuth: Option<usize>,
    #[arg(long)]
    r_max: Option<f64>,
    /// analytic or truncate.
    #[arg(long)]
    tail: Option<String>,
    /// Monte-Carlo samples.
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Directional curvatures, mean curvatures, tensors and K at surface points.
    Curvature {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        quad: Quad,
        /// e.g. sphere:r=0.5, torus:R=2,r=0.5, graph:a=1,c=-1, icosphere:sub=5, mesh:file.off
        #[arg(long)]
        scene: Option<String>,
        #[arg(long, value_delimiter = ',')]
        sigma: Vec<f64>,
        /// σ values of a sweep (same as --sigma).
        #[arg(long, value_delimiter = ',')]
        sweep_sigma: Vec<f64>,
        /// Add σ → 1 limit rows.
        #[arg(long)]
        extrapolate: bool,
        /// Point `x,y[,z]`; repeatable. Points are projected onto the surface.
        #[arg(long, allow_hyphen_values = true)]
        point: Vec<String>,
        /// Sample N points over the surface instead.
        #[arg(long)]
        grid_on_surface: Option<usize>,
        /// angular, fullspace, surface.
        #[arg(long = "rep", value_delimiter = ',')]
        reps: Vec<Representation>,
    },
    /// Monte-Carlo σ-area against σ-perimeter of a ball, and the dilation law.
    Perimeter {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        quad: Quad,
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long, value_delimiter = ',')]
        sigma: Vec<f64>,
        #[arg(long)]
        radius: Option<f64>,
        #[arg(long)]
        omega_radius: Option<f64>,
        #[arg(long)]
        lambda: Option<f64>,
    },
    /// Fractional operators on a grid field, with oracle comparisons.
    Fracops {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long)]
        nodes: Option<usize>,
        #[arg(long)]
        length: Option<f64>,
        /// Binary field file (JSON sidecar next to it).
        #[arg(long)]
        input: Option<PathBuf>,
        /// Use the built-in vector field.
        #[arg(long)]
        vector: bool,
        /// e.g. laplacian:0.5, gradient:0.3, divergence:0.4, div-grad:0.3,0.5, hessian-direct:0.3,0.3
        #[arg(long)]
        op: Vec<FracOpSpec>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long)]
        pad: Option<usize>,
    },
    /// Run verification suites and print a JSON verdict.
    Verify {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        quad: Quad,
        /// specfun, sphere, identities, fracops, perimeter (all when omitted).
        suites: Vec<Suite>,
    },
    /// Closed-form sphere values, optionally against quadrature.
    SphereTable {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        quad: Quad,
        #[arg(long, value_delimiter = ',', default_value = "2,3")]
        n: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "0.5,1,2")]
        rho: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        sigma: Vec<f64>,
        /// Also evaluate k by quadrature.
        #[arg(long)]
        numeric: bool,
    },
}

fn base_config(c: &Common) -> CliResult<RunConfig> {
    let mut cfg = match &c.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(o) = &c.output {
        cfg.output.path = Some(o.clone());
    }
    if let Some(f) = c.format {
        cfg.output.format = f;
    }
    if c.reproducible {
        cfg.output.reproducible = true;
    }
    Ok(cfg)
}

fn apply_quad(cfg: &mut RunConfig, q: &Quad) -> CliResult<()> {
    let s = &mut cfg.quadrature;
    macro_rules! set {
        ($($field:ident <- $flag:ident),*) => {$(if let Some(v) = q.$flag { s.$field = v; })*};
    }
    set!(n_phi <- n_phi, n_dir <- n_dir, n_polar <- n_polar, n_azimuth <- n_azimuth, mc_samples <- samples, rng_seed <- seed);
    if let Some(r) = q.r_max {
        s.r_max = Some(r);
    }
    if let Some(t) = &q.tail {
        s.tail_handling = match t.as_str() {
            "analytic" => TailHandling::Analytic,
            "truncate" => TailHandling::Truncate,
            _ => return Err(CliError::Config(format!("tail: expected analytic or truncate, got '{t}'"))),
        };
    }
    Ok(())
}

fn parse_point(s: &str) -> CliResult<Vec<f64>> {
    s.split(',')
        .map(|x| x.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| CliError::Config(format!("point: cannot parse '{s}' (expected x,y[,z])")))
}

/// Effective config, or `None` when it was only printed.
fn finish(cfg: RunConfig, c: &Common) -> Option<RunConfig> {
    if c.print_config {
        // a closed pipe (e.g. `| head`) is not an error here
        let _ = writeln!(std::io::stdout(), "{}", cfg.to_json());
        return None;
    }
    Some(cfg)
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.cmd {
        Cmd::Curvature { common, quad, scene, sigma, sweep_sigma, extrapolate, point, grid_on_surface, reps } => {
            let mut cfg = base_config(&common)?;
            apply_quad(&mut cfg, &quad)?;
            if let Some(s) = scene {
                cfg.scene = s;
            }
            let sig: Vec<f64> = sigma.into_iter().chain(sweep_sigma).collect();
            if !sig.is_empty() {
                cfg.sigmas = sig;
            }
            cfg.extrapolate |= extrapolate;
            if !point.is_empty() {
                cfg.points = PointSpec::List(point.iter().map(|p| parse_point(p)).collect::<CliResult<_>>()?);
            } else if let Some(n) = grid_on_surface {
                cfg.points = PointSpec::Rule(format!("grid-on-surface {n}"));
            }
            if !reps.is_empty() {
                cfg.representations = reps;
            }
            match finish(cfg, &common) {
                Some(cfg) => curvature::cmd_curvature(&cfg),
                None => Ok(()),
            }
        }
        Cmd::Perimeter { common, quad, dim, sigma, radius, omega_radius, lambda } => {
            let mut cfg = base_config(&common)?;
            apply_quad(&mut cfg, &quad)?;
            if !sigma.is_empty() {
                cfg.sigmas = sigma;
            }
            let p = &mut cfg.perimeter;
            p.dim = dim.unwrap_or(p.dim);
            p.radius = radius.unwrap_or(p.radius);
            p.omega_radius = omega_radius.unwrap_or(p.omega_radius);
            p.lambda = lambda.unwrap_or(p.lambda);
            match finish(cfg, &common) {
                Some(cfg) => perimeter::cmd_perimeter(&cfg),
                None => Ok(()),
            }
        }
        Cmd::Fracops { common, dim, nodes, length, input, vector, op, out_dir, pad } => {
            let mut cfg = base_config(&common)?;
            let f = &mut cfg.fracops;
            f.dim = dim.unwrap_or(f.dim);
            f.nodes = nodes.unwrap_or(f.nodes);
            f.length = length.unwrap_or(f.length);
            f.pad = pad.unwrap_or(f.pad);
            f.vector |= vector;
            if input.is_some() {
                f.input = input;
            }
            if out_dir.is_some() {
                f.out_dir = out_dir;
            }
            if !op.is_empty() {
                f.ops = op;
            }
            match finish(cfg, &common) {
                Some(cfg) => fracops::cmd_fracops(&cfg),
                None => Ok(()),
            }
        }
        Cmd::Verify { common, quad, suites } => {
            let mut cfg = base_config(&common)?;
            apply_quad(&mut cfg, &quad)?;
            if !suites.is_empty() {
                cfg.verify.suites = suites;
            }
            let Some(cfg) = finish(cfg, &common) else { return Ok(()) };
            cfg.quadrature.validate(1.0).map_err(|e| CliError::Config(format!("quadrature: {e}")))?;
            let verdict = verify::run_verify(&cfg.verify.suites, &cfg.quadrature);
            for s in &verdict.suites {
                for c in &s.checks {
                    eprintln!(
                        "[{}] {} criterion {}: {} = {:.3e} (tolerance {:.1e})",
                        if c.passed { "PASS" } else { "FAIL" },
                        s.suite.name(),
                        c.criterion,
                        c.name,
                        c.value,
                        c.tolerance
                    );
                }
            }
            nlcurv_cli::output::write_json(&cfg.output, &verdict)?;
            if verdict.passed {
                Ok(())
            } else {
                Err(CliError::Numerical("verification failed".into()))
            }
        }
        Cmd::SphereTable { common, quad, n, rho, sigma, numeric } => {
            let mut cfg = base_config(&common)?;
            apply_quad(&mut cfg, &quad)?;
            if !sigma.is_empty() {
                cfg.sigmas = sigma;
            } else if common.config.is_none() {
                cfg.sigmas = vec![0.25, 0.5, 0.75];
            }
            match finish(cfg, &common) {
                Some(cfg) => sphere_table::cmd_sphere_table(&cfg, &n, &rho, numeric),
                None => Ok(()),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = init_threads().and_then(|_| run(cli));
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("nlcurv: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
