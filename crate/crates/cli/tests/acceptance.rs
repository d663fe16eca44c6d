//! One line per acceptance criterion at its stated tolerance; exits nonzero if any fails.

use std::process::ExitCode;
use std::time::Instant;

use nlcurv::quadrature::QuadratureSpec;
use nlcurv_cli::config::Suite;
use nlcurv_cli::verify::{run_verify, Check};

const CRITERIA: [&str; 14] = [
    "sphere directional curvature vs closed form",
    "sphere tensor is k times the identity",
    "angular, fullspace and mesh-surface tensors agree",
    "trace identity, same samples and across routes",
    "volume vs direction-averaged mean curvature",
    "sigma -> 1 limits recover -1/rho",
    "Gaussian-curvature double integral vs det L",
    "classical tensor reconstruction and its trace",
    "sigma-area vs sigma-perimeter and dilation law",
    "fractional gradient/divergence/Laplacian identities",
    "fractional Hessian: nested vs single integral",
    "Hessian kernel identity and equivariance",
    "Gauss-Weierstrass moments and subordination",
    "gamma/beta identities",
];

fn worst(checks: &[&Check]) -> Option<Check> {
    let score = |c: &Check| if c.value.is_nan() { f64::INFINITY } else if c.tolerance > 0.0 { c.value / c.tolerance } else { c.value };
    checks.iter().copied().max_by(|a, b| score(a).total_cmp(&score(b))).cloned()
}

fn main() -> ExitCode {
    let start = Instant::now();
    let verdict = run_verify(&Suite::ALL, &QuadratureSpec::default());
    let all: Vec<&Check> = verdict.suites.iter().flat_map(|s| &s.checks).collect();
    let mut failed = 0;
    for (i, title) in CRITERIA.iter().enumerate() {
        let k = i as u32 + 1;
        let mine: Vec<&Check> = all.iter().copied().filter(|c| c.criterion == k).collect();
        let ok = !mine.is_empty() && mine.iter().all(|c| c.passed);
        if !ok {
            failed += 1;
        }
        let w = worst(&mine);
        let summary = match &w {
            Some(c) => format!("worst {} = {:.3e} (tolerance {:.1e}){}", c.name, c.value, c.tolerance, if c.detail.is_empty() { String::new() } else { format!(" [{}]", c.detail) }),
            None => "no checks ran".into(),
        };
        println!("criterion {k:>2} {}: {title} ({} checks); {summary}", if ok { "PASS" } else { "FAIL" }, mine.len());
    }
    for c in all.iter().filter(|c| !c.passed) {
        println!("  failed check: criterion {} {} = {:e} (tolerance {:e}) {}", c.criterion, c.name, c.value, c.tolerance, c.detail);
    }
    println!("acceptance: {} of 14 criteria pass in {:.1} s", 14 - failed, start.elapsed().as_secs_f64());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
