//! Driver for the `nlcurv` command: config handling, scene strings, the report
//! commands and the verification suites.

pub mod config;
pub mod curvature;
pub mod error;
pub mod fracops;
pub mod output;
pub mod perimeter;
pub mod scene;
pub mod sphere_table;
pub mod verify;

pub use config::RunConfig;
pub use error::{CliError, CliResult};

/// Caps the global thread pool from `NLCURV_THREADS`, if set.
pub fn init_threads() -> CliResult<()> {
    let Ok(v) = std::env::var("NLCURV_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("NLCURV_THREADS: '{v}' is not a positive integer")))?;
    // a pool may already exist when called twice in one process; keep it
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}
