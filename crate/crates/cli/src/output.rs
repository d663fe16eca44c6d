use std::fs::File;
use std::io::{BufWriter, Write};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::config::OutputSpec;
use crate::error::CliResult;

/// Full round-trip form used for every number in CSV output.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// Seconds since the epoch, unless the run is reproducible.
pub fn timestamp(spec: &OutputSpec) -> Option<u64> {
    if spec.reproducible {
        return None;
    }
    SystemTime::now().duration_since(UNIX_EPOCH).ok().map(|d| d.as_secs())
}

pub fn open(spec: &OutputSpec) -> CliResult<Box<dyn Write>> {
    Ok(match &spec.path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(std::io::stdout())),
    })
}

/// CSV with an optional `# ...` timestamp line in front.
pub fn write_csv(spec: &OutputSpec, header: &[String], rows: &[Vec<String>]) -> CliResult<()> {
    let mut out = open(spec)?;
    if let Some(t) = timestamp(spec) {
        writeln!(out, "# nlcurv {} generated at unix time {t}", env!("CARGO_PKG_VERSION"))?;
    }
    {
        let mut w = csv::Writer::from_writer(&mut out);
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush()?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct Stamped<'a, T: Serialize> {
    #[serde(skip_serializing_if = "Option::is_none")]
    generated_unix: Option<u64>,
    #[serde(flatten)]
    body: &'a T,
}

/// Pretty JSON; `body` must serialize to an object.
pub fn write_json<T: Serialize>(spec: &OutputSpec, body: &T) -> CliResult<()> {
    let mut out = open(spec)?;
    serde_json::to_writer_pretty(&mut out, &Stamped { generated_unix: timestamp(spec), body })?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}
