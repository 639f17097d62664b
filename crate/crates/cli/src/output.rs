//! CSV writing helpers.
//!
//! Every file starts with `#` metadata lines: the schema version, the
//! command, the resolved configuration and a description of the
//! environment. The column header follows. Nothing time-dependent is
//! written unless timing is on, so repeated runs are byte-identical.

use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use crate::{CliError, ExperimentConfig, SCHEMA_VERSION};

pub fn open(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| {
            CliError::Config(format!("cannot create {}: {e}", p.display()))
        })?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Platform, core count and clock used for this run.
pub fn environment(timing: bool) -> String {
    format!(
        "os={} arch={} threads={} clock={}",
        std::env::consts::OS,
        std::env::consts::ARCH,
        rayon::current_num_threads(),
        if timing { "monotonic_ms" } else { "off" }
    )
}

pub fn header(w: &mut dyn Write, command: &str, cfg: Option<&ExperimentConfig>, timing: bool) -> io::Result<()> {
    writeln!(w, "# schema_version={SCHEMA_VERSION} command={command}")?;
    if let Some(cfg) = cfg {
        writeln!(w, "# config {}", cfg.describe())?;
    }
    writeln!(w, "# environment {}", environment(timing))
}

/// Float formatting for CSV cells: shortest round-trip digits, switching to
/// exponent notation for very small or very large magnitudes.
#[derive(Debug, Clone, Copy)]
pub struct F(pub f64);

impl fmt::Display for F {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = self.0;
        if v.is_nan() {
            f.write_str("NaN")
        } else if v.is_infinite() {
            f.write_str(if v > 0.0 { "inf" } else { "-inf" })
        } else if v != 0.0 && !(1e-4..1e15).contains(&v.abs()) {
            write!(f, "{v:e}")
        } else {
            write!(f, "{v}")
        }
    }
}

/// Milliseconds with microsecond resolution, or `NA` when timing is off.
pub fn wall_ms(seconds: f64, timing: bool) -> String {
    if timing {
        format!("{:.3}", seconds * 1e3)
    } else {
        "NA".into()
    }
}

/// Mean and half-width of the normal-approximation 95% interval.
pub fn mean_ci(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let v: Vec<f64> = values.collect();
    match exitsim::oracle::mean_and_se(&v) {
        Ok((m, se)) if se.is_finite() => (m, 1.96 * se),
        Ok((m, _)) => (m, 0.0),
        Err(_) => (f64::NAN, f64::NAN),
    }
}
