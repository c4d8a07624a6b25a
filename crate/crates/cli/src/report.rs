use crate::config::{Command, Format};
use pretlab::Complex64;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] pretlab::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    /// 2 for bad input, 1 for internal failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_precondition() => 2,
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

/// Everything that determines a report's numbers.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Config {
    #[serde(flatten)]
    pub command: Command,
    pub sieve_limit: u64,
}

/// What a subcommand hands back for serialization.
pub struct Output {
    pub result: serde_json::Value,
    /// `(p, local factor)` rows for the CSV form.
    pub factors: Vec<(u64, Complex64)>,
    pub summary: Vec<(String, Complex64)>,
    /// Exit code when the run completed but a check did not hold.
    pub exit_code: u8,
}

impl Output {
    pub fn new(result: impl Serialize) -> Result<Self, CliError> {
        Ok(Self {
            result: serde_json::to_value(result)?,
            factors: Vec::new(),
            summary: Vec::new(),
            exit_code: 0,
        })
    }

    pub fn factors(mut self, factors: impl IntoIterator<Item = (u64, Complex64)>) -> Self {
        self.factors.extend(factors);
        self
    }

    pub fn real(mut self, key: &str, value: f64) -> Self {
        self.summary.push((key.to_string(), Complex64::new(value, 0.0)));
        self
    }

    pub fn complex(mut self, key: &str, value: Complex64) -> Self {
        self.summary.push((key.to_string(), value));
        self
    }

    pub fn maybe(self, key: &str, value: Option<f64>) -> Self {
        match value {
            Some(v) => self.real(key, v),
            None => self,
        }
    }
}

#[derive(Serialize)]
struct Timing {
    elapsed_seconds: f64,
}

#[derive(Serialize)]
struct Report<'a> {
    tool: &'static str,
    version: &'static str,
    config: &'a Config,
    result: &'a serde_json::Value,
    /// Last, so everything above it is reproducible byte for byte.
    timing: Timing,
}

#[derive(Serialize)]
struct CsvRow<'a> {
    section: &'a str,
    key: &'a str,
    p: Option<u64>,
    re: f64,
    im: f64,
}

fn write_csv<W: Write>(out: W, output: &Output) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    for &(p, v) in &output.factors {
        w.serialize(CsvRow {
            section: "factor",
            key: "",
            p: Some(p),
            re: v.re,
            im: v.im,
        })?;
    }
    for (key, v) in &output.summary {
        w.serialize(CsvRow {
            section: "summary",
            key,
            p: None,
            re: v.re,
            im: v.im,
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit(config: &Config, output: &Output, elapsed: f64, format: Format, path: Option<&Path>) -> Result<(), CliError> {
    let mut sink: Box<dyn Write> = match path {
        Some(p) => Box::new(std::io::BufWriter::new(std::fs::File::create(p)?)),
        None => Box::new(std::io::stdout().lock()),
    };
    match format {
        Format::Json => {
            let report = Report {
                tool: "pretlab",
                version: env!("CARGO_PKG_VERSION"),
                config,
                result: &output.result,
                timing: Timing { elapsed_seconds: elapsed },
            };
            serde_json::to_writer_pretty(&mut sink, &report)?;
            writeln!(sink)?;
        }
        Format::Csv => write_csv(&mut sink, output)?,
    }
    sink.flush()?;
    Ok(())
}

/// The config embedded in a JSON report.
pub fn read_config(path: &Path) -> Result<Config, CliError> {
    let text = std::fs::read_to_string(path)?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    let config = value
        .get("config")
        .ok_or_else(|| CliError::Usage(format!("{} has no config field", path.display())))?;
    Ok(serde_json::from_value(config.clone())?)
}
