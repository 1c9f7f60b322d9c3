//! Output files. JSON files wrap their payload with provenance and the
//! effective configuration; CSV and IR files start with a `#` provenance line.

use crate::{CliError, Command, Config};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config_hash: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Envelope<T> {
    pub provenance: Provenance,
    pub config: Config,
    pub result: T,
}

pub fn command_name(c: Command) -> &'static str {
    match c {
        Command::Build => "build",
        Command::Classify => "classify",
        Command::Simulate => "simulate",
        Command::Estimate => "estimate",
        Command::PhaseDiagram => "phase-diagram",
    }
}

pub struct OutputDir {
    pub dir: PathBuf,
    pub provenance: Provenance,
    config: Config,
}

impl OutputDir {
    pub fn new(dir: PathBuf, config: &Config, command: Command) -> Self {
        let provenance = Provenance {
            tool: "snt".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command_name(command).into(),
            config_hash: config.hash(),
        };
        OutputDir { dir, provenance, config: config.clone() }
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn header_line(&self) -> String {
        let p = &self.provenance;
        format!("# {} {} {} config_hash={}\n", p.tool, p.version, p.command, p.config_hash)
    }

    pub fn write_json<T: Serialize>(&self, name: &str, result: &T) -> Result<PathBuf, CliError> {
        let env = Envelope { provenance: self.provenance.clone(), config: self.config.clone(), result };
        let mut text = serde_json::to_string_pretty(&env).map_err(|e| CliError::Internal(e.to_string()))?;
        text.push('\n');
        self.write_raw(name, text.as_bytes())
    }

    /// Writes `body` (CSV or IR text) after the provenance line.
    pub fn write_with_header(&self, name: &str, body: &[u8]) -> Result<PathBuf, CliError> {
        let mut bytes = self.header_line().into_bytes();
        bytes.extend_from_slice(body);
        self.write_raw(name, &bytes)
    }

    pub fn write_csv(&self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<PathBuf, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let csv_err = |e: csv::Error| CliError::Internal(format!("csv: {e}"));
        w.write_record(header).map_err(csv_err)?;
        for r in rows {
            w.write_record(r).map_err(csv_err)?;
        }
        let body = w.into_inner().map_err(|e| CliError::Internal(format!("csv: {e}")))?;
        self.write_with_header(name, &body)
    }

    fn write_raw(&self, name: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
        let p = self.path(name);
        std::fs::write(&p, bytes)?;
        Ok(p)
    }
}

/// Reads a JSON output back; `None` when the file is absent.
pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<Option<Envelope<T>>, CliError> {
    match std::fs::read_to_string(path) {
        Ok(text) => serde_json::from_str(&text).map(Some).map_err(|e| CliError::Internal(format!("{}: {e}", path.display()))),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(e.into()),
    }
}

/// CSV body of a file written by `write_with_header`, without the provenance line.
pub fn csv_body(text: &str) -> &str {
    match text.strip_prefix('#') {
        Some(rest) => rest.split_once('\n').map_or("", |(_, b)| b),
        None => text,
    }
}

/// Shortest round-tripping float representation.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}
