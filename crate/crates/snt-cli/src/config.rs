//! The TOML configuration file: an `[experiment]` table, output settings and
//! an optional `[resource]` table for phase diagrams.

use crate::CliError;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use snt_core::encodings::LatticeSpec;
use snt_core::experiment::{ExperimentError, ExperimentSpec};
use snt_core::qem::QemProtocol;
use snt_core::resource::{HardwareProfile, ObservableKind, ResourceModel};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub experiment: ExperimentSpec,
    pub output: OutputConfig,
    pub resource: Option<ResourceConfig>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// Output directory; `--out` takes precedence.
    pub dir: Option<PathBuf>,
    /// Also write raw shot records.
    pub dump_shots: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResourceConfig {
    /// Lattices as [nx, ny]; ny = 1 means a chain.
    pub lattices: Vec<[usize; 2]>,
    pub fidelities: Vec<f64>,
    pub n_trotter: usize,
    pub eps_meas: f64,
    pub shot_rate: f64,
    pub hours: f64,
    /// Defaults to one circuit per 100 shots.
    pub n_circuits: Option<f64>,
    pub observable: ObservableKind,
    pub rmse_ceiling: f64,
    pub max_cost_sq: f64,
    /// Lattice and target for the max-Trotter / required-fidelity curves.
    pub curve_lattice: [usize; 2],
    pub rmse_target: f64,
    /// Trotter depth for the required-fidelity figures.
    pub curve_n_trotter: usize,
    pub curve_protocols: Vec<QemProtocol>,
    pub max_trotter_cap: usize,
}

impl Default for ResourceConfig {
    fn default() -> Self {
        ResourceConfig {
            lattices: (2..=8).map(|n| [n, n]).collect(),
            fidelities: vec![0.99, 0.995, 0.998, 0.999, 0.9995, 0.9998, 0.9999, 0.99999],
            n_trotter: 10,
            eps_meas: 1e-3,
            shot_rate: 1000.0,
            hours: 12.0,
            n_circuits: None,
            observable: ObservableKind::Occupation,
            rmse_ceiling: 0.1,
            max_cost_sq: 1e6,
            curve_lattice: [6, 6],
            rmse_target: 0.05,
            curve_n_trotter: 15,
            curve_protocols: vec![QemProtocol::Sv, QemProtocol::Snt, QemProtocol::PecFull],
            max_trotter_cap: 1000,
        }
    }
}

impl ResourceConfig {
    pub fn hardware(&self, f_avg: f64) -> HardwareProfile {
        let n_shots = self.shot_rate * self.hours * 3600.0;
        HardwareProfile { f_avg, eps_meas: self.eps_meas, shot_rate: self.shot_rate, n_shots, n_circuits: self.n_circuits.unwrap_or(n_shots / 100.0) }
    }

    pub fn model(&self) -> ResourceModel {
        ResourceModel { observable: self.observable, rmse_ceiling: self.rmse_ceiling, max_cost_sq: self.max_cost_sq, ..ResourceModel::reference() }
    }

    pub fn lattice_specs(&self) -> Result<Vec<LatticeSpec>, CliError> {
        self.lattices.iter().map(|&[nx, ny]| LatticeSpec::new(nx, ny, true).map_err(|e| CliError::Config(format!("resource.lattices: {e}")))).collect()
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |f: &str, m: String| Err(CliError::Config(format!("resource.{f}: {m}")));
        if self.lattices.is_empty() || self.fidelities.is_empty() {
            return bad("lattices/fidelities", "grid axes must be non-empty".into());
        }
        if self.n_trotter == 0 || self.curve_n_trotter == 0 {
            return bad("n_trotter/curve_n_trotter", "must be positive".into());
        }
        if !(self.rmse_target > 0.0) || !(self.rmse_ceiling > 0.0) || !(self.max_cost_sq >= 1.0) {
            return bad("rmse_target/rmse_ceiling/max_cost_sq", "must be positive (max_cost_sq ≥ 1)".into());
        }
        if self.max_trotter_cap == 0 {
            return bad("max_trotter_cap", "must be positive".into());
        }
        if self.curve_protocols.iter().any(|p| !snt_core::resource::PROTOCOLS.contains(p)) {
            return bad("curve_protocols", "only sv, snt and pec-full are modelled".into());
        }
        for &f in &self.fidelities {
            self.hardware(f).validate().map_err(|e| CliError::Config(format!("resource: {e}")))?;
        }
        self.lattice_specs()?;
        Ok(())
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Config, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Config::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Config, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(|e| CliError::Internal(format!("config serialisation: {e}")))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.experiment.validate().map_err(|e| match e {
            ExperimentError::Invalid(m) => CliError::Config(format!("experiment.{m}")),
            other => CliError::Config(format!("experiment: {other}")),
        })?;
        if let Some(r) = &self.resource {
            r.validate()?;
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form, so equal configs hash equally
    /// whatever their formatting. Thread count and output settings do not
    /// change results and are left out.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.experiment.threads = None;
        c.output = OutputConfig::default();
        let json = serde_json::to_string(&c).expect("config serialises");
        Sha256::digest(json.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }
}
