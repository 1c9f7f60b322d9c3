//! One function per subcommand. Each writes its own files only.

use crate::config::Config;
use crate::output::{num, read_json, OutputDir};
use crate::CliError;
use serde::{Deserialize, Serialize};
use snt_core::circuits::TqgCounts;
use snt_core::classify::partition;
use snt_core::experiment::{build_circuit, prepare, run_experiment, ExperimentError, ExperimentResult};
use snt_core::encodings::LatticeSpec;
use snt_core::engine::write_shots_csv;
use snt_core::noise::{local_noise_model_with, NoiseMetrics};
use snt_core::resource::{max_trotter, phase_diagram as grid, required_fidelity, ResourceError, ResourceModel};
use std::path::PathBuf;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BuildSummary {
    pub data_qubits: usize,
    pub ancillas: usize,
    pub layers: usize,
    pub trotter_steps: usize,
    pub check_rounds: usize,
    pub rotations: usize,
    pub clifford: bool,
    pub tqg: TqgCounts,
    pub metrics: NoiseMetrics,
}

pub fn build(cfg: &Config, out: &OutputDir) -> Result<Vec<PathBuf>, CliError> {
    let spec = &cfg.experiment;
    let (_, circuit) = build_circuit(spec)?;
    let model = local_noise_model_with(&circuit, &spec.noise_config()).map_err(ExperimentError::from)?;
    let summary = BuildSummary {
        data_qubits: circuit.num_data_qubits(),
        ancillas: circuit.num_ancillas(),
        layers: circuit.num_layers(),
        trotter_steps: circuit.num_steps(),
        check_rounds: circuit.num_rounds(),
        rotations: circuit.num_rotations(),
        clifford: circuit.is_clifford(),
        tqg: circuit.count_tqgs(),
        metrics: model.metrics(&circuit).map_err(ExperimentError::from)?,
    };
    Ok(vec![out.write_with_header("circuit.ir", circuit.to_ir().as_bytes())?, out.write_json("build.json", &summary)?])
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassifySummary {
    pub r_ps: f64,
    pub r_pp: f64,
    pub r_undetectable: f64,
    pub ratios_defined: bool,
    pub total_eta: f64,
    pub metrics: NoiseMetrics,
}

pub fn classify(cfg: &Config, out: &OutputDir) -> Result<Vec<PathBuf>, CliError> {
    let spec = &cfg.experiment;
    let (_, circuit) = build_circuit(spec)?;
    let model = local_noise_model_with(&circuit, &spec.noise_config()).map_err(ExperimentError::from)?;
    let part = partition(&circuit, &model).map_err(ExperimentError::from)?;
    let mut body = Vec::new();
    part.write_csv(&model, &mut body).map_err(ExperimentError::from)?;
    let summary = ClassifySummary {
        r_ps: part.r_ps,
        r_pp: part.r_pp,
        r_undetectable: if part.ratios_defined { 1.0 - part.r() } else { 0.0 },
        ratios_defined: part.ratios_defined,
        total_eta: part.total_eta(),
        metrics: model.metrics(&circuit).map_err(ExperimentError::from)?,
    };
    Ok(vec![out.write_with_header("classification.csv", &body)?, out.write_json("classify.json", &summary)?])
}

fn simulate_in_memory(cfg: &Config, out: &OutputDir) -> Result<(ExperimentResult, Vec<PathBuf>), CliError> {
    let prep = prepare(&cfg.experiment)?;
    let (res, batches) = run_experiment(&cfg.experiment, &prep)?;
    let mut files = Vec::new();
    if cfg.output.dump_shots {
        for b in &batches {
            let mut body = Vec::new();
            write_shots_csv(&b.records, &mut body).map_err(ExperimentError::from)?;
            files.push(out.write_with_header(&format!("shots_{}.csv", b.label), &body)?);
        }
    }
    Ok((res, files))
}

pub fn simulate(cfg: &Config, out: &OutputDir) -> Result<Vec<PathBuf>, CliError> {
    let (res, mut files) = simulate_in_memory(cfg, out)?;
    let mut rows = Vec::new();
    for p in &res.protocols {
        for (i, o) in p.estimate.observables.iter().enumerate() {
            rows.push(vec![
                p.estimate.protocol.name().to_string(),
                res.observable_names[i].clone(),
                num(o.mean),
                num(o.variance),
                num(res.reference[i]),
                o.valid.to_string(),
            ]);
        }
    }
    files.push(out.write_csv("statistics.csv", &["protocol", "observable", "mean", "variance", "reference", "valid"], &rows)?);
    files.push(out.write_json("simulate.json", &res)?);
    Ok(files)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProtocolSummary {
    pub protocol: String,
    pub theta: f64,
    pub var_theta: f64,
    pub bias_resolved: bool,
    pub rejection: f64,
    pub c_ps: f64,
    pub c_pp: f64,
    pub c_pec: f64,
    pub c_total: f64,
    pub beta: Option<f64>,
    pub rmse: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EstimateSummary {
    /// Whether the statistics came from `simulate.json` rather than a fresh run.
    pub from_statistics_file: bool,
    pub metrics: NoiseMetrics,
    pub r_ps: f64,
    pub r_pp: f64,
    pub protocols: Vec<ProtocolSummary>,
}

/// Uses `simulate.json` from the output directory when it was produced with
/// the same configuration, otherwise simulates in memory.
pub fn estimate(cfg: &Config, out: &OutputDir) -> Result<Vec<PathBuf>, CliError> {
    let prior = read_json::<ExperimentResult>(&out.path("simulate.json"))?.filter(|e| e.provenance.config_hash == out.provenance.config_hash);
    let (res, from_file, mut files) = match prior {
        Some(e) => (e.result, true, Vec::new()),
        None => {
            let (r, f) = simulate_in_memory(cfg, out)?;
            (r, false, f)
        }
    };
    let mut rows = Vec::new();
    let mut protocols = Vec::new();
    for p in &res.protocols {
        let name = p.estimate.protocol.name().to_string();
        for (i, t) in p.bias.theta_i.iter().enumerate() {
            rows.push(vec![name.clone(), res.observable_names[i].clone(), num(*t), num(p.estimate.observables[i].variance)]);
        }
        protocols.push(ProtocolSummary {
            protocol: name,
            theta: p.bias.theta,
            var_theta: p.bias.var_theta,
            bias_resolved: p.bias.resolved(2.0),
            rejection: p.estimate.rejection,
            c_ps: p.cost.c_ps,
            c_pp: p.cost.c_pp,
            c_pec: p.cost.c_pec,
            c_total: p.cost.c_total,
            beta: p.cost.beta,
            rmse: p.rmse,
        });
    }
    files.push(out.write_csv("estimate.csv", &["protocol", "observable", "theta_i", "variance"], &rows)?);
    let summary = EstimateSummary { from_statistics_file: from_file, metrics: res.metrics, r_ps: res.r_ps, r_pp: res.r_pp, protocols };
    files.push(out.write_json("estimate.json", &summary)?);
    Ok(files)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FidelityCurvePoint {
    pub protocol: String,
    /// `None` when the target is out of reach even with perfect gates.
    pub required_f_avg: Option<f64>,
    pub encoding: Option<String>,
    pub check_rounds: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PhaseManifest {
    pub lattices: Vec<[usize; 2]>,
    pub fidelities: Vec<f64>,
    pub n_trotter: usize,
    pub n_shots: f64,
    pub n_circuits: f64,
    pub model: ResourceModel,
    pub curve_lattice: [usize; 2],
    pub curve_n_trotter: usize,
    pub rmse_target: f64,
    pub required_fidelity: Vec<FidelityCurvePoint>,
}

pub fn phase_diagram(cfg: &Config, out: &OutputDir) -> Result<Vec<PathBuf>, CliError> {
    let rc = cfg.resource.clone().unwrap_or_default();
    let model = rc.model();
    let lattices = rc.lattice_specs()?;
    let hw = rc.hardware(rc.fidelities[0]);
    let cells = grid(&lattices, &rc.fidelities, rc.n_trotter, &hw, &model)?;
    let opt = |x: Option<String>| x.unwrap_or_default();
    let rows: Vec<Vec<String>> = cells
        .iter()
        .map(|c| {
            let b = c.best.as_ref();
            vec![
                c.nx.to_string(),
                c.ny.to_string(),
                c.n_sites.to_string(),
                num(c.f_avg),
                num(c.n_circuits),
                opt(b.map(|b| b.encoding.name().to_string())),
                opt(b.map(|b| b.protocol.name().to_string())),
                opt(b.map(|b| num(b.rmse))),
                opt(b.map(|b| num(b.bias_sq))),
                opt(b.map(|b| num(b.variance))),
                opt(b.map(|b| num(b.cost))),
                opt(b.map(|b| num(b.csp))),
                serde_json::to_value(c.limiting).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default(),
            ]
        })
        .collect();
    let header = ["nx", "ny", "n_sites", "f_avg", "n_circuits", "encoding", "protocol", "rmse", "bias_sq", "variance", "cost", "csp", "limiting"];
    let mut files = vec![out.write_csv("phase_diagram.csv", &header, &rows)?];

    let [cx, cy] = rc.curve_lattice;
    let curve_lat = LatticeSpec::new(cx, cy, true).map_err(|e| CliError::Config(format!("resource.curve_lattice: {e}")))?;
    let mut curve_rows = Vec::new();
    for &p in &rc.curve_protocols {
        for &f in &rc.fidelities {
            let r = max_trotter(&curve_lat, p, rc.rmse_target, &rc.hardware(f), &model, rc.max_trotter_cap)?;
            let b = r.best.as_ref();
            curve_rows.push(vec![
                p.name().to_string(),
                num(f),
                r.steps.to_string(),
                r.unbounded.to_string(),
                opt(b.map(|b| b.encoding.name().to_string())),
                opt(b.map(|b| b.check_rounds.to_string())),
                opt(b.map(|b| num(b.rmse))),
            ]);
        }
    }
    files.push(out.write_csv("max_trotter.csv", &["protocol", "f_avg", "max_trotter", "unbounded", "encoding", "check_rounds", "rmse"], &curve_rows)?);

    let mut required = Vec::new();
    for &p in &rc.curve_protocols {
        let point = match required_fidelity(&curve_lat, rc.curve_n_trotter, p, rc.rmse_target, &hw, &model) {
            Ok(r) => FidelityCurvePoint {
                protocol: p.name().into(),
                required_f_avg: Some(r.f_avg),
                encoding: Some(r.best.encoding.name().into()),
                check_rounds: Some(r.best.check_rounds),
            },
            Err(ResourceError::Unreachable { .. }) => FidelityCurvePoint { protocol: p.name().into(), required_f_avg: None, encoding: None, check_rounds: None },
            Err(e) => return Err(e.into()),
        };
        required.push(point);
    }
    let manifest = PhaseManifest {
        lattices: rc.lattices.clone(),
        fidelities: rc.fidelities.clone(),
        n_trotter: rc.n_trotter,
        n_shots: hw.n_shots,
        n_circuits: hw.n_circuits,
        model,
        curve_lattice: rc.curve_lattice,
        curve_n_trotter: rc.curve_n_trotter,
        rmse_target: rc.rmse_target,
        required_fidelity: required,
    };
    files.push(out.write_json("phase_diagram.json", &manifest)?);
    Ok(files)
}
