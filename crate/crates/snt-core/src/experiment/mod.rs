//! End-to-end runs: build the circuit for an encoding, attach the local noise
//! model, sample mitigation circuits, simulate and reduce to estimates,
//! squared bias and cost.

use crate::circuits::{trotterize, CircuitError, FhmParams, LayeredCircuit, Placement};
use crate::classify::{partition, ClassifyError, NoisePartition};
use crate::encodings::{build_encoding, EncodingError, EncodingInstance, EncodingKind, LatticeSpec, ObservableLabel};
use crate::engine::{alternating_occupation, prepare_initial_state, BackendKind, Engine, EngineConfig, EngineError, InitialState, ShotRecord};
use crate::noise::{local_noise_model_with, LocalNoiseConfig, NoiseError, NoiseMetrics, NoiseModel};
use crate::pauli::PauliOperator;
use crate::qem::{
    build_quasiprobability, estimate, sample_instances, EstimateOptions, MeasurementLayout, PpAllocation, ProtocolEstimate,
    QemError, QemProtocol, SampledCircuits, SamplingStrategy, ShotBudget,
};
use crate::rng::derive_seed;
use crate::stats::{cost_breakdown, rmse_avg, squared_bias, BiasEstimate, CostBreakdown, StatsError};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid experiment: {0}")]
    Invalid(String),
    #[error(transparent)]
    Encoding(#[from] EncodingError),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Noise(#[from] NoiseError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Qem(#[from] QemError),
    #[error(transparent)]
    Stats(#[from] StatsError),
}

impl ExperimentError {
    /// Failures that come from the data (everything rejected, empty PP
    /// projector) rather than from a malformed request.
    pub fn is_infeasible(&self) -> bool {
        matches!(
            self,
            ExperimentError::Qem(QemError::AllRejected)
                | ExperimentError::Stats(StatsError::AllRejected)
                | ExperimentError::Stats(StatsError::ProjectorMean(_))
        )
    }
}

/// Everything that determines a run. Serialises to the `[experiment]` table
/// of the CLI configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSpec {
    pub encoding: EncodingKind,
    pub lattice: LatticeSpec,
    pub fhm: FhmParams,
    /// Drop the rotations so the fast Pauli-frame backend applies.
    pub clifford: bool,
    /// Average two-qubit gate fidelity.
    pub fidelity: f64,
    pub two_qubit_fraction: f64,
    pub meas_error: f64,
    pub check_noise: bool,
    pub check_rounds: usize,
    pub placement: Placement,
    pub observables: ObservableLabel,
    pub protocols: Vec<QemProtocol>,
    pub n_shots: usize,
    pub n_circuits: usize,
    pub sampling: SamplingStrategy,
    pub pp_allocation: PpAllocation,
    /// `None` picks the Pauli-frame backend for Clifford circuits and the
    /// statevector otherwise.
    pub backend: Option<BackendKind>,
    pub threads: Option<usize>,
    pub seed: u64,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            encoding: EncodingKind::Jw,
            lattice: LatticeSpec::chain(2),
            fhm: FhmParams::default(),
            clifford: false,
            fidelity: 0.995,
            two_qubit_fraction: 0.8,
            meas_error: 0.0,
            check_noise: true,
            check_rounds: 1,
            placement: Placement::Even,
            observables: ObservableLabel::O1,
            protocols: QemProtocol::ALL.to_vec(),
            n_shots: 150_000,
            n_circuits: 150_000,
            sampling: SamplingStrategy::Plain,
            pp_allocation: PpAllocation::Optimal,
            backend: None,
            threads: None,
            seed: 1,
        }
    }
}

impl ExperimentSpec {
    /// Field-level validation, run before any circuit is built.
    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |f: &str, m: String| Err(ExperimentError::Invalid(format!("{f}: {m}")));
        if self.lattice.nx == 0 || self.lattice.ny == 0 {
            return bad("lattice", "sizes must be positive".into());
        }
        if let Err(e) = self.fhm.validate() {
            return bad("fhm", e.to_string());
        }
        if !(self.fidelity > 0.25 && self.fidelity <= 1.0) {
            return bad("fidelity", format!("{} is outside (0.25, 1]", self.fidelity));
        }
        if !(0.0..=1.0).contains(&self.two_qubit_fraction) {
            return bad("two_qubit_fraction", format!("{} is not a probability", self.two_qubit_fraction));
        }
        if !(0.0..0.5).contains(&self.meas_error) {
            return bad("meas_error", format!("{} is outside [0, 0.5)", self.meas_error));
        }
        if self.check_rounds > self.fhm.n_trotter {
            return bad("check_rounds", format!("{} rounds for {} Trotter steps", self.check_rounds, self.fhm.n_trotter));
        }
        if self.protocols.is_empty() {
            return bad("protocols", "at least one protocol is needed".into());
        }
        if let Err(e) = (ShotBudget { n_shots: self.n_shots, n_circuits: self.n_circuits, strategy: self.sampling }).validate() {
            return bad("n_shots/n_circuits", e.to_string());
        }
        if let PpAllocation::Custom { n_a, n_b } = self.pp_allocation {
            if !(n_a > 0.0 && n_b > 0.0) {
                return bad("pp_allocation", "group sizes must be positive".into());
            }
        }
        if self.threads == Some(0) {
            return bad("threads", "must be at least 1".into());
        }
        if !self.clifford && self.backend == Some(BackendKind::PauliFrameClifford) {
            return bad("backend", "the Pauli-frame backend needs clifford = true".into());
        }
        Ok(())
    }

    pub fn backend_kind(&self) -> BackendKind {
        self.backend.unwrap_or(if self.clifford { BackendKind::PauliFrameClifford } else { BackendKind::DenseStatevector })
    }

    pub fn engine_config(&self) -> EngineConfig {
        let mut cfg = EngineConfig::new(self.backend_kind());
        cfg.threads = self.threads;
        cfg
    }

    pub fn noise_config(&self) -> LocalNoiseConfig {
        LocalNoiseConfig {
            fidelity: self.fidelity,
            two_qubit_fraction: self.two_qubit_fraction,
            check_noise: self.check_noise,
            meas_error: self.meas_error,
        }
    }
}

/// Builds the (optionally Clifford) Trotter circuit with its parity checks.
pub fn build_circuit(spec: &ExperimentSpec) -> Result<(EncodingInstance, LayeredCircuit), ExperimentError> {
    let enc = build_encoding(spec.encoding, spec.lattice)?;
    let mut c = trotterize(&enc, &spec.fhm)?;
    if spec.check_rounds > 0 && !enc.local_stabilizers().is_empty() {
        c = c.insert_parity_checks(spec.check_rounds, &spec.placement)?;
    }
    if spec.clifford {
        c = c.clifford_round();
    }
    Ok((enc, c))
}

/// Circuit, noise and reference values shared by every protocol of a run.
pub struct PreparedExperiment {
    pub encoding: EncodingInstance,
    pub circuit: LayeredCircuit,
    pub model: NoiseModel,
    pub partition: NoisePartition,
    pub initial: InitialState,
    /// Measured Paulis: the observable set, then the signed global symmetries.
    pub measured: Vec<PauliOperator>,
    pub layout: MeasurementLayout,
    /// Noiseless values of the reported observables.
    pub reference: Vec<f64>,
    pub metrics: NoiseMetrics,
}

pub fn prepare(spec: &ExperimentSpec) -> Result<PreparedExperiment, ExperimentError> {
    spec.validate()?;
    let (enc, circuit) = build_circuit(spec)?;
    let model = local_noise_model_with(&circuit, &spec.noise_config())?;
    let part = partition(&circuit, &model)?;
    let initial = prepare_initial_state(&enc, &alternating_occupation(&enc))?;
    let set = enc.observable_set(&spec.observables);
    let k = set.len();
    let mut measured = set.paulis;
    measured.extend(initial.symmetries().iter().cloned());
    let occupations = spec.observables == ObservableLabel::O1;
    let layout = MeasurementLayout { observables: (0..k).collect(), globals: (k..measured.len()).collect(), occupations };
    let ideal = Engine::new(&circuit, &model, &initial, &measured, spec.engine_config())?.noiseless_expectations();
    let reference = ideal[..k].iter().map(|&v| if occupations { (1.0 - v) / 2.0 } else { v }).collect();
    let metrics = model.metrics(&circuit)?;
    Ok(PreparedExperiment { encoding: enc, circuit, model, partition: part, initial, measured, layout, reference, metrics })
}

/// One protocol's outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolResult {
    pub estimate: ProtocolEstimate,
    pub bias: BiasEstimate,
    pub cost: CostBreakdown,
    /// √(mean of Θ_i⁺ + Var_i), with negative Θ_i clipped at zero.
    pub rmse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub metrics: NoiseMetrics,
    pub r_ps: f64,
    pub r_pp: f64,
    pub observable_names: Vec<String>,
    pub reference: Vec<f64>,
    pub protocols: Vec<ProtocolResult>,
}

impl ExperimentResult {
    pub fn get(&self, p: QemProtocol) -> Option<&ProtocolResult> {
        self.protocols.iter().find(|r| r.estimate.protocol == p)
    }
}

/// Shot records of one simulated batch, kept for `--dump-shots`.
pub struct ShotBatch {
    pub label: String,
    pub circuits: SampledCircuits,
    pub records: Vec<ShotRecord>,
}

fn summarize(prep: &PreparedExperiment, est: ProtocolEstimate) -> Result<ProtocolResult, ExperimentError> {
    let means: Vec<f64> = est.observables.iter().map(|o| o.mean).collect();
    let vars: Vec<f64> = est.observables.iter().map(|o| o.variance).collect();
    let bias = squared_bias(&means, &vars, &prep.reference)?;
    let pm = est.projector_mean;
    let rejection = est.rejection;
    let cost = cost_breakdown(rejection, pm, est.c_pec, prep.metrics.lambda)?;
    let items: Vec<(f64, f64)> = bias.theta_i.iter().zip(&vars).map(|(&t, &v)| (t.max(0.0), v)).collect();
    let rmse = rmse_avg(&items)?;
    Ok(ProtocolResult { estimate: est, bias, cost, rmse })
}

/// Simulates every requested protocol. Unmitigated, PS and SV share one batch
/// of unmodified circuits; PEC and SNT each get their own sampled circuits.
pub fn run_experiment(spec: &ExperimentSpec, prep: &PreparedExperiment) -> Result<(ExperimentResult, Vec<ShotBatch>), ExperimentError> {
    let engine = Engine::new(&prep.circuit, &prep.model, &prep.initial, &prep.measured, spec.engine_config())?;
    let opts = EstimateOptions { pp_allocation: spec.pp_allocation };
    let mut batches = Vec::new();
    let mut results = Vec::new();
    let needs_plain = spec.protocols.iter().any(|p| p.pec_mode().is_none());
    let mut plain_idx = None;
    if needs_plain {
        let circuits = SampledCircuits::unmodified(spec.n_shots, spec.n_circuits.min(spec.n_shots))?;
        let records = engine.run(&circuits.instances, derive_seed(spec.seed, "plain"))?;
        plain_idx = Some(batches.len());
        batches.push(ShotBatch { label: "plain".into(), circuits, records });
    }
    for &p in &spec.protocols {
        let idx = match p.pec_mode() {
            None => plain_idx.expect("plain batch exists"),
            Some(mode) => {
                let plan = build_quasiprobability(&prep.model, &prep.partition, mode)?;
                let budget = ShotBudget { n_shots: spec.n_shots, n_circuits: spec.n_circuits, strategy: spec.sampling };
                let circuits = sample_instances(&plan, &budget, derive_seed(spec.seed, p.name()))?;
                let records = engine.run(&circuits.instances, derive_seed(spec.seed, &format!("{}-shots", p.name())))?;
                batches.push(ShotBatch { label: p.name().into(), circuits, records });
                batches.len() - 1
            }
        };
        let b = &batches[idx];
        let est = estimate(p, &b.records, &prep.layout, &b.circuits, &opts)?;
        results.push(summarize(prep, est)?);
    }
    let names = prep.encoding.observable_set(&spec.observables).names;
    let res = ExperimentResult {
        metrics: prep.metrics,
        r_ps: prep.partition.r_ps,
        r_pp: prep.partition.r_pp,
        observable_names: names,
        reference: prep.reference.clone(),
        protocols: results,
    };
    Ok((res, batches))
}

#[cfg(test)]
mod tests;
