//! Monte Carlo shot execution with a Pauli-frame backend for Clifford
//! circuits and a dense statevector backend for everything else.

mod clifford;
mod statevector;

use crate::circuits::LayeredCircuit;
use crate::encodings::{EncodingError, EncodingInstance};
use crate::noise::{FaultDraw, NoiseModel};
use crate::pauli::{Letter, PauliError, PauliOperator, StabilizerState};
use crate::rng::shot_rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("the Clifford backend needs every rotation angle to be zero")]
    NotClifford,
    #[error("{0} qubits exceed the statevector cap of {1}")]
    TooManyQubits(usize, usize),
    #[error("observables {0} and {1} do not commute")]
    NonCommuting(usize, usize),
    #[error("observable {0} acts on {1} qubits, data register has {2}")]
    ObservableSize(usize, usize, usize),
    #[error("initial state: {0}")]
    InitialState(String),
    #[error("noise model does not match the circuit")]
    ModelMismatch,
    #[error("instance {0} references missing channel entry ({1}, {2})")]
    BadInsertion(u64, usize, usize),
    #[error("thread pool: {0}")]
    Threads(String),
    #[error(transparent)]
    Pauli(#[from] PauliError),
    #[error(transparent)]
    Encoding(#[from] EncodingError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BackendKind {
    PauliFrameClifford,
    DenseStatevector,
}

/// Whether faults are redrawn for every shot or once per circuit instance.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FaultSampling {
    #[default]
    PerShot,
    PerInstance,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    pub backend: BackendKind,
    /// `Some(1)` runs on the calling thread; `None` uses the global pool.
    pub threads: Option<usize>,
    pub max_statevector_qubits: usize,
    pub fault_sampling: FaultSampling,
}

impl EngineConfig {
    pub fn new(backend: BackendKind) -> Self {
        EngineConfig { backend, threads: None, max_statevector_qubits: 20, fault_sampling: FaultSampling::PerShot }
    }
}

/// Encoded product state on the data register.
#[derive(Clone, Debug, PartialEq)]
pub struct InitialState {
    generators: Vec<PauliOperator>,
    /// Global symmetries, signed so the state has eigenvalue +1.
    symmetries: Vec<PauliOperator>,
}

impl InitialState {
    /// From a complete set of commuting stabilizer generators on the data qubits.
    pub fn from_generators(generators: Vec<PauliOperator>, globals: &[PauliOperator]) -> Result<Self, EngineError> {
        let st = StabilizerState::new(generators.clone()).map_err(|e| EngineError::InitialState(e.to_string()))?;
        let symmetries = globals
            .iter()
            .map(|g| match st.expectation(g)? {
                1 => Ok(g.clone()),
                -1 => Ok(g.negated()),
                _ => Err(EngineError::InitialState(format!("state is not an eigenstate of {g}"))),
            })
            .collect::<Result<_, EngineError>>()?;
        Ok(InitialState { generators, symmetries })
    }

    pub fn generators(&self) -> &[PauliOperator] {
        &self.generators
    }

    pub fn num_qubits(&self) -> usize {
        self.generators.len()
    }

    pub fn symmetries(&self) -> &[PauliOperator] {
        &self.symmetries
    }
}

/// Encoded Fock state: local stabilizers at +1 and `(1-V_i)/2` equal to
/// `occupation[i]`.
pub fn prepare_initial_state(enc: &EncodingInstance, occupation: &[bool]) -> Result<InitialState, EngineError> {
    let gens = enc.fock_state_generators(occupation)?;
    InitialState::from_generators(gens, enc.global_stabilizers())
}

/// Alternating `|↑↓↑↓…⟩`: even sites hold a spin-up fermion, odd sites a spin-down one.
pub fn alternating_occupation(enc: &EncodingInstance) -> Vec<bool> {
    let lat = enc.lattice();
    let mut occ = vec![false; enc.num_modes()];
    for site in 0..lat.n_sites() {
        let spin = if lat.spinful { site % 2 } else { 0 };
        if !lat.spinful && site % 2 == 1 {
            continue;
        }
        occ[lat.mode(site, spin)] = true;
    }
    occ
}

/// A sampled circuit variant: Paulis inserted noiselessly after layer Cliffords.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CircuitInstance {
    pub id: u64,
    /// PEC sign, ±1.
    pub sign: i8,
    /// (layer, channel entry) of the noise model.
    pub insertions: Vec<(usize, usize)>,
    /// Arbitrary extra Paulis (layer, Pauli) on all qubits.
    pub paulis: Vec<(usize, PauliOperator)>,
    pub shots: usize,
}

impl CircuitInstance {
    pub fn plain(id: u64, shots: usize) -> Self {
        CircuitInstance { id, sign: 1, insertions: Vec::new(), paulis: Vec::new(), shots }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotRecord {
    pub instance: u64,
    pub shot: u64,
    pub sign: i8,
    /// One bit per ancilla in measurement order; `true` means the check fired.
    pub checks: Vec<bool>,
    /// ±1 per requested observable.
    pub outcomes: Vec<i8>,
    /// Cleared by post-selection.
    pub accepted: bool,
}

impl ShotRecord {
    pub fn any_fired(&self) -> bool {
        self.checks.iter().any(|&c| c)
    }
}

/// Backend-specific per-shot work.
trait Backend: Sync {
    /// Check bits then observable outcomes for one shot, with faults and
    /// insertions as (layer, Pauli-on-all-qubits) or channel indices.
    fn shot(&self, inst: &PreparedInstance, draw: &FaultDraw, rng: &mut rand_chacha::ChaCha8Rng) -> (Vec<bool>, Vec<i8>);
    fn noiseless_expectations(&self) -> Vec<f64>;
}

/// Instance data resolved against the noise model.
pub(crate) struct PreparedInstance {
    pub id: u64,
    pub sign: i8,
    pub insertions: Vec<(usize, usize)>,
    pub paulis: Vec<(usize, PauliOperator)>,
    pub shots: usize,
}

pub struct Engine {
    backend: Box<dyn Backend + Send>,
    model: NoiseModel,
    cfg: EngineConfig,
    n_checks: usize,
    n_obs: usize,
}

impl Engine {
    /// Observables live on the data register and must pairwise commute.
    pub fn new(
        circuit: &LayeredCircuit,
        model: &NoiseModel,
        initial: &InitialState,
        observables: &[PauliOperator],
        cfg: EngineConfig,
    ) -> Result<Self, EngineError> {
        model.check_matches(circuit).map_err(|_| EngineError::ModelMismatch)?;
        let nd = circuit.num_data_qubits();
        if initial.num_qubits() != nd {
            return Err(EngineError::InitialState(format!("{} generators for {nd} data qubits", initial.num_qubits())));
        }
        for (i, o) in observables.iter().enumerate() {
            if o.num_qubits() != nd {
                return Err(EngineError::ObservableSize(i, o.num_qubits(), nd));
            }
            for (j, p) in observables[..i].iter().enumerate() {
                if o.anticommutes(p) {
                    return Err(EngineError::NonCommuting(j, i));
                }
            }
        }
        let n = circuit.num_qubits();
        let mut measured: Vec<PauliOperator> = circuit.ancillas().iter().map(|&a| PauliOperator::single(n, a, Letter::Z)).collect();
        measured.extend(observables.iter().map(|o| circuit.on_all_qubits(o)));
        let backend: Box<dyn Backend + Send> = match cfg.backend {
            BackendKind::PauliFrameClifford => {
                if !circuit.is_clifford() {
                    return Err(EngineError::NotClifford);
                }
                Box::new(clifford::FrameBackend::new(circuit, model, initial, measured)?)
            }
            BackendKind::DenseStatevector => {
                if n > cfg.max_statevector_qubits {
                    return Err(EngineError::TooManyQubits(n, cfg.max_statevector_qubits));
                }
                Box::new(statevector::DenseBackend::new(circuit, model, initial, measured)?)
            }
        };
        Ok(Engine { backend, model: model.clone(), cfg, n_checks: circuit.ancillas().len(), n_obs: observables.len() })
    }

    pub fn num_checks(&self) -> usize {
        self.n_checks
    }

    pub fn num_observables(&self) -> usize {
        self.n_obs
    }

    /// Exact noiseless `⟨O⟩` for each observable.
    pub fn noiseless_expectations(&self) -> Vec<f64> {
        self.backend.noiseless_expectations()[self.n_checks..].to_vec()
    }

    fn prepare(&self, inst: &CircuitInstance) -> Result<PreparedInstance, EngineError> {
        for &(l, e) in &inst.insertions {
            if l >= self.model.num_layers() || e >= self.model.channel(l).len() {
                return Err(EngineError::BadInsertion(inst.id, l, e));
            }
        }
        Ok(PreparedInstance {
            id: inst.id,
            sign: inst.sign,
            insertions: inst.insertions.clone(),
            paulis: inst.paulis.clone(),
            shots: inst.shots,
        })
    }

    fn run_one(&self, inst: &PreparedInstance, shot: u64, seed: u64, draw: &mut FaultDraw) -> ShotRecord {
        let mut rng = shot_rng(seed, inst.id, shot);
        match self.cfg.fault_sampling {
            FaultSampling::PerShot => self.model.sample_into(&mut rng, draw),
            FaultSampling::PerInstance => {
                let mut frng = shot_rng(seed, inst.id, u64::MAX - 1);
                self.model.sample_into(&mut frng, draw);
                let mut fresh = FaultDraw::default();
                self.model.sample_into(&mut rng, &mut fresh);
                draw.meas_flips = fresh.meas_flips;
            }
        }
        let (checks, outcomes) = self.backend.shot(inst, draw, &mut rng);
        ShotRecord { instance: inst.id, shot, sign: inst.sign, checks, outcomes, accepted: true }
    }

    /// Runs every instance for its shot count. Records come back ordered by
    /// instance then shot, identical for any thread count.
    pub fn run(&self, instances: &[CircuitInstance], seed: u64) -> Result<Vec<ShotRecord>, EngineError> {
        let prepared: Vec<PreparedInstance> = instances.iter().map(|i| self.prepare(i)).collect::<Result<_, _>>()?;
        const CHUNK: usize = 2048;
        let mut work: Vec<(usize, u64, u64)> = Vec::new();
        for (k, p) in prepared.iter().enumerate() {
            let mut s = 0;
            while s < p.shots as u64 {
                let e = (s + CHUNK as u64).min(p.shots as u64);
                work.push((k, s, e));
                s = e;
            }
        }
        let do_chunk = |&(k, s, e): &(usize, u64, u64)| -> Vec<ShotRecord> {
            let mut draw = FaultDraw::default();
            (s..e).map(|shot| self.run_one(&prepared[k], shot, seed, &mut draw)).collect()
        };
        let chunks: Vec<Vec<ShotRecord>> = match self.cfg.threads {
            Some(1) => work.iter().map(do_chunk).collect(),
            Some(t) => {
                let pool = rayon::ThreadPoolBuilder::new().num_threads(t).build().map_err(|e| EngineError::Threads(e.to_string()))?;
                pool.install(|| work.par_iter().map(do_chunk).collect())
            }
            None => work.par_iter().map(do_chunk).collect(),
        };
        Ok(chunks.into_iter().flatten().collect())
    }
}

/// Convenience wrapper building an [`Engine`] and running it.
pub fn run(
    circuit: &LayeredCircuit,
    model: &NoiseModel,
    initial: &InitialState,
    observables: &[PauliOperator],
    instances: &[CircuitInstance],
    seed: u64,
    cfg: EngineConfig,
) -> Result<Vec<ShotRecord>, EngineError> {
    Engine::new(circuit, model, initial, observables, cfg)?.run(instances, seed)
}

/// Raw shots as CSV: `instance,shot,sign,checks,outcomes` with bit strings.
pub fn write_shots_csv<W: Write>(records: &[ShotRecord], mut w: W) -> Result<(), EngineError> {
    writeln!(w, "instance,shot,sign,checks,outcomes")?;
    for r in records {
        let checks: String = r.checks.iter().map(|&c| if c { '1' } else { '0' }).collect();
        let outs: String = r.outcomes.iter().map(|&o| if o < 0 { '1' } else { '0' }).collect();
        writeln!(w, "{},{},{},{checks},{outs}", r.instance, r.shot, r.sign)?;
    }
    Ok(())
}

/// GF(2) decomposition of Paulis into an incrementally built generator set.
pub(crate) struct Gf2Tracker {
    rows: Vec<(PauliOperator, Vec<u64>)>,
    pivots: Vec<usize>,
    n_gens: usize,
}

impl Gf2Tracker {
    pub fn new() -> Self {
        Gf2Tracker { rows: Vec::new(), pivots: Vec::new(), n_gens: 0 }
    }

    fn bit(p: &PauliOperator, col: usize) -> bool {
        let n = p.num_qubits();
        if col < n {
            p.x_bit(col)
        } else {
            p.z_bit(col - n)
        }
    }

    /// Returns `Ok(index)` for a new generator, or `Err(mask)` listing the
    /// existing generators whose product has the same letters as `p`.
    pub fn insert(&mut self, p: &PauliOperator) -> Result<usize, Vec<u64>> {
        let mut v = p.unsigned();
        let mut mask = vec![0u64; self.n_gens / 64 + 1];
        for ((row, rmask), &piv) in self.rows.iter().zip(&self.pivots) {
            if Self::bit(&v, piv) {
                v.xor_letters(row);
                for (m, r) in mask.iter_mut().zip(rmask) {
                    *m ^= r;
                }
            }
        }
        if v.is_trivial() {
            return Err(mask);
        }
        let idx = self.n_gens;
        self.n_gens += 1;
        if mask.len() <= idx / 64 {
            mask.resize(idx / 64 + 1, 0);
        }
        mask[idx / 64] ^= 1 << (idx % 64);
        let n2 = 2 * v.num_qubits();
        let piv = (0..n2).find(|&c| Self::bit(&v, c)).expect("non-trivial");
        for ((row, rmask), _) in self.rows.iter_mut().zip(&self.pivots) {
            if Self::bit(row, piv) {
                row.xor_letters(&v);
                if rmask.len() < mask.len() {
                    rmask.resize(mask.len(), 0);
                }
                for (r, m) in rmask.iter_mut().zip(&mask) {
                    *r ^= m;
                }
            }
        }
        self.rows.push((v, mask));
        self.pivots.push(piv);
        Ok(idx)
    }
}
