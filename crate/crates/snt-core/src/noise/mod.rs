//! Per-layer Pauli channels derived from a two-qubit-gate fidelity,
//! circuit-level metrics and fault sampling.

mod text;

use crate::circuits::LayeredCircuit;
use crate::pauli::{CliffordTableau, Letter, PauliOperator};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NoiseError {
    #[error("average gate fidelity {0} outside (0.25, 1]")]
    Fidelity(f64),
    #[error("invalid probability {0}")]
    Probability(f64),
    #[error("noise model has {model} layers, circuit has {circuit}")]
    Mismatch { model: usize, circuit: usize },
    #[error("channel entry {0} is the identity")]
    Identity(String),
    #[error("duplicate channel entry {0}")]
    Duplicate(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// `𝓔(ρ) = (1-ε) ρ + Σ p_i P_i ρ P_i` with `ε = Σ p_i`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LayerNoiseChannel {
    entries: Vec<(PauliOperator, f64)>,
}

impl LayerNoiseChannel {
    pub fn empty() -> Self {
        LayerNoiseChannel::default()
    }

    /// Validates that Paulis are distinct, non-identity and unsigned, and that the total mass is below one.
    pub fn new(entries: Vec<(PauliOperator, f64)>) -> Result<Self, NoiseError> {
        let mut seen = std::collections::HashSet::new();
        for (p, prob) in &entries {
            if p.is_trivial() {
                return Err(NoiseError::Identity(p.to_string()));
            }
            if !(*prob > 0.0 && prob.is_finite()) {
                return Err(NoiseError::Probability(*prob));
            }
            if !seen.insert(p.unsigned()) {
                return Err(NoiseError::Duplicate(p.to_string()));
            }
        }
        let ch = LayerNoiseChannel { entries: entries.into_iter().map(|(p, q)| (p.unsigned(), q)).collect() };
        let eps = ch.epsilon();
        if eps >= 1.0 {
            return Err(NoiseError::Probability(eps));
        }
        Ok(ch)
    }

    pub fn entries(&self) -> &[(PauliOperator, f64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Total error probability.
    pub fn epsilon(&self) -> f64 {
        self.entries.iter().map(|e| e.1).sum()
    }

    /// Picks an entry given `u ∈ [0,1)`, or `None` for no error.
    fn pick(&self, mut u: f64) -> Option<usize> {
        for (i, (_, p)) in self.entries.iter().enumerate() {
            if u < *p {
                return Some(i);
            }
            u -= p;
        }
        None
    }
}

/// How the local model spreads a gate's infidelity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalNoiseConfig {
    /// Average two-qubit gate fidelity.
    pub fidelity: f64,
    /// Share of the error mass on weight-2 Paulis of the gate's pair.
    pub two_qubit_fraction: f64,
    /// Whether parity-check layers are noisy.
    pub check_noise: bool,
    /// Ancilla readout flip probability.
    pub meas_error: f64,
}

impl LocalNoiseConfig {
    pub fn new(fidelity: f64) -> Self {
        LocalNoiseConfig { fidelity, two_qubit_fraction: 0.8, check_noise: true, meas_error: 0.0 }
    }
}

/// Entanglement fidelity of a two-qubit gate with average fidelity `f_avg`.
pub fn entanglement_fidelity(f_avg: f64) -> f64 {
    (5.0 * f_avg - 1.0) / 4.0
}

/// Inverse of [`entanglement_fidelity`].
pub fn average_fidelity(f_ent: f64) -> f64 {
    (4.0 * f_ent + 1.0) / 5.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    n_qubits: usize,
    channels: Vec<LayerNoiseChannel>,
    check_layer: Vec<bool>,
    meas_error: f64,
    n_meas: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseMetrics {
    pub csp: f64,
    pub lambda: f64,
    pub lambda_prime: f64,
    pub msp: f64,
}

/// Faults drawn for one shot, as (layer, channel entry) indices.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FaultDraw {
    pub faults: Vec<(usize, usize)>,
    /// One flag per ancilla in measurement order.
    pub meas_flips: Vec<bool>,
}

impl FaultDraw {
    pub fn is_clean(&self) -> bool {
        self.faults.is_empty() && !self.meas_flips.iter().any(|&b| b)
    }
}

pub fn local_noise_model(circuit: &LayeredCircuit, f_avg: f64) -> Result<NoiseModel, NoiseError> {
    local_noise_model_with(circuit, &LocalNoiseConfig::new(f_avg))
}

pub fn local_noise_model_with(circuit: &LayeredCircuit, cfg: &LocalNoiseConfig) -> Result<NoiseModel, NoiseError> {
    if !(cfg.fidelity > 0.25 && cfg.fidelity <= 1.0) {
        return Err(NoiseError::Fidelity(cfg.fidelity));
    }
    if !(0.0..=1.0).contains(&cfg.two_qubit_fraction) {
        return Err(NoiseError::Probability(cfg.two_qubit_fraction));
    }
    if !(0.0..1.0).contains(&cfg.meas_error) {
        return Err(NoiseError::Probability(cfg.meas_error));
    }
    let f_ent = entanglement_fidelity(cfg.fidelity);
    let n = circuit.num_qubits();
    let mut channels = Vec::with_capacity(circuit.num_layers());
    for layer in circuit.layers() {
        let pairs = layer.clifford.tqg_pairs();
        if pairs.is_empty() || f_ent >= 1.0 || (layer.is_check() && !cfg.check_noise) {
            channels.push(LayerNoiseChannel::empty());
            continue;
        }
        let eps = 1.0 - f_ent.powi(pairs.len() as i32);
        let per_gate = eps / pairs.len() as f64;
        let w2 = per_gate * cfg.two_qubit_fraction / 9.0;
        let w1 = per_gate * (1.0 - cfg.two_qubit_fraction) / 6.0;
        let mut acc: HashMap<PauliOperator, f64> = HashMap::new();
        let mut order = Vec::new();
        let mut add = |p: PauliOperator, w: f64| {
            if w <= 0.0 {
                return;
            }
            match acc.get_mut(&p) {
                Some(v) => *v += w,
                None => {
                    order.push(p.clone());
                    acc.insert(p, w);
                }
            }
        };
        for &(a, b) in &pairs {
            for la in Letter::NON_IDENTITY {
                for lb in Letter::NON_IDENTITY {
                    add(PauliOperator::from_letters(n, &[(a, la), (b, lb)]).expect("in range"), w2);
                }
            }
            for q in [a, b] {
                for l in Letter::NON_IDENTITY {
                    add(PauliOperator::single(n, q, l), w1);
                }
            }
        }
        let entries = order.into_iter().map(|p| {
            let w = acc[&p];
            (p, w)
        });
        channels.push(LayerNoiseChannel { entries: entries.collect() });
    }
    Ok(NoiseModel {
        n_qubits: n,
        check_layer: circuit.layers().iter().map(|l| l.is_check()).collect(),
        channels,
        meas_error: cfg.meas_error,
        n_meas: circuit.ancillas().len(),
    })
}

impl NoiseModel {
    /// A model with explicit channels, one per circuit layer.
    pub fn from_channels(circuit: &LayeredCircuit, channels: Vec<LayerNoiseChannel>, meas_error: f64) -> Result<Self, NoiseError> {
        if channels.len() != circuit.num_layers() {
            return Err(NoiseError::Mismatch { model: channels.len(), circuit: circuit.num_layers() });
        }
        if !(0.0..1.0).contains(&meas_error) {
            return Err(NoiseError::Probability(meas_error));
        }
        Ok(NoiseModel {
            n_qubits: circuit.num_qubits(),
            check_layer: circuit.layers().iter().map(|l| l.is_check()).collect(),
            channels,
            meas_error,
            n_meas: circuit.ancillas().len(),
        })
    }

    pub fn noiseless(circuit: &LayeredCircuit) -> Self {
        let channels = vec![LayerNoiseChannel::empty(); circuit.num_layers()];
        NoiseModel::from_channels(circuit, channels, 0.0).expect("sizes match")
    }

    pub fn num_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn num_layers(&self) -> usize {
        self.channels.len()
    }

    pub fn channels(&self) -> &[LayerNoiseChannel] {
        &self.channels
    }

    pub fn channel(&self, layer: usize) -> &LayerNoiseChannel {
        &self.channels[layer]
    }

    pub fn is_check_layer(&self, layer: usize) -> bool {
        self.check_layer[layer]
    }

    pub fn meas_error(&self) -> f64 {
        self.meas_error
    }

    pub fn num_measurements(&self) -> usize {
        self.n_meas
    }

    pub fn with_meas_error(mut self, eps: f64) -> Result<Self, NoiseError> {
        if !(0.0..1.0).contains(&eps) {
            return Err(NoiseError::Probability(eps));
        }
        self.meas_error = eps;
        Ok(self)
    }

    /// Same model with check-layer channels emptied.
    pub fn without_check_noise(&self) -> Self {
        let mut m = self.clone();
        for (c, &chk) in m.channels.iter_mut().zip(&self.check_layer) {
            if chk {
                *c = LayerNoiseChannel::empty();
            }
        }
        m
    }

    pub fn check_matches(&self, circuit: &LayeredCircuit) -> Result<(), NoiseError> {
        if self.channels.len() != circuit.num_layers() || self.n_qubits != circuit.num_qubits() {
            return Err(NoiseError::Mismatch { model: self.channels.len(), circuit: circuit.num_layers() });
        }
        Ok(())
    }

    /// Error rate `λ = -ln ∏(1-ε_k)` over evolution layers.
    pub fn lambda(&self) -> f64 {
        self.channels
            .iter()
            .zip(&self.check_layer)
            .filter(|(_, &chk)| !chk)
            .map(|(c, _)| -(-c.epsilon()).ln_1p())
            .sum()
    }

    pub fn csp(&self) -> f64 {
        (-self.lambda()).exp()
    }

    pub fn msp(&self) -> f64 {
        (1.0 - self.meas_error).powi(self.n_meas as i32)
    }

    /// CSP, λ, λ' and MSP. λ' is the largest error rate accumulated between
    /// consecutive check rounds over layers whose faults reach the support of
    /// the measured stabilizers; without checks it equals λ.
    pub fn metrics(&self, circuit: &LayeredCircuit) -> Result<NoiseMetrics, NoiseError> {
        self.check_matches(circuit)?;
        let lambda = self.lambda();
        let rounds = circuit.check_rounds();
        let lambda_prime = if rounds.is_empty() {
            lambda
        } else {
            let n = circuit.num_qubits();
            let mut watched = vec![false; n];
            for s in circuit.local_stabilizers() {
                for q in s.support() {
                    watched[q] = true;
                }
            }
            let mut best: f64 = 0.0;
            let mut start = 0;
            for r in &rounds {
                let first = r.checks.iter().map(|c| c.2).min().expect("round has checks");
                let last = r.checks.iter().map(|c| c.2).max().expect("round has checks");
                let mut t = CliffordTableau::identity(n);
                let mut sum = 0.0;
                for k in (start..first).rev() {
                    if k + 1 < first {
                        t = circuit.layers()[k + 1].clifford.tableau(n).then(&t).expect("sizes match");
                    }
                    let ch = &self.channels[k];
                    if self.check_layer[k] || ch.is_empty() {
                        continue;
                    }
                    let hits = ch.entries.iter().any(|(p, _)| t.conjugate_letters(p).support().iter().any(|&q| watched[q]));
                    if hits {
                        sum += -(-ch.epsilon()).ln_1p();
                    }
                }
                best = best.max(sum);
                start = last + 1;
            }
            best
        };
        Ok(NoiseMetrics { csp: (-lambda).exp(), lambda, lambda_prime, msp: self.msp() })
    }

    /// Draws one shot's faults: each layer independently has no error with
    /// probability `1-ε_k` or entry `i` with probability `p_i`, and each
    /// readout flips with probability `ε_meas`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> FaultDraw {
        let mut d = FaultDraw::default();
        self.sample_into(rng, &mut d);
        d
    }

    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, d: &mut FaultDraw) {
        d.faults.clear();
        d.meas_flips.clear();
        for (l, ch) in self.channels.iter().enumerate() {
            if ch.is_empty() {
                continue;
            }
            if let Some(i) = ch.pick(rng.gen::<f64>()) {
                d.faults.push((l, i));
            }
        }
        if self.meas_error > 0.0 {
            d.meas_flips.extend((0..self.n_meas).map(|_| rng.gen::<f64>() < self.meas_error));
        } else {
            d.meas_flips.resize(self.n_meas, false);
        }
    }

    /// Like [`NoiseModel::sample`] but returns the Paulis themselves.
    pub fn sample_faults<R: Rng + ?Sized>(&self, rng: &mut R) -> (Vec<(usize, PauliOperator)>, Vec<bool>) {
        let d = self.sample(rng);
        let faults = d.faults.iter().map(|&(l, i)| (l, self.channels[l].entries[i].0.clone())).collect();
        (faults, d.meas_flips)
    }

    pub fn to_text(&self) -> String {
        text::print(self)
    }

    pub fn from_text(s: &str) -> Result<Self, NoiseError> {
        text::parse(s)
    }
}
