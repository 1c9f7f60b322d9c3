//! Dense trajectories. Faults and insertions are applied as gates; the joint
//! outcome distribution of each distinct fault pattern is cached.

use super::{Backend, EngineError, Gf2Tracker, InitialState, PreparedInstance};
use crate::circuits::LayeredCircuit;
use crate::dense::StateVector;
use crate::noise::{FaultDraw, NoiseModel};
use crate::pauli::PauliOperator;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

/// Independent generators above this count are sampled shot by shot instead
/// of tabulating all sign patterns.
const MAX_TABULATED: usize = 12;

pub(super) struct DenseBackend {
    circuit: LayeredCircuit,
    channels: Vec<Vec<PauliOperator>>,
    init: StateVector<f64>,
    /// Independent measured Paulis.
    generators: Vec<PauliOperator>,
    /// For each measured Pauli: sign and the generators whose product it is.
    expansions: Vec<(i8, Vec<usize>)>,
    n_checks: usize,
    cache: Mutex<HashMap<Vec<(usize, PauliOperator)>, Arc<Outcomes>>>,
}

enum Outcomes {
    /// Cumulative probabilities over generator sign patterns (bit set = −1).
    Table(Vec<(f64, u64)>),
    /// Final state for sequential sampling.
    State(StateVector<f64>),
}

impl DenseBackend {
    pub fn new(circuit: &LayeredCircuit, model: &NoiseModel, initial: &InitialState, measured: Vec<PauliOperator>) -> Result<Self, EngineError> {
        let nd = circuit.num_data_qubits();
        let init = StateVector::<f64>::from_stabilizers(nd, initial.generators())
            .ok_or_else(|| EngineError::InitialState("generators have no common eigenstate".into()))?
            .with_ancillas(circuit.num_ancillas());
        let mut tracker = Gf2Tracker::new();
        let mut generators = Vec::new();
        let mut expansions = Vec::new();
        for m in &measured {
            let mask = match tracker.insert(m) {
                Ok(i) => {
                    generators.push(m.clone());
                    expansions.push((1, vec![i]));
                    continue;
                }
                Err(mask) => mask,
            };
            let idx: Vec<usize> = (0..generators.len()).filter(|&i| mask[i / 64] >> (i % 64) & 1 == 1).collect();
            let mut prod = PauliOperator::identity(m.num_qubits());
            for &i in &idx {
                prod.mul_assign_right(&generators[i]);
            }
            // prod and m have the same letters; commuting Hermitian factors keep the product Hermitian
            let sign = if (m.phase() + 4 - prod.phase()) % 4 == 0 { 1 } else { -1 };
            expansions.push((sign, idx));
        }
        Ok(DenseBackend {
            circuit: circuit.clone(),
            channels: model.channels().iter().map(|c| c.entries().iter().map(|e| e.0.clone()).collect()).collect(),
            init,
            generators,
            expansions,
            n_checks: circuit.ancillas().len(),
            cache: Mutex::new(HashMap::new()),
        })
    }

    fn final_state(&self, key: &[(usize, PauliOperator)]) -> StateVector<f64> {
        let mut psi = self.init.clone();
        self.circuit.apply_to_state(&mut psi, None, key);
        psi
    }

    fn tabulate(&self, psi: &StateVector<f64>) -> Vec<(f64, u64)> {
        let mut out = Vec::new();
        let mut stack = vec![(psi.clone(), 0usize, 0u64)];
        while let Some((v, depth, pattern)) = stack.pop() {
            if depth == self.generators.len() {
                out.push((v.norm_sqr(), pattern));
                continue;
            }
            for s in [1i8, -1] {
                let mut w = v.clone();
                w.project(&self.generators[depth], s);
                if w.norm_sqr() > 1e-14 {
                    let bit = if s < 0 { 1u64 << depth } else { 0 };
                    stack.push((w, depth + 1, pattern | bit));
                }
            }
        }
        out.sort_by_key(|e| e.1);
        let total: f64 = out.iter().map(|e| e.0).sum();
        let mut acc = 0.0;
        for e in &mut out {
            acc += e.0 / total;
            e.0 = acc;
        }
        out
    }

    fn outcomes_for(&self, key: Vec<(usize, PauliOperator)>) -> Arc<Outcomes> {
        if let Some(o) = self.cache.lock().expect("cache lock").get(&key) {
            return o.clone();
        }
        let psi = self.final_state(&key);
        let o = Arc::new(if self.generators.len() <= MAX_TABULATED {
            Outcomes::Table(self.tabulate(&psi))
        } else {
            Outcomes::State(psi)
        });
        self.cache.lock().expect("cache lock").insert(key, o.clone());
        o
    }

    fn sample_pattern(&self, o: &Outcomes, rng: &mut ChaCha8Rng) -> Vec<bool> {
        match o {
            Outcomes::Table(t) => {
                let u: f64 = rng.gen();
                let i = t.partition_point(|e| e.0 <= u).min(t.len() - 1);
                (0..self.generators.len()).map(|g| t[i].1 >> g & 1 == 1).collect()
            }
            Outcomes::State(psi) => {
                let mut v = psi.clone();
                self.generators
                    .iter()
                    .map(|g| {
                        let p_plus = (1.0 + v.expectation(g)) / 2.0;
                        let minus = rng.gen::<f64>() >= p_plus;
                        v.project(g, if minus { -1 } else { 1 });
                        v.normalize();
                        minus
                    })
                    .collect()
            }
        }
    }
}

impl Backend for DenseBackend {
    fn shot(&self, inst: &PreparedInstance, draw: &FaultDraw, rng: &mut ChaCha8Rng) -> (Vec<bool>, Vec<i8>) {
        let mut key: Vec<(usize, PauliOperator)> = draw
            .faults
            .iter()
            .chain(&inst.insertions)
            .map(|&(l, e)| (l, self.channels[l][e].clone()))
            .chain(inst.paulis.iter().cloned())
            .collect();
        // merge Paulis at the same layer; global phases do not matter
        key.sort_by_key(|e| e.0);
        let mut merged: Vec<(usize, PauliOperator)> = Vec::with_capacity(key.len());
        for (l, p) in key {
            match merged.last_mut() {
                Some((ml, mp)) if *ml == l => {
                    mp.xor_letters(&p);
                }
                _ => merged.push((l, p.unsigned())),
            }
        }
        merged.retain(|(_, p)| !p.is_trivial());
        let o = self.outcomes_for(merged);
        let minus = self.sample_pattern(&o, rng);
        let values: Vec<i8> = self
            .expansions
            .iter()
            .map(|(s, idx)| idx.iter().fold(*s, |acc, &i| if minus[i] { -acc } else { acc }))
            .collect();
        let mut checks: Vec<bool> = values[..self.n_checks].iter().map(|&v| v < 0).collect();
        for (c, &f) in checks.iter_mut().zip(&draw.meas_flips) {
            *c ^= f;
        }
        (checks, values[self.n_checks..].to_vec())
    }

    fn noiseless_expectations(&self) -> Vec<f64> {
        let psi = self.final_state(&[]);
        self.expansions
            .iter()
            .map(|(s, idx)| {
                let mut prod = PauliOperator::identity(psi.num_qubits());
                for &i in idx {
                    prod.mul_assign_right(&self.generators[i]);
                }
                *s as f64 * psi.expectation(&prod)
            })
            .collect()
    }
}
