//! Pauli-frame backend: a single noiseless stabilizer run fixes the reference
//! outcomes; faults only flip bits through precomputed effect masks.

use super::{Backend, EngineError, InitialState, PreparedInstance};
use crate::circuits::LayeredCircuit;
use crate::noise::{FaultDraw, NoiseModel};
use crate::pauli::{CliffordTableau, Letter, PauliOperator, StabilizerState};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

type Bits = Vec<u64>;

fn words(n: usize) -> usize {
    n.div_ceil(64).max(1)
}

fn get(b: &[u64], i: usize) -> bool {
    b[i / 64] >> (i % 64) & 1 == 1
}

fn xor_into(acc: &mut [u64], b: &[u64]) {
    for (a, x) in acc.iter_mut().zip(b) {
        *a ^= x;
    }
}

pub(super) struct FrameBackend {
    n_measured: usize,
    /// Outcome bits (1 = −1) with every random bit set to 0.
    base: Bits,
    /// For each random bit, the outcomes it flips.
    random_masks: Vec<Bits>,
    /// Per layer, per channel entry: the outcomes a fault there flips.
    effects: Vec<Vec<Bits>>,
    suffix: Vec<CliffordTableau>,
    measured: Vec<PauliOperator>,
    n_checks: usize,
}

fn effect_of(image: &PauliOperator, measured: &[PauliOperator]) -> Bits {
    let mut b = vec![0u64; words(measured.len())];
    for (j, m) in measured.iter().enumerate() {
        if image.anticommutes(m) {
            b[j / 64] |= 1 << (j % 64);
        }
    }
    b
}

impl FrameBackend {
    pub fn new(circuit: &LayeredCircuit, model: &NoiseModel, initial: &InitialState, measured: Vec<PauliOperator>) -> Result<Self, EngineError> {
        let n = circuit.num_qubits();
        let nd = circuit.num_data_qubits();
        let mut gens: Vec<PauliOperator> = initial.generators().iter().map(|g| g.extended(n)).collect();
        gens.extend((nd..n).map(|a| PauliOperator::single(n, a, Letter::Z)));
        let mut state = StabilizerState::new(gens)?;
        for layer in circuit.layers() {
            for g in &layer.clifford.gates {
                state.apply_gate(g);
            }
        }
        // outcomes with all random bits forced to +1, then one run per flipped bit
        let run = |flip: Option<usize>| -> Result<(Bits, usize), EngineError> {
            let mut st = state.clone();
            let mut out = vec![0u64; words(measured.len())];
            let mut t = 0;
            for (j, m) in measured.iter().enumerate() {
                let forced = if Some(t) == flip { -1 } else { 1 };
                let (o, random) = st.measure_forced(m, forced)?;
                if random {
                    t += 1;
                }
                if o < 0 {
                    out[j / 64] |= 1 << (j % 64);
                }
            }
            Ok((out, t))
        };
        let (base, n_random) = run(None)?;
        let mut random_masks = Vec::with_capacity(n_random);
        for t in 0..n_random {
            let (mut o, _) = run(Some(t))?;
            xor_into(&mut o, &base);
            random_masks.push(o);
        }
        let suffix = circuit.suffix_tableaus();
        let effects = model
            .channels()
            .iter()
            .enumerate()
            .map(|(l, ch)| ch.entries().iter().map(|(p, _)| effect_of(&suffix[l + 1].conjugate_letters(p), &measured)).collect())
            .collect();
        Ok(FrameBackend { n_measured: measured.len(), base, random_masks, effects, suffix, measured, n_checks: circuit.ancillas().len() })
    }
}

impl Backend for FrameBackend {
    fn shot(&self, inst: &PreparedInstance, draw: &FaultDraw, rng: &mut ChaCha8Rng) -> (Vec<bool>, Vec<i8>) {
        let mut acc = self.base.clone();
        for m in &self.random_masks {
            if rng.gen::<bool>() {
                xor_into(&mut acc, m);
            }
        }
        for &(l, e) in draw.faults.iter().chain(&inst.insertions) {
            xor_into(&mut acc, &self.effects[l][e]);
        }
        for (l, p) in &inst.paulis {
            let img = self.suffix[l + 1].conjugate_letters(p);
            xor_into(&mut acc, &effect_of(&img, &self.measured));
        }
        let mut checks: Vec<bool> = (0..self.n_checks).map(|j| get(&acc, j)).collect();
        for (c, &f) in checks.iter_mut().zip(&draw.meas_flips) {
            *c ^= f;
        }
        let outcomes = (self.n_checks..self.n_measured).map(|j| if get(&acc, j) { -1 } else { 1 }).collect();
        (checks, outcomes)
    }

    fn noiseless_expectations(&self) -> Vec<f64> {
        (0..self.n_measured)
            .map(|j| {
                if self.random_masks.iter().any(|m| get(m, j)) {
                    0.0
                } else if get(&self.base, j) {
                    -1.0
                } else {
                    1.0
                }
            })
            .collect()
    }
}
