//! Layered circuits `U = U_N R_N ⋯ U_1 R_1 U_0`: Clifford layers with
//! single-qubit rotations in between, plus ancilla-based parity checks.

mod decompose;
mod ir;

pub use decompose::{reduce_commuting, Reduction};

use crate::dense::StateVector;
use crate::encodings::{EncodingError, EncodingInstance};
use crate::pauli::{CliffordTableau, Gate, Letter, PauliError, PauliOperator};
use crate::scalar::Real;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CircuitError {
    #[error("cannot exponentiate the identity")]
    IdentityPauli,
    #[error("Paulis do not commute")]
    NotCommuting,
    #[error("Paulis are not independent")]
    Dependent,
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("layer {0} does not exist")]
    InvalidLayer(usize),
    #[error("invalid parity-check placement: {0}")]
    Placement(String),
    #[error("invalid parameters: {0}")]
    Params(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Encoding(#[from] EncodingError),
    #[error(transparent)]
    Pauli(#[from] PauliError),
    #[error("internal: {0}")]
    Internal(String),
}

/// `exp(-i θ/2 σ)` on one qubit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotationGate {
    pub qubit: usize,
    pub axis: Letter,
    pub theta: f64,
}

impl RotationGate {
    /// Angle wrapped into `(-π, π]`.
    pub fn normalized(mut self) -> Self {
        let tau = std::f64::consts::TAU;
        self.theta = self.theta.rem_euclid(tau);
        if self.theta > std::f64::consts::PI {
            self.theta -= tau;
        }
        self
    }

    /// The axis as a Pauli on `n` qubits.
    pub fn axis_pauli(&self, n: usize) -> PauliOperator {
        PauliOperator::single(n, self.qubit, self.axis)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CliffordLayer {
    pub gates: Vec<Gate>,
}

impl CliffordLayer {
    pub fn new(gates: Vec<Gate>) -> Self {
        CliffordLayer { gates }
    }

    pub fn n_tqg(&self) -> usize {
        self.gates.iter().filter(|g| g.is_two_qubit()).count()
    }

    pub fn tableau(&self, n: usize) -> CliffordTableau {
        CliffordTableau::from_gates(n, &self.gates)
    }

    /// Qubit pairs of the CZ gates, in gate order.
    pub fn tqg_pairs(&self) -> Vec<(usize, usize)> {
        self.gates
            .iter()
            .filter_map(|g| match *g {
                Gate::Cz(a, b) => Some((a, b)),
                _ => None,
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LayerRole {
    /// Part of Trotter step `step` (0-based).
    Evolution { step: usize },
    /// Measures local stabilizer `stabilizer` onto `ancilla` in check round `round`.
    Check { round: usize, stabilizer: usize, ancilla: usize },
}

/// A Clifford layer followed by the rotations that precede the next layer.
/// Noise acts between the two.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub clifford: CliffordLayer,
    pub rotations: Vec<RotationGate>,
    pub role: LayerRole,
}

impl Layer {
    pub fn is_check(&self) -> bool {
        matches!(self.role, LayerRole::Check { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRound {
    /// Number of completed Trotter steps when the round runs.
    pub after_step: usize,
    /// (stabilizer index, ancilla qubit, layer index).
    pub checks: Vec<(usize, usize, usize)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayeredCircuit {
    pub(crate) n_data: usize,
    pub(crate) n_ancilla: usize,
    pub(crate) layers: Vec<Layer>,
    pub(crate) local_stabilizers: Vec<PauliOperator>,
    pub(crate) global_stabilizers: Vec<PauliOperator>,
    /// Index of the last layer of each Trotter step.
    pub(crate) step_ends: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FhmParams {
    pub t: f64,
    pub u: f64,
    pub total_time: f64,
    pub n_trotter: usize,
}

impl Default for FhmParams {
    fn default() -> Self {
        FhmParams { t: 1.0, u: 4.0, total_time: 0.5, n_trotter: 10 }
    }
}

impl FhmParams {
    pub fn validate(&self) -> Result<(), CircuitError> {
        if self.n_trotter == 0 {
            return Err(CircuitError::Params("n_trotter must be at least 1".into()));
        }
        if !(self.total_time > 0.0) || !self.t.is_finite() || !self.u.is_finite() {
            return Err(CircuitError::Params("total_time must be positive and t, U finite".into()));
        }
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        self.total_time / self.n_trotter as f64
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TqgCounts {
    pub per_layer: Vec<usize>,
    pub evolution: usize,
    pub checks: usize,
}

impl TqgCounts {
    pub fn total(&self) -> usize {
        self.evolution + self.checks
    }
}

/// Where parity-check rounds go.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Placement {
    /// Rounds spread evenly over the steps, the last one after the final step.
    Even,
    /// Explicit step counts after which a round runs (1-based, increasing).
    AfterSteps(Vec<usize>),
}

/// `exp(-i θ/2 P)` as `(C, R, C†)`.
pub fn decompose_pauli_exponential(
    p: &PauliOperator,
    theta: f64,
) -> Result<(CliffordLayer, RotationGate, CliffordLayer), CircuitError> {
    let red = reduce_commuting(std::slice::from_ref(p))?;
    let (q, axis, neg) = red.targets[0];
    let theta = if neg { -theta } else { theta };
    let right = red.gates.iter().rev().map(Gate::inverse).collect();
    Ok((CliffordLayer::new(red.gates), RotationGate { qubit: q, axis, theta }, CliffordLayer::new(right)))
}

/// One Trotter term: commuting Paulis with their rotation angles.
#[derive(Clone, Debug)]
struct Term {
    paulis: Vec<PauliOperator>,
    thetas: Vec<f64>,
}

/// Terms with disjoint supports sharing one Clifford frame.
struct Block {
    gates: Vec<Gate>,
    rotations: Vec<RotationGate>,
}

fn term_groups(enc: &EncodingInstance, params: &FhmParams) -> Result<Vec<Vec<Term>>, CircuitError> {
    use crate::encodings::HopDirection;
    let lat = *enc.lattice();
    let dt = params.dt();
    let mut groups: Vec<Vec<Term>> = vec![Vec::new(); 5];
    for hp in lat.hopping_pairs() {
        let (a, b) = enc.hopping_operators(hp.j, hp.k)?;
        let g = match hp.direction {
            HopDirection::Horizontal => hp.parity,
            HopDirection::Vertical => 2 + hp.parity,
        };
        // exp(i t dt (A + B)/2) = exp(-i θ/2 A) exp(-i θ/2 B) with θ = -t dt
        groups[g].push(Term { paulis: vec![a, b], thetas: vec![-params.t * dt; 2] });
    }
    if lat.spinful {
        for site in 0..lat.n_sites() {
            // U n↑n↓ = U/4 V↑V↓ + terms linear in V (total number, dropped) + const
            groups[4].push(Term { paulis: vec![enc.interaction_operator(site)?], thetas: vec![params.u * dt / 2.0] });
        }
    }
    Ok(groups.into_iter().filter(|g| !g.is_empty()).collect())
}

fn build_blocks(groups: &[Vec<Term>]) -> Result<Vec<Block>, CircuitError> {
    let mut blocks = Vec::new();
    for group in groups {
        // first-fit packing into blocks with disjoint supports
        let mut open: Vec<(Vec<usize>, Block)> = Vec::new();
        for term in group {
            let red = reduce_commuting(&term.paulis)?;
            let mut supp: Vec<usize> = term.paulis.iter().flat_map(|p| p.support()).collect();
            supp.extend(red.gates.iter().flat_map(|g| g.qubits()));
            supp.sort_unstable();
            supp.dedup();
            let rots: Vec<RotationGate> = red
                .targets
                .iter()
                .zip(&term.thetas)
                .map(|(&(q, axis, neg), &th)| RotationGate { qubit: q, axis, theta: if neg { -th } else { th } })
                .collect();
            let slot = open.iter().position(|(s, _)| s.iter().all(|q| supp.binary_search(q).is_err()));
            match slot {
                Some(i) => {
                    let (s, b) = &mut open[i];
                    s.extend(supp);
                    s.sort_unstable();
                    b.gates.extend(red.gates);
                    b.rotations.extend(rots);
                }
                None => open.push((supp, Block { gates: red.gates, rotations: rots })),
            }
        }
        blocks.extend(open.into_iter().map(|(_, b)| b));
    }
    Ok(blocks)
}

/// First-order Trotter circuit of the Fermi-Hubbard model under `enc`.
///
/// Term order per step: horizontal hops on even then odd columns, vertical
/// hops on even then odd rows, then the interaction. Each block of terms is
/// `C · rotations · C†`; `C†` of one block and `C` of the next share a layer
/// within a step.
pub fn trotterize(enc: &EncodingInstance, params: &FhmParams) -> Result<LayeredCircuit, CircuitError> {
    params.validate()?;
    let groups = term_groups(enc, params)?;
    let blocks = build_blocks(&groups)?;
    let inv = |g: &[Gate]| -> Vec<Gate> { g.iter().rev().map(Gate::inverse).collect() };
    let mut layers = Vec::new();
    let mut step_ends = Vec::new();
    for step in 0..params.n_trotter {
        let role = LayerRole::Evolution { step };
        let mut pending: Vec<Gate> = Vec::new();
        for b in &blocks {
            let mut gates = std::mem::take(&mut pending);
            gates.extend(b.gates.iter().copied());
            layers.push(Layer { clifford: CliffordLayer::new(gates), rotations: b.rotations.clone(), role });
            pending = inv(&b.gates);
        }
        layers.push(Layer { clifford: CliffordLayer::new(pending), rotations: Vec::new(), role });
        step_ends.push(layers.len() - 1);
    }
    Ok(LayeredCircuit {
        n_data: enc.num_qubits(),
        n_ancilla: 0,
        layers,
        local_stabilizers: enc.local_stabilizers().to_vec(),
        global_stabilizers: enc.global_stabilizers().to_vec(),
        step_ends,
    })
}

/// Gates measuring `s` (on the data register) onto a fresh ancilla prepared in
/// `|0⟩`: `H`, controlled-`s` built from CZ and basis changes, `H`. The ancilla
/// then reads `+1` in Z exactly when `s = +1`.
pub fn check_gates(s: &PauliOperator, ancilla: usize) -> Vec<Gate> {
    let mut g = vec![Gate::H(ancilla)];
    for q in s.support() {
        match s.letter(q) {
            Letter::X => g.extend([Gate::H(q), Gate::Cz(ancilla, q), Gate::H(q)]),
            Letter::Y => g.extend([Gate::Sx(q), Gate::Cz(ancilla, q), Gate::Sxdg(q)]),
            Letter::Z => g.push(Gate::Cz(ancilla, q)),
            Letter::I => {}
        }
    }
    if s.is_negative() {
        g.push(Gate::Z(ancilla));
    }
    g.push(Gate::H(ancilla));
    g
}

impl LayeredCircuit {
    pub fn num_data_qubits(&self) -> usize {
        self.n_data
    }

    pub fn num_ancillas(&self) -> usize {
        self.n_ancilla
    }

    pub fn num_qubits(&self) -> usize {
        self.n_data + self.n_ancilla
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    pub fn num_steps(&self) -> usize {
        self.step_ends.len()
    }

    pub fn step_ends(&self) -> &[usize] {
        &self.step_ends
    }

    pub fn local_stabilizers(&self) -> &[PauliOperator] {
        &self.local_stabilizers
    }

    pub fn global_stabilizers(&self) -> &[PauliOperator] {
        &self.global_stabilizers
    }

    /// Extends a data-register Pauli with identities on the ancillas.
    pub fn on_all_qubits(&self, p: &PauliOperator) -> PauliOperator {
        p.extended(self.num_qubits())
    }

    /// All rotations in circuit order as (layer, index within layer).
    pub fn rotation_positions(&self) -> Vec<(usize, usize)> {
        self.layers.iter().enumerate().flat_map(|(l, layer)| (0..layer.rotations.len()).map(move |i| (l, i))).collect()
    }

    pub fn num_rotations(&self) -> usize {
        self.layers.iter().map(|l| l.rotations.len()).sum()
    }

    pub fn is_clifford(&self) -> bool {
        self.layers.iter().flat_map(|l| &l.rotations).all(|r| r.theta == 0.0)
    }

    /// Check rounds reconstructed from the layer roles.
    pub fn check_rounds(&self) -> Vec<CheckRound> {
        let mut rounds: Vec<CheckRound> = Vec::new();
        for (l, layer) in self.layers.iter().enumerate() {
            if let LayerRole::Check { round, stabilizer, ancilla } = layer.role {
                if rounds.len() <= round {
                    let after_step = self.step_ends.iter().filter(|&&e| e < l).count();
                    rounds.resize(round + 1, CheckRound { after_step, checks: Vec::new() });
                    rounds[round].after_step = after_step;
                }
                rounds[round].checks.push((stabilizer, ancilla, l));
            }
        }
        rounds
    }

    pub fn num_rounds(&self) -> usize {
        self.check_rounds().len()
    }

    /// All ancilla qubits in measurement order.
    pub fn ancillas(&self) -> Vec<usize> {
        self.layers
            .iter()
            .filter_map(|l| match l.role {
                LayerRole::Check { ancilla, .. } => Some(ancilla),
                _ => None,
            })
            .collect()
    }

    pub fn count_tqgs(&self) -> TqgCounts {
        let per_layer: Vec<usize> = self.layers.iter().map(|l| l.clifford.n_tqg()).collect();
        let mut evolution = 0;
        let mut checks = 0;
        for (l, n) in self.layers.iter().zip(&per_layer) {
            if l.is_check() {
                checks += n;
            } else {
                evolution += n;
            }
        }
        TqgCounts { per_layer, evolution, checks }
    }

    /// Every rotation angle set to zero.
    pub fn clifford_round(&self) -> LayeredCircuit {
        let mut c = self.clone();
        for r in c.layers.iter_mut().flat_map(|l| l.rotations.iter_mut()) {
            r.theta = 0.0;
        }
        c
    }

    /// Inserts `n_rounds` rounds measuring every local stabilizer, each on
    /// its own fresh ancilla. Without local stabilizers nothing is inserted.
    pub fn insert_parity_checks(&self, n_rounds: usize, placement: &Placement) -> Result<LayeredCircuit, CircuitError> {
        if self.n_ancilla > 0 {
            return Err(CircuitError::Placement("circuit already has parity checks".into()));
        }
        if n_rounds == 0 {
            return Err(CircuitError::Placement("need at least one round".into()));
        }
        let steps = self.num_steps();
        let after: Vec<usize> = match placement {
            Placement::Even => {
                if n_rounds > steps {
                    return Err(CircuitError::Placement(format!("{n_rounds} rounds over {steps} steps")));
                }
                (1..=n_rounds).map(|r| (r * steps).div_ceil(n_rounds)).collect()
            }
            Placement::AfterSteps(v) => {
                if v.len() != n_rounds {
                    return Err(CircuitError::Placement(format!("{} positions for {n_rounds} rounds", v.len())));
                }
                if v.windows(2).any(|w| w[0] >= w[1]) || v.iter().any(|&s| s == 0 || s > steps) {
                    return Err(CircuitError::Placement(format!("positions {v:?} outside 1..={steps} or unordered")));
                }
                v.clone()
            }
        };
        let mut out = self.clone();
        if self.local_stabilizers.is_empty() {
            return Ok(out);
        }
        let n_stab = self.local_stabilizers.len();
        out.n_ancilla = n_rounds * n_stab;
        let mut layers = Vec::new();
        let mut step_ends = Vec::new();
        let mut next_round = 0;
        for (l, layer) in self.layers.iter().enumerate() {
            layers.push(layer.clone());
            if let Some(s) = self.step_ends.iter().position(|&e| e == l) {
                step_ends.push(layers.len() - 1);
                if next_round < after.len() && after[next_round] == s + 1 {
                    for (k, st) in self.local_stabilizers.iter().enumerate() {
                        let ancilla = self.n_data + next_round * n_stab + k;
                        layers.push(Layer {
                            clifford: CliffordLayer::new(check_gates(st, ancilla)),
                            rotations: Vec::new(),
                            role: LayerRole::Check { round: next_round, stabilizer: k, ancilla },
                        });
                    }
                    next_round += 1;
                }
            }
        }
        out.layers = layers;
        out.step_ends = step_ends;
        Ok(out)
    }

    /// Runs the circuit on a statevector over all qubits. `flips[i]` negates
    /// the angle of the `i`-th rotation (circuit order); `faults[l]` are
    /// Paulis applied right after the Clifford part of layer `l`.
    pub fn apply_to_state<T: Real>(
        &self,
        state: &mut StateVector<T>,
        flips: Option<&[bool]>,
        faults: &[(usize, PauliOperator)],
    ) {
        let mut r = 0;
        for (l, layer) in self.layers.iter().enumerate() {
            for g in &layer.clifford.gates {
                state.apply_gate(g);
            }
            for (fl, p) in faults {
                if *fl == l {
                    state.apply_pauli(p);
                }
            }
            for rot in &layer.rotations {
                let neg = flips.is_some_and(|f| f[r]);
                let th = if neg { -rot.theta } else { rot.theta };
                state.apply_rotation(rot.qubit, rot.axis, T::of(th));
                r += 1;
            }
        }
    }

    /// Tableau of layers `from..` (Clifford parts only).
    pub fn suffix_tableaus(&self) -> Vec<CliffordTableau> {
        let n = self.num_qubits();
        let mut out = vec![CliffordTableau::identity(n); self.layers.len() + 1];
        for l in (0..self.layers.len()).rev() {
            out[l] = self.layers[l].clifford.tableau(n).then(&out[l + 1]).expect("sizes match");
        }
        out
    }

    pub fn to_ir(&self) -> String {
        ir::print(self)
    }

    pub fn from_ir(text: &str) -> Result<LayeredCircuit, CircuitError> {
        ir::parse(text)
    }
}
