//! Fermion-to-qubit encodings of the Fermi-Hubbard lattice.
//!
//! Every encoding exposes vertex operators `V_i` (so that `n_i = (1 - V_i)/2`)
//! and edge operators `E_ij = -i γ_i γ_j`, with `E_ji = -E_ij`. Local
//! stabilizers fix the code space; the spin-parity operators `S_↑`, `S_↓` are
//! kept separately as global stabilizers.

mod build;
mod lattice;

pub use lattice::{HopDirection, HopPair, LatticeSpec};

use crate::pauli::{Letter, PauliError, PauliOperator};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EncodingError {
    #[error("lattice {0}")]
    Lattice(String),
    #[error("{kind} cannot encode this lattice: {reason}")]
    Unsupported { kind: EncodingKind, reason: String },
    #[error("mode {0} does not exist")]
    NoMode(usize),
    #[error("edge ({0}, {1}) is not directly defined; use composite_edge")]
    NoEdge(usize, usize),
    #[error("path is broken between modes {0} and {1}")]
    BrokenPath(usize, usize),
    #[error("modes {0} and {1} are not lattice neighbours of equal spin")]
    NotAdjacent(usize, usize),
    #[error("formula undefined: {0}")]
    Formula(String),
    #[error(transparent)]
    Pauli(#[from] PauliError),
    #[error("internal construction failure: {0}")]
    Internal(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EncodingKind {
    #[serde(rename = "JW")]
    Jw,
    #[serde(rename = "LE")]
    Le,
    #[serde(rename = "VC")]
    Vc,
    #[serde(rename = "DK")]
    Dk,
    #[serde(rename = "HX")]
    Hx,
}

impl EncodingKind {
    pub const ALL: [EncodingKind; 5] = [EncodingKind::Jw, EncodingKind::Le, EncodingKind::Vc, EncodingKind::Dk, EncodingKind::Hx];

    pub fn name(self) -> &'static str {
        match self {
            EncodingKind::Jw => "JW",
            EncodingKind::Le => "LE",
            EncodingKind::Vc => "VC",
            EncodingKind::Dk => "DK",
            EncodingKind::Hx => "HX",
        }
    }

    /// JW and LE order the modes along a single chain.
    pub fn is_chain(self) -> bool {
        matches!(self, EncodingKind::Jw | EncodingKind::Le)
    }

    /// Code distance as tabulated for the encoding family.
    pub fn distance(self) -> usize {
        match self {
            EncodingKind::Le | EncodingKind::Hx => 2,
            _ => 1,
        }
    }

    /// Asymptotic qubit-to-mode ratio.
    pub fn nominal_qubit_ratio(self) -> f64 {
        match self {
            EncodingKind::Jw => 1.0,
            EncodingKind::Dk => 1.5,
            _ => 2.0,
        }
    }

    /// (data connectivity, extra connectivity needed by parity checks).
    pub fn connectivity(self) -> (usize, usize) {
        match self {
            EncodingKind::Jw => (2, 0),
            EncodingKind::Le => (3, 2),
            EncodingKind::Dk | EncodingKind::Vc => (4, 4),
            EncodingKind::Hx => (3, 3),
        }
    }
}

impl fmt::Display for EncodingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EncodingKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "JW" => Ok(EncodingKind::Jw),
            "LE" => Ok(EncodingKind::Le),
            "VC" => Ok(EncodingKind::Vc),
            "DK" => Ok(EncodingKind::Dk),
            "HX" => Ok(EncodingKind::Hx),
            other => Err(format!("unknown encoding {other:?}")),
        }
    }
}

/// A local stabilizer measured through one ancilla.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Plaquette {
    /// Index into [`EncodingInstance::local_stabilizers`].
    pub stabilizer: usize,
    /// Ancilla slot; the ancilla qubit of round `r` is allocated by the circuit builder.
    pub ancilla_slot: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EncodingMetadata {
    pub distance: usize,
    /// Tabulated asymptotic ratio.
    pub qubit_ratio: f64,
    /// Data qubits over modes for this instance.
    pub actual_qubit_ratio: f64,
    pub max_stabilizer_weight: usize,
    pub connectivity: usize,
    pub ancilla_connectivity: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ObservableLabel {
    O1,
    O2,
}

/// Occupation-type observables: `O1` uses `V_i`, `O2` uses `V_i V_j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservableSet {
    pub label: ObservableLabel,
    pub names: Vec<String>,
    pub paulis: Vec<PauliOperator>,
}

impl ObservableSet {
    pub fn len(&self) -> usize {
        self.paulis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paulis.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EncodingInstance {
    pub(crate) kind: EncodingKind,
    pub(crate) lattice: LatticeSpec,
    pub(crate) n_qubits: usize,
    pub(crate) vertex: Vec<PauliOperator>,
    pub(crate) edges: BTreeMap<(usize, usize), PauliOperator>,
    pub(crate) local: Vec<PauliOperator>,
    pub(crate) global: Vec<PauliOperator>,
    pub(crate) plaquettes: Vec<Plaquette>,
    pub(crate) qubit_labels: Vec<String>,
    /// Mode order along the chain of each copy (JW and LE only).
    pub(crate) chains: Vec<Vec<usize>>,
    pub(crate) metadata: EncodingMetadata,
}

/// Builds the encoding of `lattice` with the given kind.
pub fn build_encoding(kind: EncodingKind, lattice: LatticeSpec) -> Result<EncodingInstance, EncodingError> {
    build::build(kind, lattice)
}

impl EncodingInstance {
    pub fn kind(&self) -> EncodingKind {
        self.kind
    }

    pub fn lattice(&self) -> &LatticeSpec {
        &self.lattice
    }

    pub fn num_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn num_modes(&self) -> usize {
        self.vertex.len()
    }

    pub fn metadata(&self) -> &EncodingMetadata {
        &self.metadata
    }

    pub fn local_stabilizers(&self) -> &[PauliOperator] {
        &self.local
    }

    /// `S_↑`, `S_↓` for spinful lattices, the total parity otherwise.
    pub fn global_stabilizers(&self) -> &[PauliOperator] {
        &self.global
    }

    pub fn plaquettes(&self) -> &[Plaquette] {
        &self.plaquettes
    }

    pub fn qubit_labels(&self) -> &[String] {
        &self.qubit_labels
    }

    pub fn vertex_operators(&self) -> &[PauliOperator] {
        &self.vertex
    }

    /// Directly defined edges `(i, j)` with `i < j`, mapped to `E_ij`.
    pub fn edges(&self) -> &BTreeMap<(usize, usize), PauliOperator> {
        &self.edges
    }

    pub fn vertex_operator(&self, mode: usize) -> Result<&PauliOperator, EncodingError> {
        self.vertex.get(mode).ok_or(EncodingError::NoMode(mode))
    }

    /// `E_ij` for a directly connected pair, either orientation.
    pub fn edge_operator(&self, i: usize, j: usize) -> Result<PauliOperator, EncodingError> {
        let m = self.num_modes();
        if i >= m {
            return Err(EncodingError::NoMode(i));
        }
        if j >= m {
            return Err(EncodingError::NoMode(j));
        }
        if i < j {
            self.edges.get(&(i, j)).cloned().ok_or(EncodingError::NoEdge(i, j))
        } else {
            self.edges.get(&(j, i)).map(|e| e.negated()).ok_or(EncodingError::NoEdge(i, j))
        }
    }

    /// Edge operator along a path of direct edges.
    ///
    /// From `E_ab E_bc = -i E_ac`, an open path `a_0 … a_L` gives
    /// `E_{a_0 a_L} = i^{L-1} E_{a_0 a_1} ⋯ E_{a_{L-1} a_L}`. A closed path
    /// returns the plain loop product, which is `+1` on the code space.
    pub fn composite_edge(&self, path: &[usize]) -> Result<PauliOperator, EncodingError> {
        if path.len() < 2 {
            return Err(EncodingError::BrokenPath(path.first().copied().unwrap_or(0), path.first().copied().unwrap_or(0)));
        }
        let mut acc = PauliOperator::identity(self.n_qubits);
        for w in path.windows(2) {
            let e = self.edge_operator(w[0], w[1]).map_err(|_| EncodingError::BrokenPath(w[0], w[1]))?;
            acc.mul_assign_right(&e);
        }
        let len = path.len() - 1;
        if path.first() != path.last() {
            acc.add_phase(((len - 1) % 4) as u8);
        }
        Ok(acc)
    }

    /// A path of direct edges from `j` to `k`: the chain segment for JW/LE,
    /// the direct edge otherwise.
    pub fn edge_path(&self, j: usize, k: usize) -> Result<Vec<usize>, EncodingError> {
        if self.edge_operator(j, k).is_ok() {
            return Ok(vec![j, k]);
        }
        for chain in &self.chains {
            let pj = chain.iter().position(|&m| m == j);
            let pk = chain.iter().position(|&m| m == k);
            if let (Some(a), Some(b)) = (pj, pk) {
                return Ok(if a < b { chain[a..=b].to_vec() } else { chain[b..=a].iter().rev().copied().collect() });
            }
        }
        Err(EncodingError::NoEdge(j, k))
    }

    /// `E_jk` for any connected pair, composite if needed.
    pub fn edge_between(&self, j: usize, k: usize) -> Result<PauliOperator, EncodingError> {
        let path = self.edge_path(j, k)?;
        self.composite_edge(&path)
    }

    /// Hermitian Paulis `(A, B)` with `c_j† c_k + c_k† c_j = (A + B)/2` on the code space:
    /// `A = i V_k E_jk` and `B = -i V_j E_jk`.
    pub fn hopping_operators(&self, j: usize, k: usize) -> Result<(PauliOperator, PauliOperator), EncodingError> {
        if !self.lattice.are_hopping_neighbors(j, k) {
            return Err(EncodingError::NotAdjacent(j, k));
        }
        let e = self.edge_between(j, k)?;
        let mut a = self.vertex[k].multiply(&e)?;
        a.add_phase(1);
        let mut b = self.vertex[j].multiply(&e)?;
        b.add_phase(3);
        if !a.is_hermitian() || !b.is_hermitian() {
            return Err(EncodingError::Internal(format!("non-Hermitian hopping term for ({j}, {k})")));
        }
        Ok((a, b))
    }

    /// `V_↑ V_↓` on one site, the interaction Pauli.
    pub fn interaction_operator(&self, site: usize) -> Result<PauliOperator, EncodingError> {
        if !self.lattice.spinful {
            return Err(EncodingError::Lattice("interaction needs a spinful lattice".into()));
        }
        let up = self.lattice.mode(site, 0);
        let dn = self.lattice.mode(site, 1);
        Ok(self.vertex[up].multiply(&self.vertex[dn])?)
    }

    pub fn observable_sets(&self) -> (ObservableSet, ObservableSet) {
        let m = self.num_modes();
        let o1 = ObservableSet {
            label: ObservableLabel::O1,
            names: (0..m).map(|i| format!("n{i}")).collect(),
            paulis: self.vertex.clone(),
        };
        let mut names = Vec::new();
        let mut paulis = Vec::new();
        for i in 0..m {
            for j in i + 1..m {
                names.push(format!("n{i}n{j}"));
                paulis.push(self.vertex[i].multiply(&self.vertex[j]).expect("same register"));
            }
        }
        (o1, ObservableSet { label: ObservableLabel::O2, names, paulis })
    }

    pub fn observable_set(&self, label: &ObservableLabel) -> ObservableSet {
        let (o1, o2) = self.observable_sets();
        match label {
            ObservableLabel::O1 => o1,
            ObservableLabel::O2 => o2,
        }
    }

    /// All stabilizers, local first.
    pub fn all_stabilizers(&self) -> Vec<PauliOperator> {
        self.local.iter().chain(&self.global).cloned().collect()
    }

    /// Stabilizer generators of the encoded Fock state with the given occupations
    /// (`true` = occupied): local stabilizers, then `(-1)^{n_i} V_i`.
    pub fn fock_state_generators(&self, occupation: &[bool]) -> Result<Vec<PauliOperator>, EncodingError> {
        if occupation.len() != self.num_modes() {
            return Err(EncodingError::Lattice(format!(
                "occupation pattern has {} entries for {} modes",
                occupation.len(),
                self.num_modes()
            )));
        }
        let mut gens = self.local.clone();
        for (v, &occ) in self.vertex.iter().zip(occupation) {
            gens.push(if occ { v.negated() } else { v.clone() });
        }
        Ok(gens)
    }

    /// Structured text dump used by golden-file tests.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "encoding {}", self.kind);
        let _ = writeln!(s, "lattice {}x{} spinful={}", self.lattice.nx, self.lattice.ny, self.lattice.spinful);
        let _ = writeln!(s, "qubits {}", self.n_qubits);
        let _ = writeln!(s, "[layout]");
        for (q, l) in self.qubit_labels.iter().enumerate() {
            let _ = writeln!(s, "q{q} {l}");
        }
        let _ = writeln!(s, "[vertex]");
        for (i, v) in self.vertex.iter().enumerate() {
            let _ = writeln!(s, "V{i} {v}");
        }
        let _ = writeln!(s, "[edges]");
        for ((i, j), e) in &self.edges {
            let _ = writeln!(s, "E{i},{j} {e}");
        }
        let _ = writeln!(s, "[stabilizers]");
        for (k, st) in self.local.iter().enumerate() {
            let _ = writeln!(s, "S{k} local w={} {st}", st.weight());
        }
        for (k, st) in self.global.iter().enumerate() {
            let _ = writeln!(s, "G{k} global w={} {st}", st.weight());
        }
        let _ = writeln!(s, "[plaquettes]");
        for p in &self.plaquettes {
            let _ = writeln!(s, "S{} -> slot{}", p.stabilizer, p.ancilla_slot);
        }
        let m = &self.metadata;
        let _ = writeln!(s, "[metadata]");
        let _ = writeln!(s, "distance {}", m.distance);
        let _ = writeln!(s, "qubit_ratio {} actual {:.4}", m.qubit_ratio, m.actual_qubit_ratio);
        let _ = writeln!(s, "max_stabilizer_weight {}", m.max_stabilizer_weight);
        let _ = writeln!(s, "connectivity {}(+{})", m.connectivity, m.ancilla_connectivity);
        s
    }

    /// Minimum weight of a Pauli that commutes with every stabilizer and acts
    /// nontrivially on the code space, searched up to `max_weight`.
    pub fn distance_up_to(&self, max_weight: usize) -> Option<usize> {
        let stabs = self.all_stabilizers();
        let mut group = crate::pauli::Gf2Basis::new(self.n_qubits);
        for s in &stabs {
            group.insert(s);
        }
        let n = self.n_qubits;
        let letters = [Letter::X, Letter::Y, Letter::Z];
        for w in 1..=max_weight {
            let mut found = false;
            for_each_weight(n, w, &mut |qs: &[usize], ls: &[usize]| {
                if found {
                    return;
                }
                let mut p = PauliOperator::identity(n);
                for (&q, &l) in qs.iter().zip(ls) {
                    p.set(q, letters[l]);
                }
                if stabs.iter().all(|s| s.commutes_with(&p)) && !group.contains(&p) {
                    found = true;
                }
            });
            if found {
                return Some(w);
            }
        }
        None
    }
}

fn for_each_weight(n: usize, w: usize, f: &mut dyn FnMut(&[usize], &[usize])) {
    fn rec(n: usize, w: usize, start: usize, qs: &mut Vec<usize>, f: &mut dyn FnMut(&[usize], &[usize])) {
        if qs.len() == w {
            let mut ls = vec![0usize; w];
            loop {
                f(qs, &ls);
                let mut i = 0;
                while i < w {
                    ls[i] += 1;
                    if ls[i] < 3 {
                        break;
                    }
                    ls[i] = 0;
                    i += 1;
                }
                if i == w {
                    break;
                }
            }
            return;
        }
        for q in start..n {
            qs.push(q);
            rec(n, w, q + 1, qs, f);
            qs.pop();
        }
    }
    rec(n, w, 0, &mut Vec::new(), f);
}

/// Closed-form two-qubit-gate count per Trotter step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Dim {
    OneD,
    TwoD,
}

/// Two-qubit gates per Trotter step for `n_sites` sites (2D forms need a square lattice).
pub fn tqg_count_formula(kind: EncodingKind, n_sites: usize, dim: Dim) -> Result<u64, EncodingError> {
    let n = n_sites as i64;
    let v = match dim {
        Dim::OneD => match kind {
            EncodingKind::Jw => 6 * n - 4,
            EncodingKind::Le => 14 * n - 8,
            EncodingKind::Dk | EncodingKind::Vc => 14 * n - 12,
            EncodingKind::Hx => 16 * n - 9,
        },
        Dim::TwoD => {
            let r = (n as f64).sqrt().round() as i64;
            if r * r != n {
                return Err(EncodingError::Formula(format!("2D count needs a square lattice, got N={n}")));
            }
            match kind {
                EncodingKind::Jw => 4 * n * r + 6 * n - 4 * r - 4,
                EncodingKind::Le => 8 * n * r + 10 * n - 4 * r - 4,
                EncodingKind::Dk => 20 * n - 36 * r + 18,
                EncodingKind::Vc => 22 * n - 20 * r,
                EncodingKind::Hx => 44 * n - 24 * r,
            }
        }
    };
    if v < 0 {
        return Err(EncodingError::Formula(format!("{kind} with N={n} gives a negative count")));
    }
    Ok(v as u64)
}

#[cfg(test)]
mod tests;
