use super::CircuitError;
use crate::pauli::{CliffordTableau, Gate, Letter, PauliOperator};

/// A Clifford `C` (gates applied in order) with `C P_i C† = sign_i · σ_i` on
/// distinct qubits for every input Pauli.
#[derive(Clone, Debug, PartialEq)]
pub struct Reduction {
    pub gates: Vec<Gate>,
    /// (qubit, letter, negative) per input Pauli.
    pub targets: Vec<(usize, Letter, bool)>,
}

impl Reduction {
    pub fn cz_count(&self) -> usize {
        self.gates.iter().filter(|g| g.is_two_qubit()).count()
    }
}

struct Frame {
    gates: Vec<Gate>,
    ops: Vec<PauliOperator>,
}

impl Frame {
    fn push(&mut self, g: Gate) {
        for p in &mut self.ops {
            g.conjugate_in_place(p);
        }
        self.gates.push(g);
    }

    fn cnot(&mut self, c: usize, t: usize) {
        self.push(Gate::H(t));
        self.push(Gate::Cz(c, t));
        self.push(Gate::H(t));
    }

    /// Single-qubit Clifford on `q` sending letter `a` to `Z`.
    fn to_z(&mut self, q: usize, a: Letter) {
        match a {
            Letter::X => self.push(Gate::H(q)),
            Letter::Y => self.push(Gate::Sx(q)),
            Letter::Z | Letter::I => {}
        }
    }

    /// Single-qubit Clifford on `q` sending `a` to `X` and `b` to `Z`.
    fn to_xz(&mut self, q: usize, a: Letter, b: Letter) {
        use Letter::*;
        let seq: &[fn(usize) -> Gate] = match (a, b) {
            (X, Z) => &[],
            (Z, X) => &[Gate::H],
            (X, Y) => &[Gate::Sx],
            (Y, X) => &[Gate::H, Gate::S],
            (Y, Z) => &[Gate::S],
            (Z, Y) => &[Gate::H, Gate::Sx],
            _ => unreachable!("letters must differ and be non-identity"),
        };
        for f in seq {
            self.push(f(q));
        }
    }

    /// CNOT ladder collapsing the Z-string of operator `k` onto `target`.
    fn ladder(&mut self, k: usize, target: usize) {
        for q in self.ops[k].support() {
            if q != target {
                self.cnot(q, target);
            }
        }
    }
}

fn support_union(ops: &[PauliOperator]) -> Vec<usize> {
    let mut s: Vec<usize> = ops.iter().flat_map(|p| p.support()).collect();
    s.sort_unstable();
    s.dedup();
    s
}

fn single(p: &PauliOperator) -> Option<(usize, Letter, bool)> {
    let s = p.support();
    if s.len() != 1 {
        return None;
    }
    Some((s[0], p.letter(s[0]), p.is_negative()))
}

fn reduce_one(p: &PauliOperator) -> Vec<Gate> {
    let mut f = Frame { gates: Vec::new(), ops: vec![p.clone()] };
    let supp = p.support();
    if supp.len() == 1 {
        return f.gates;
    }
    for &q in &supp {
        f.to_z(q, p.letter(q));
    }
    if let Some(&t) = supp.last() {
        f.ladder(0, t);
    }
    f.gates
}

/// Reduces two commuting, independent Paulis. In the local frame where `a`
/// reads `X` and `b` reads `Z` on the qubits where they differ, the common
/// `Z` string is collapsed first, then the differing block, then the rest.
fn reduce_two(a: &PauliOperator, b: &PauliOperator) -> Option<Vec<Gate>> {
    let mut f = Frame { gates: Vec::new(), ops: vec![a.clone(), b.clone()] };
    for q in support_union(&f.ops) {
        let (la, lb) = (a.letter(q), b.letter(q));
        match (la, lb) {
            (Letter::I, l) | (l, Letter::I) => f.to_z(q, l),
            (x, y) if x == y => f.to_z(q, x),
            (x, y) => f.to_xz(q, x, y),
        }
    }
    let classify = |f: &Frame| {
        let (mut d, mut s, mut ao, mut bo) = (vec![], vec![], vec![], vec![]);
        for q in support_union(&f.ops) {
            match (f.ops[0].letter(q), f.ops[1].letter(q)) {
                (Letter::X, _) => d.push(q),
                (Letter::Z, Letter::Z) => s.push(q),
                (Letter::Z, Letter::I) => ao.push(q),
                (Letter::I, Letter::Z) => bo.push(q),
                _ => {}
            }
        }
        (d, s, ao, bo)
    };
    let (_, s, _, _) = classify(&f);
    if let Some((&s0, rest)) = s.split_first() {
        for &q in rest {
            f.cnot(q, s0);
        }
    }
    let (d, _, ao, bo) = classify(&f);
    if d.is_empty() {
        let (first, second, t) = if let Some(&t) = ao.first() {
            (0, 1, t)
        } else if let Some(&t) = bo.first() {
            (1, 0, t)
        } else {
            return None;
        };
        f.ladder(first, t);
        let t2 = *f.ops[second].support().iter().find(|&&q| q != t)?;
        f.ladder(second, t2);
    } else {
        let d0 = d[0];
        for &q in &d[1..] {
            f.cnot(d0, q);
        }
        for q in f.ops[0].support() {
            if q != d0 {
                f.push(Gate::Cz(d0, q));
            }
        }
        let t2 = *f.ops[1].support().first()?;
        f.ladder(1, t2);
    }
    Some(f.gates)
}

/// Finds a Clifford mapping each Pauli to a single-qubit Pauli.
///
/// One Pauli of weight `w` costs `w - 1` CZ gates. Two commuting Paulis are
/// reduced jointly; both orderings are tried and the cheaper one kept.
pub fn reduce_commuting(ops: &[PauliOperator]) -> Result<Reduction, CircuitError> {
    if ops.iter().any(|p| p.is_trivial()) {
        return Err(CircuitError::IdentityPauli);
    }
    let n = ops.first().map(|p| p.num_qubits()).unwrap_or(0);
    let gates = match ops {
        [p] => reduce_one(p),
        [a, b] => {
            if a.anticommutes(b) {
                return Err(CircuitError::NotCommuting);
            }
            let x = reduce_two(a, b).ok_or(CircuitError::Dependent)?;
            let y = reduce_two(b, a).ok_or(CircuitError::Dependent)?;
            let cz = |g: &[Gate]| g.iter().filter(|g| g.is_two_qubit()).count();
            if cz(&y) < cz(&x) {
                y
            } else {
                x
            }
        }
        _ => return Err(CircuitError::Unsupported(format!("joint reduction of {} Paulis", ops.len()))),
    };
    let t = CliffordTableau::from_gates(n, &gates);
    let mut targets = Vec::with_capacity(ops.len());
    for p in ops {
        let img = t.conjugate(p)?;
        let tg = single(&img).ok_or_else(|| CircuitError::Internal(format!("reduction of {p} left {img}")))?;
        if targets.iter().any(|&(q, _, _)| q == tg.0) {
            return Err(CircuitError::Internal("two Paulis reduced onto one qubit".into()));
        }
        targets.push(tg);
    }
    Ok(Reduction { gates, targets })
}
