use super::{CliffordTableau, Gate, Gf2Basis, Letter, PauliError, PauliOperator};
use rand::Rng;

/// Pure stabilizer state given by `n` independent commuting signed generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StabilizerState {
    n: usize,
    gens: Vec<PauliOperator>,
}

impl StabilizerState {
    pub fn new(gens: Vec<PauliOperator>) -> Result<Self, PauliError> {
        let n = gens.first().map_or(0, |g| g.num_qubits());
        if gens.len() != n {
            return Err(PauliError::InvalidGenerators(format!("{} generators for {n} qubits", gens.len())));
        }
        let mut basis = Gf2Basis::new(n);
        for (i, g) in gens.iter().enumerate() {
            if g.num_qubits() != n {
                return Err(PauliError::QubitMismatch { left: n, right: g.num_qubits() });
            }
            if !g.is_hermitian() {
                return Err(PauliError::NonHermitian(g.phase()));
            }
            if gens[..i].iter().any(|h| h.anticommutes(g)) {
                return Err(PauliError::InvalidGenerators(format!("generator {g} anticommutes with another")));
            }
            if !basis.insert(g) {
                return Err(PauliError::InvalidGenerators(format!("generator {g} is dependent")));
            }
        }
        Ok(StabilizerState { n, gens })
    }

    /// `|0…0⟩`.
    pub fn zero(n: usize) -> Self {
        StabilizerState { n, gens: (0..n).map(|q| PauliOperator::single(n, q, Letter::Z)).collect() }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn generators(&self) -> &[PauliOperator] {
        &self.gens
    }

    /// +1/−1 when ±P stabilizes the state, 0 otherwise.
    pub fn expectation(&self, p: &PauliOperator) -> Result<i8, PauliError> {
        if p.num_qubits() != self.n {
            return Err(PauliError::QubitMismatch { left: self.n, right: p.num_qubits() });
        }
        if !p.is_hermitian() {
            return Err(PauliError::NonHermitian(p.phase()));
        }
        if self.gens.iter().any(|g| g.anticommutes(p)) {
            return Ok(0);
        }
        let prod = self.decompose(p).expect("a commuting Pauli lies in a full-rank stabilizer group");
        // prod = ±P letter-wise
        let rel = (p.phase() + 4 - prod.phase()) % 4;
        Ok(if rel == 0 { 1 } else { -1 })
    }

    /// Product of generators with the same letters as `p`, if any.
    fn decompose(&self, p: &PauliOperator) -> Option<PauliOperator> {
        // Gaussian elimination carrying the actual signed products.
        let mut rows: Vec<PauliOperator> = self.gens.clone();
        let mut target = p.unsigned();
        let mut acc = PauliOperator::identity(self.n);
        let mut used = vec![false; rows.len()];
        for col in 0..2 * self.n {
            let bit = |q: &PauliOperator| if col < self.n { q.x_bit(col) } else { q.z_bit(col - self.n) };
            let Some(r) = (0..rows.len()).find(|&i| !used[i] && bit(&rows[i])) else {
                continue;
            };
            used[r] = true;
            let pivot = rows[r].clone();
            for i in 0..rows.len() {
                if i != r && bit(&rows[i]) {
                    rows[i].mul_assign_right(&pivot);
                }
            }
            if bit(&target) {
                target.xor_letters(&pivot);
                acc.mul_assign_right(&pivot);
            }
        }
        target.is_trivial().then_some(acc)
    }

    pub fn apply_gate(&mut self, g: &Gate) {
        for p in &mut self.gens {
            g.conjugate_in_place(p);
        }
    }

    pub fn apply_tableau(&mut self, t: &CliffordTableau) -> Result<(), PauliError> {
        for p in &mut self.gens {
            *p = t.conjugate(p)?;
        }
        Ok(())
    }

    /// Applies a Pauli operator as a gate: generators anticommuting with it flip sign.
    pub fn apply_pauli(&mut self, p: &PauliOperator) {
        for g in &mut self.gens {
            if g.anticommutes(p) {
                g.negate();
            }
        }
    }

    /// Projective measurement of `p`; returns the outcome ±1 and collapses the state.
    pub fn measure<R: Rng + ?Sized>(&mut self, p: &PauliOperator, rng: &mut R) -> Result<i8, PauliError> {
        let e = self.expectation(p)?;
        if e != 0 {
            return Ok(e);
        }
        let outcome: i8 = if rng.gen::<bool>() { 1 } else { -1 };
        Ok(self.measure_forced(p, outcome)?.0)
    }

    /// Measures `p`, taking `outcome` whenever the result is random. Returns
    /// the outcome and whether it was random.
    pub fn measure_forced(&mut self, p: &PauliOperator, outcome: i8) -> Result<(i8, bool), PauliError> {
        let e = self.expectation(p)?;
        if e != 0 {
            return Ok((e, false));
        }
        let first = self.gens.iter().position(|g| g.anticommutes(p)).expect("random outcome needs an anticommuting generator");
        let pivot = self.gens[first].clone();
        for i in 0..self.gens.len() {
            if i != first && self.gens[i].anticommutes(p) {
                self.gens[i].mul_assign_right(&pivot);
            }
        }
        let mut newg = p.unsigned();
        if p.is_negative() != (outcome == -1) {
            newg.negate();
        }
        self.gens[first] = newg;
        Ok((outcome, true))
    }
}
