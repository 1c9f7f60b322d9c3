use super::{Gate, PauliError, PauliOperator};
use serde::{Deserialize, Serialize};

/// Signed images of every `X_q` and `Z_q` under `P ↦ C P C†`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CliffordTableau {
    n: usize,
    x_img: Vec<PauliOperator>,
    z_img: Vec<PauliOperator>,
}

impl CliffordTableau {
    pub fn identity(n: usize) -> Self {
        CliffordTableau {
            n,
            x_img: (0..n).map(|q| PauliOperator::single(n, q, super::Letter::X)).collect(),
            z_img: (0..n).map(|q| PauliOperator::single(n, q, super::Letter::Z)).collect(),
        }
    }

    /// Tableau of the circuit applying `gates[0]` first.
    pub fn from_gates(n: usize, gates: &[Gate]) -> Self {
        let mut t = Self::identity(n);
        for g in gates {
            t.append_gate(g);
        }
        t
    }

    /// Appends `g` after the current circuit.
    pub fn append_gate(&mut self, g: &Gate) {
        debug_assert!(g.max_qubit() < self.n);
        for p in self.x_img.iter_mut().chain(self.z_img.iter_mut()) {
            g.conjugate_in_place(p);
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn x_image(&self, q: usize) -> &PauliOperator {
        &self.x_img[q]
    }

    pub fn z_image(&self, q: usize) -> &PauliOperator {
        &self.z_img[q]
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.n)
    }

    /// `C P C†` with exact sign.
    pub fn conjugate(&self, p: &PauliOperator) -> Result<PauliOperator, PauliError> {
        if p.num_qubits() != self.n {
            return Err(PauliError::QubitMismatch { left: self.n, right: p.num_qubits() });
        }
        let mut out = PauliOperator::identity(self.n);
        // Y = i X Z
        let mut extra = p.phase();
        for q in 0..self.n {
            let (x, z) = (p.x_bit(q), p.z_bit(q));
            if x {
                out.mul_assign_right(&self.x_img[q]);
            }
            if z {
                out.mul_assign_right(&self.z_img[q]);
            }
            if x && z {
                extra += 1;
            }
        }
        out.add_phase(extra % 4);
        Ok(out)
    }

    /// Image letters only (phase untracked), by XOR of generator images.
    pub fn conjugate_letters(&self, p: &PauliOperator) -> PauliOperator {
        let mut out = PauliOperator::identity(self.n);
        for q in 0..self.n {
            if p.x_bit(q) {
                out.xor_letters(&self.x_img[q]);
            }
            if p.z_bit(q) {
                out.xor_letters(&self.z_img[q]);
            }
        }
        out
    }

    /// The tableau of `self` followed by `later`.
    pub fn then(&self, later: &CliffordTableau) -> Result<CliffordTableau, PauliError> {
        if later.n != self.n {
            return Err(PauliError::QubitMismatch { left: self.n, right: later.n });
        }
        Ok(CliffordTableau {
            n: self.n,
            x_img: self.x_img.iter().map(|p| later.conjugate(p)).collect::<Result<_, _>>()?,
            z_img: self.z_img.iter().map(|p| later.conjugate(p)).collect::<Result<_, _>>()?,
        })
    }

    /// Inverse via the symplectic dual basis: the preimage of `P` has an `X_j`
    /// factor iff `P` anticommutes with the image of `Z_j`, and a `Z_j` factor
    /// iff it anticommutes with the image of `X_j`.
    pub fn inverse(&self) -> CliffordTableau {
        let pre = |target: &PauliOperator| -> PauliOperator {
            let mut cand = PauliOperator::identity(self.n);
            for j in 0..self.n {
                let xb = target.anticommutes(&self.z_img[j]);
                let zb = target.anticommutes(&self.x_img[j]);
                cand.set_bits(j, xb, zb);
            }
            let img = self.conjugate(&cand).expect("sizes match");
            // img = i^k target  →  cand maps to target after multiplying by i^{-k}
            let k = (img.phase() + 4 - target.phase()) % 4;
            cand.add_phase((4 - k) % 4);
            cand
        };
        let id = Self::identity(self.n);
        CliffordTableau {
            n: self.n,
            x_img: id.x_img.iter().map(pre).collect(),
            z_img: id.z_img.iter().map(pre).collect(),
        }
    }

    /// Checks that the images form a symplectic basis.
    pub fn is_symplectic(&self) -> bool {
        for i in 0..self.n {
            for j in 0..self.n {
                let xx = self.x_img[i].anticommutes(&self.x_img[j]);
                let zz = self.z_img[i].anticommutes(&self.z_img[j]);
                let xz = self.x_img[i].anticommutes(&self.z_img[j]);
                if xx || zz || xz != (i == j) {
                    return false;
                }
            }
        }
        self.x_img.iter().chain(&self.z_img).all(|p| p.is_hermitian())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::DenseMatrix;
    use proptest::prelude::*;

    fn p(s: &str) -> PauliOperator {
        s.parse().unwrap()
    }

    #[test]
    fn hadamard_and_cz_examples() {
        let h = CliffordTableau::from_gates(1, &[Gate::H(0)]);
        assert_eq!(h.conjugate(&p("X")).unwrap(), p("Z"));
        assert_eq!(h.conjugate(&p("Y")).unwrap(), p("-Y"));
        let cz = CliffordTableau::from_gates(2, &[Gate::Cz(0, 1)]);
        assert_eq!(cz.conjugate(&p("XI")).unwrap(), p("XZ"));
        assert_eq!(cz.conjugate(&p("XX")).unwrap(), p("YY"));
    }

    pub(crate) fn arb_gate(n: usize) -> impl Strategy<Value = Gate> {
        (0usize..9, 0..n, 0..n).prop_map(move |(k, a, b)| match k {
            0 => Gate::H(a),
            1 => Gate::S(a),
            2 => Gate::Sdg(a),
            3 => Gate::Sx(a),
            4 => Gate::Sxdg(a),
            5 => Gate::X(a),
            6 => Gate::Y(a),
            7 => Gate::Z(a),
            _ => {
                if a == b {
                    Gate::H(a)
                } else {
                    Gate::Cz(a, b)
                }
            }
        })
    }

    fn arb_pauli(n: usize) -> impl Strategy<Value = PauliOperator> {
        (proptest::collection::vec(0usize..4, n), 0u8..2).prop_map(move |(ls, neg)| {
            let mut q = PauliOperator::identity(n);
            for (i, l) in ls.into_iter().enumerate() {
                q.set(i, [super::super::Letter::I, super::super::Letter::X, super::super::Letter::Y, super::super::Letter::Z][l]);
            }
            if neg == 1 {
                q.negate();
            }
            q
        })
    }

    fn circuit_case() -> impl Strategy<Value = (usize, Vec<Gate>, PauliOperator, PauliOperator)> {
        (1usize..=4).prop_flat_map(|n| {
            (Just(n), proptest::collection::vec(arb_gate(n), 0..20), arb_pauli(n), arb_pauli(n))
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]

        #[test]
        fn conjugation_matches_dense_unitary((n, gates, a, _b) in circuit_case()) {
            let t = CliffordTableau::from_gates(n, &gates);
            let u = DenseMatrix::<f64>::from_gates(n, &gates);
            let want = u.mul(&DenseMatrix::from_pauli(&a)).mul(&u.adjoint());
            let got = t.conjugate(&a).unwrap();
            prop_assert!(want.approx_eq(&DenseMatrix::from_pauli(&got), 1e-10));
            prop_assert!(t.is_symplectic());
        }

        #[test]
        fn conjugation_preserves_commutation((n, gates, a, b) in circuit_case()) {
            let t = CliffordTableau::from_gates(n, &gates);
            prop_assert_eq!(
                a.symplectic_product(&b).unwrap(),
                t.conjugate(&a).unwrap().symplectic_product(&t.conjugate(&b).unwrap()).unwrap()
            );
            prop_assert!(t.conjugate_letters(&a).same_letters(&t.conjugate(&a).unwrap()));
        }

        #[test]
        fn inverse_round_trip((n, gates, a, _b) in circuit_case()) {
            let t = CliffordTableau::from_gates(n, &gates);
            let inv = t.inverse();
            prop_assert_eq!(inv.conjugate(&t.conjugate(&a).unwrap()).unwrap(), a.clone());
            prop_assert!(t.then(&inv).unwrap().is_identity());
            let rev: Vec<Gate> = gates.iter().rev().map(|g| g.inverse()).collect();
            prop_assert_eq!(CliffordTableau::from_gates(n, &rev), inv);
        }
    }
}
