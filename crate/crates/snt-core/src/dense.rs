//! Dense matrices and statevectors. The statevector backend runs on these, and
//! the test oracles use them for exact cross-checks on a few qubits.
//!
//! Basis index bit `q` holds the computational state of qubit `q`.

use crate::pauli::{Gate, Letter, PauliOperator};
use crate::scalar::Real;
use num_complex::Complex;

fn pauli_action<T: Real>(p: &PauliOperator) -> (usize, usize, Complex<T>, usize) {
    let n = p.num_qubits();
    assert!(n <= 30, "dense representation limited to 30 qubits");
    let mut xm = 0usize;
    let mut zm = 0usize;
    let mut ny = 0usize;
    for q in 0..n {
        if p.x_bit(q) {
            xm |= 1 << q;
        }
        if p.z_bit(q) {
            zm |= 1 << q;
        }
        if p.x_bit(q) && p.z_bit(q) {
            ny += 1;
        }
    }
    let k = (ny + p.phase() as usize) % 4;
    let c = i_pow::<T>(k);
    (xm, zm, c, n)
}

fn i_pow<T: Real>(k: usize) -> Complex<T> {
    match k % 4 {
        0 => Complex::new(T::one(), T::zero()),
        1 => Complex::new(T::zero(), T::one()),
        2 => Complex::new(-T::one(), T::zero()),
        _ => Complex::new(T::zero(), -T::one()),
    }
}

/// Square complex matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix<T: Real> {
    dim: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> DenseMatrix<T> {
    pub fn zeros(dim: usize) -> Self {
        DenseMatrix { dim, data: vec![Complex::new(T::zero(), T::zero()); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = Complex::new(T::one(), T::zero());
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, r: usize, c: usize) -> Complex<T> {
        self.data[r * self.dim + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Complex<T>) {
        self.data[r * self.dim + c] = v;
    }

    pub fn from_pauli(p: &PauliOperator) -> Self {
        let (xm, zm, c, n) = pauli_action::<T>(p);
        let dim = 1usize << n;
        let mut m = Self::zeros(dim);
        for b in 0..dim {
            let s = if (b & zm).count_ones() % 2 == 1 { -c } else { c };
            m.set(b ^ xm, b, s);
        }
        m
    }

    /// Unitary of `gates` applied in order, built column by column.
    pub fn from_gates(n: usize, gates: &[Gate]) -> Self {
        let dim = 1usize << n;
        let mut m = Self::zeros(dim);
        for col in 0..dim {
            let mut v = StateVector::<T>::basis(n, col);
            for g in gates {
                v.apply_gate(g);
            }
            for r in 0..dim {
                m.set(r, col, v.amps[r]);
            }
        }
        m
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.dim, o.dim);
        let d = self.dim;
        let mut out = Self::zeros(d);
        for i in 0..d {
            for k in 0..d {
                let a = self.data[i * d + k];
                if a.norm_sqr() == T::zero() {
                    continue;
                }
                for j in 0..d {
                    out.data[i * d + j] = out.data[i * d + j] + a * o.data[k * d + j];
                }
            }
        }
        out
    }

    pub fn add(&self, o: &Self) -> Self {
        DenseMatrix { dim: self.dim, data: self.data.iter().zip(&o.data).map(|(a, b)| a + b).collect() }
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        DenseMatrix { dim: self.dim, data: self.data.iter().map(|a| a * s).collect() }
    }

    pub fn adjoint(&self) -> Self {
        let d = self.dim;
        let mut out = Self::zeros(d);
        for i in 0..d {
            for j in 0..d {
                out.data[j * d + i] = self.data[i * d + j].conj();
            }
        }
        out
    }

    pub fn kron(&self, o: &Self) -> Self {
        // self acts on the high bits
        let d = self.dim * o.dim;
        let mut out = Self::zeros(d);
        for i in 0..self.dim {
            for j in 0..self.dim {
                let a = self.get(i, j);
                for k in 0..o.dim {
                    for l in 0..o.dim {
                        out.set(i * o.dim + k, j * o.dim + l, a * o.get(k, l));
                    }
                }
            }
        }
        out
    }

    pub fn max_abs_diff(&self, o: &Self) -> T {
        self.data.iter().zip(&o.data).map(|(a, b)| (a - b).norm()).fold(T::zero(), T::max)
    }

    pub fn approx_eq(&self, o: &Self, tol: f64) -> bool {
        self.dim == o.dim && self.max_abs_diff(o).as_f64() <= tol
    }

    /// Equality up to a global phase.
    pub fn approx_eq_up_to_phase(&self, o: &Self, tol: f64) -> bool {
        if self.dim != o.dim {
            return false;
        }
        let Some(idx) = (0..self.data.len()).max_by(|&a, &b| {
            o.data[a].norm().partial_cmp(&o.data[b].norm()).unwrap_or(std::cmp::Ordering::Equal)
        }) else {
            return true;
        };
        if o.data[idx].norm().as_f64() < tol {
            return self.max_abs_diff(o).as_f64() <= tol;
        }
        let ph = self.data[idx] / o.data[idx];
        if (ph.norm().as_f64() - 1.0).abs() > tol {
            return false;
        }
        self.approx_eq(&o.scale(ph), tol)
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.dim).map(|i| self.get(i, i)).fold(Complex::new(T::zero(), T::zero()), |a, b| a + b)
    }

    pub fn apply(&self, v: &[Complex<T>]) -> Vec<Complex<T>> {
        let d = self.dim;
        (0..d)
            .map(|i| (0..d).fold(Complex::new(T::zero(), T::zero()), |acc, k| acc + self.data[i * d + k] * v[k]))
            .collect()
    }

    /// `exp(-i t H)` for Hermitian `H` by scaling and squaring a Taylor series.
    pub fn expm_neg_i(&self, t: T) -> Self {
        let a = self.scale(Complex::new(T::zero(), -t));
        let norm = a.data.iter().map(|z| z.norm()).fold(T::zero(), |x, y| x + y);
        let mut s = 0u32;
        let mut scaled = norm;
        while scaled > T::of(0.25) {
            scaled = scaled / T::of(2.0);
            s += 1;
        }
        let a = a.scale(Complex::new(T::one() / T::of(2f64.powi(s as i32)), T::zero()));
        let mut term = Self::identity(self.dim);
        let mut sum = Self::identity(self.dim);
        for k in 1..30 {
            term = term.mul(&a).scale(Complex::new(T::one() / T::of(k as f64), T::zero()));
            sum = sum.add(&term);
        }
        for _ in 0..s {
            sum = sum.mul(&sum);
        }
        sum
    }
}

/// Dense `2^n` amplitude vector.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector<T: Real> {
    n: usize,
    amps: Vec<Complex<T>>,
}

impl<T: Real> StateVector<T> {
    /// The normalized state stabilized by `gens` (a complete independent
    /// commuting set), obtained by projecting a fixed generic vector.
    pub fn from_stabilizers(n: usize, gens: &[PauliOperator]) -> Option<Self> {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed);
        let amps = (0..1usize << n).map(|_| Complex::new(T::of(rng.gen::<f64>() - 0.5), T::of(rng.gen::<f64>() - 0.5))).collect();
        let mut v = StateVector { n, amps };
        v.normalize();
        for g in gens {
            v.project(g, 1);
        }
        if v.norm_sqr().as_f64() < 1e-10 {
            return None;
        }
        v.normalize();
        Some(v)
    }

    pub fn zero(n: usize) -> Self {
        Self::basis(n, 0)
    }

    pub fn basis(n: usize, index: usize) -> Self {
        let mut amps = vec![Complex::new(T::zero(), T::zero()); 1 << n];
        amps[index] = Complex::new(T::one(), T::zero());
        StateVector { n, amps }
    }

    pub fn from_amplitudes(n: usize, amps: Vec<Complex<T>>) -> Self {
        assert_eq!(amps.len(), 1 << n);
        StateVector { n, amps }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> T {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalize(&mut self) -> T {
        let n = self.norm_sqr().sqrt();
        if n > T::zero() {
            for a in &mut self.amps {
                *a = *a / n;
            }
        }
        n
    }

    pub fn inner(&self, o: &Self) -> Complex<T> {
        self.amps.iter().zip(&o.amps).fold(Complex::new(T::zero(), T::zero()), |acc, (a, b)| acc + a.conj() * b)
    }

    /// `|⟨self|o⟩| ≈ 1` for normalized states.
    pub fn approx_eq_up_to_phase(&self, o: &Self, tol: f64) -> bool {
        (self.inner(o).norm().as_f64() - 1.0).abs() <= tol
    }

    fn apply_1q(&mut self, q: usize, m: [[Complex<T>; 2]; 2]) {
        let bit = 1usize << q;
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let a0 = self.amps[i];
                let a1 = self.amps[i | bit];
                self.amps[i] = m[0][0] * a0 + m[0][1] * a1;
                self.amps[i | bit] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
    }

    pub fn apply_gate(&mut self, g: &Gate) {
        let o = T::zero();
        let l = T::one();
        let h = T::FRAC_1_SQRT_2();
        let c = |re: T, im: T| Complex::new(re, im);
        let half = T::of(0.5);
        match *g {
            Gate::H(q) => self.apply_1q(q, [[c(h, o), c(h, o)], [c(h, o), c(-h, o)]]),
            Gate::S(q) => self.apply_1q(q, [[c(l, o), c(o, o)], [c(o, o), c(o, l)]]),
            Gate::Sdg(q) => self.apply_1q(q, [[c(l, o), c(o, o)], [c(o, o), c(o, -l)]]),
            Gate::Sx(q) => self.apply_1q(q, [[c(half, half), c(half, -half)], [c(half, -half), c(half, half)]]),
            Gate::Sxdg(q) => self.apply_1q(q, [[c(half, -half), c(half, half)], [c(half, half), c(half, -half)]]),
            Gate::X(q) => self.apply_1q(q, [[c(o, o), c(l, o)], [c(l, o), c(o, o)]]),
            Gate::Y(q) => self.apply_1q(q, [[c(o, o), c(o, -l)], [c(o, l), c(o, o)]]),
            Gate::Z(q) => self.apply_1q(q, [[c(l, o), c(o, o)], [c(o, o), c(-l, o)]]),
            Gate::Cz(a, b) => {
                let m = (1usize << a) | (1usize << b);
                for (i, amp) in self.amps.iter_mut().enumerate() {
                    if i & m == m {
                        *amp = -*amp;
                    }
                }
            }
        }
    }

    /// `|ψ⟩ ← P|ψ⟩`.
    pub fn apply_pauli(&mut self, p: &PauliOperator) {
        let (xm, zm, c, _) = pauli_action::<T>(p);
        let mut out = vec![Complex::new(T::zero(), T::zero()); self.amps.len()];
        for (b, a) in self.amps.iter().enumerate() {
            let s = if (b & zm).count_ones() % 2 == 1 { -c } else { c };
            out[b ^ xm] = s * a;
        }
        self.amps = out;
    }

    /// `exp(-i θ/2 P)`.
    pub fn apply_pauli_rotation(&mut self, p: &PauliOperator, theta: T) {
        let half = theta / T::of(2.0);
        let mut pv = self.clone();
        pv.apply_pauli(p);
        let (cs, sn) = (half.cos(), half.sin());
        let mi = Complex::new(T::zero(), -sn);
        for (a, b) in self.amps.iter_mut().zip(&pv.amps) {
            *a = *a * cs + mi * b;
        }
    }

    /// Single-qubit rotation `exp(-i θ/2 σ)` about `axis`.
    pub fn apply_rotation(&mut self, q: usize, axis: Letter, theta: T) {
        let half = theta / T::of(2.0);
        let (cs, sn) = (half.cos(), half.sin());
        let o = T::zero();
        let c = |re: T, im: T| Complex::new(re, im);
        let m = match axis {
            Letter::I => return,
            Letter::X => [[c(cs, o), c(o, -sn)], [c(o, -sn), c(cs, o)]],
            Letter::Y => [[c(cs, o), c(-sn, o)], [c(sn, o), c(cs, o)]],
            Letter::Z => [[c(cs, -sn), c(o, o)], [c(o, o), c(cs, sn)]],
        };
        self.apply_1q(q, m);
    }

    /// Real part of `⟨ψ|P|ψ⟩`.
    pub fn expectation(&self, p: &PauliOperator) -> T {
        let (xm, zm, c, _) = pauli_action::<T>(p);
        let mut acc = Complex::new(T::zero(), T::zero());
        for (b, a) in self.amps.iter().enumerate() {
            let s = if (b & zm).count_ones() % 2 == 1 { -c } else { c };
            acc = acc + self.amps[b ^ xm].conj() * s * a;
        }
        acc.re
    }

    /// `|ψ⟩ ← (1 + s P)/2 |ψ⟩`, unnormalized.
    pub fn project(&mut self, p: &PauliOperator, s: i8) {
        let mut pv = self.clone();
        pv.apply_pauli(p);
        let half = T::of(0.5);
        let sg = if s >= 0 { T::one() } else { -T::one() };
        for (a, b) in self.amps.iter_mut().zip(&pv.amps) {
            *a = (*a + *b * sg) * half;
        }
    }

    /// Extends by `k` fresh qubits in `|0⟩` at the high end.
    pub fn with_ancillas(&self, k: usize) -> Self {
        let mut amps = vec![Complex::new(T::zero(), T::zero()); 1 << (self.n + k)];
        amps[..self.amps.len()].copy_from_slice(&self.amps);
        StateVector { n: self.n + k, amps }
    }
}
