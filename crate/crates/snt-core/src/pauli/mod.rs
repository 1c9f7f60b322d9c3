//! Bit-packed Pauli operators, Clifford tableaux and stabilizer states.
//!
//! A [`PauliOperator`] stores one x bit and one z bit per qubit packed into
//! `u64` words, together with a power of `i`. Letters are the Hermitian
//! matrices X, Y, Z; the operator is `i^phase · σ_0 ⊗ σ_1 ⊗ ...`, so a
//! Hermitian operator has an even phase and its sign is `(-1)^(phase/2)`.

mod gate;
mod stabilizer;
mod tableau;

pub use gate::Gate;
pub use stabilizer::StabilizerState;
pub use tableau::CliffordTableau;

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PauliError {
    #[error("qubit count mismatch: {left} vs {right}")]
    QubitMismatch { left: usize, right: usize },
    #[error("qubit index {index} out of range for {n} qubits")]
    QubitOutOfRange { index: usize, n: usize },
    #[error("operator is not Hermitian (phase i^{0})")]
    NonHermitian(u8),
    #[error("cannot parse Pauli string {0:?}")]
    Parse(String),
    #[error("stabilizer generators are invalid: {0}")]
    InvalidGenerators(String),
}

/// Single-qubit Pauli letter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Letter {
    I,
    X,
    Y,
    Z,
}

impl Letter {
    pub const NON_IDENTITY: [Letter; 3] = [Letter::X, Letter::Y, Letter::Z];

    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Letter::I,
            (true, false) => Letter::X,
            (true, true) => Letter::Y,
            (false, true) => Letter::Z,
        }
    }

    pub fn bits(self) -> (bool, bool) {
        match self {
            Letter::I => (false, false),
            Letter::X => (true, false),
            Letter::Y => (true, true),
            Letter::Z => (false, true),
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Letter::I => 'I',
            Letter::X => 'X',
            Letter::Y => 'Y',
            Letter::Z => 'Z',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'I' | 'i' | '_' => Some(Letter::I),
            'X' | 'x' => Some(Letter::X),
            'Y' | 'y' => Some(Letter::Y),
            'Z' | 'z' => Some(Letter::Z),
            _ => None,
        }
    }
}

#[inline]
pub(crate) fn words_for(n: usize) -> usize {
    n.div_ceil(64).max(1)
}

#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct PauliOperator {
    n: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    phase: u8,
}

impl PauliOperator {
    pub fn identity(n: usize) -> Self {
        let w = words_for(n);
        PauliOperator { n, x: vec![0; w], z: vec![0; w], phase: 0 }
    }

    /// Builds an operator from `(qubit, letter)` pairs. Repeated qubits are multiplied.
    pub fn from_letters(n: usize, letters: &[(usize, Letter)]) -> Result<Self, PauliError> {
        let mut p = Self::identity(n);
        for &(q, l) in letters {
            if q >= n {
                return Err(PauliError::QubitOutOfRange { index: q, n });
            }
            let single = Self::single(n, q, l);
            p.mul_assign_right(&single);
        }
        Ok(p)
    }

    /// Single-qubit operator. Panics when `q >= n`.
    pub fn single(n: usize, q: usize, l: Letter) -> Self {
        assert!(q < n, "qubit {q} out of range for {n} qubits");
        let mut p = Self::identity(n);
        p.set(q, l);
        p
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn x_words(&self) -> &[u64] {
        &self.x
    }

    pub fn z_words(&self) -> &[u64] {
        &self.z
    }

    /// Power of `i` multiplying the letter string.
    pub fn phase(&self) -> u8 {
        self.phase
    }

    pub fn is_hermitian(&self) -> bool {
        self.phase % 2 == 0
    }

    /// Sign of a Hermitian representative.
    pub fn sign(&self) -> Result<i8, PauliError> {
        match self.phase {
            0 => Ok(1),
            2 => Ok(-1),
            p => Err(PauliError::NonHermitian(p)),
        }
    }

    pub fn is_negative(&self) -> bool {
        self.phase == 2
    }

    pub fn x_bit(&self, q: usize) -> bool {
        (self.x[q / 64] >> (q % 64)) & 1 == 1
    }

    pub fn z_bit(&self, q: usize) -> bool {
        (self.z[q / 64] >> (q % 64)) & 1 == 1
    }

    pub fn letter(&self, q: usize) -> Letter {
        Letter::from_bits(self.x_bit(q), self.z_bit(q))
    }

    /// Overwrites the letter on `q`; the phase is left untouched.
    pub fn set(&mut self, q: usize, l: Letter) {
        let (xb, zb) = l.bits();
        let (w, b) = (q / 64, q % 64);
        self.x[w] = (self.x[w] & !(1 << b)) | ((xb as u64) << b);
        self.z[w] = (self.z[w] & !(1 << b)) | ((zb as u64) << b);
    }

    pub(crate) fn flip_bits(&mut self, q: usize, xb: bool, zb: bool) {
        let (w, b) = (q / 64, q % 64);
        self.x[w] ^= (xb as u64) << b;
        self.z[w] ^= (zb as u64) << b;
    }

    pub(crate) fn set_bits(&mut self, q: usize, xb: bool, zb: bool) {
        let (w, b) = (q / 64, q % 64);
        self.x[w] = (self.x[w] & !(1 << b)) | ((xb as u64) << b);
        self.z[w] = (self.z[w] & !(1 << b)) | ((zb as u64) << b);
    }

    pub(crate) fn add_phase(&mut self, k: u8) {
        self.phase = (self.phase + k) % 4;
    }

    pub fn weight(&self) -> usize {
        self.x.iter().zip(&self.z).map(|(a, b)| (a | b).count_ones() as usize).sum()
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.n).filter(|&q| self.x_bit(q) || self.z_bit(q)).collect()
    }

    /// True when both masks are empty, whatever the phase.
    pub fn is_trivial(&self) -> bool {
        self.x.iter().all(|&w| w == 0) && self.z.iter().all(|&w| w == 0)
    }

    /// The identity with sign +1.
    pub fn is_identity(&self) -> bool {
        self.is_trivial() && self.phase == 0
    }

    pub fn negated(&self) -> Self {
        let mut p = self.clone();
        p.phase = (p.phase + 2) % 4;
        p
    }

    pub fn negate(&mut self) {
        self.phase = (self.phase + 2) % 4;
    }

    /// Same letters with phase reset to 0.
    pub fn unsigned(&self) -> Self {
        let mut p = self.clone();
        p.phase = 0;
        p
    }

    pub fn same_letters(&self, other: &Self) -> bool {
        self.n == other.n && self.x == other.x && self.z == other.z
    }

    /// Anticommutation test without the qubit-count check. Panics on mismatch in debug builds.
    #[inline]
    pub fn anticommutes(&self, other: &Self) -> bool {
        debug_assert_eq!(self.n, other.n);
        let mut acc = 0u32;
        for i in 0..self.x.len() {
            acc ^= ((self.x[i] & other.z[i]) ^ (self.z[i] & other.x[i])).count_ones();
        }
        acc & 1 == 1
    }

    pub fn commutes_with(&self, other: &Self) -> bool {
        !self.anticommutes(other)
    }

    /// 0 if the operators commute, 1 if they anticommute.
    pub fn symplectic_product(&self, other: &Self) -> Result<u8, PauliError> {
        self.check_same(other)?;
        Ok(self.anticommutes(other) as u8)
    }

    fn check_same(&self, other: &Self) -> Result<(), PauliError> {
        if self.n != other.n {
            return Err(PauliError::QubitMismatch { left: self.n, right: other.n });
        }
        Ok(())
    }

    /// `self · other` with exact phase.
    pub fn multiply(&self, other: &Self) -> Result<Self, PauliError> {
        self.check_same(other)?;
        let mut p = self.clone();
        p.mul_assign_right(other);
        Ok(p)
    }

    /// `self ← self · other`. Qubit counts must agree.
    pub fn mul_assign_right(&mut self, other: &Self) {
        debug_assert_eq!(self.n, other.n);
        let mut plus = 0u32;
        let mut minus = 0u32;
        for i in 0..self.x.len() {
            let (x1, z1, x2, z2) = (self.x[i], self.z[i], other.x[i], other.z[i]);
            let y1 = x1 & z1;
            let xo1 = x1 & !z1;
            let zo1 = z1 & !x1;
            let y2 = x2 & z2;
            let xo2 = x2 & !z2;
            let zo2 = z2 & !x2;
            plus += ((xo1 & y2) | (y1 & zo2) | (zo1 & xo2)).count_ones();
            minus += ((xo1 & zo2) | (y1 & xo2) | (zo1 & y2)).count_ones();
            self.x[i] = x1 ^ x2;
            self.z[i] = z1 ^ z2;
        }
        let k = (self.phase as i64 + other.phase as i64 + plus as i64 - minus as i64).rem_euclid(4);
        self.phase = k as u8;
    }

    /// `self ← other · self`.
    pub fn mul_assign_left(&mut self, other: &Self) {
        let mut p = other.clone();
        p.mul_assign_right(self);
        *self = p;
    }

    /// XOR of the letter masks, ignoring phases. Used by frame propagation.
    #[inline]
    pub fn xor_letters(&mut self, other: &Self) {
        for i in 0..self.x.len() {
            self.x[i] ^= other.x[i];
            self.z[i] ^= other.z[i];
        }
    }

    /// Embeds into a larger register, padding with identities.
    pub fn extended(&self, n: usize) -> Self {
        assert!(n >= self.n);
        let mut p = Self::identity(n);
        p.phase = self.phase;
        for q in 0..self.n {
            p.set_bits(q, self.x_bit(q), self.z_bit(q));
        }
        p
    }

    /// Restricts to the first `n` qubits. Letters beyond `n` are dropped.
    pub fn truncated(&self, n: usize) -> Self {
        let mut p = Self::identity(n);
        p.phase = self.phase;
        for q in 0..n.min(self.n) {
            p.set_bits(q, self.x_bit(q), self.z_bit(q));
        }
        p
    }

    /// Letter string without sign, qubit 0 leftmost.
    pub fn letters_string(&self) -> String {
        (0..self.n).map(|q| self.letter(q).as_char()).collect()
    }
}

impl fmt::Display for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.phase {
            0 => "",
            1 => "i",
            2 => "-",
            _ => "-i",
        };
        write!(f, "{prefix}{}", self.letters_string())
    }
}

impl fmt::Debug for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Pauli({self})")
    }
}

impl FromStr for PauliOperator {
    type Err = PauliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let (phase, body) = if let Some(r) = t.strip_prefix("-i") {
            (3, r)
        } else if let Some(r) = t.strip_prefix("+i") {
            (1, r)
        } else if let Some(r) = t.strip_prefix('-') {
            (2, r)
        } else if let Some(r) = t.strip_prefix('+') {
            (0, r)
        } else if let Some(r) = t.strip_prefix('i') {
            (1, r)
        } else {
            (0, t)
        };
        if body.is_empty() {
            return Err(PauliError::Parse(s.to_string()));
        }
        let mut p = PauliOperator::identity(body.chars().count());
        for (q, c) in body.chars().enumerate() {
            let l = Letter::from_char(c).ok_or_else(|| PauliError::Parse(s.to_string()))?;
            p.set(q, l);
        }
        p.phase = phase;
        Ok(p)
    }
}

impl TryFrom<String> for PauliOperator {
    type Error = PauliError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<PauliOperator> for String {
    fn from(p: PauliOperator) -> String {
        p.to_string()
    }
}

/// Free-function form of [`PauliOperator::symplectic_product`].
pub fn symplectic_product(p: &PauliOperator, q: &PauliOperator) -> Result<u8, PauliError> {
    p.symplectic_product(q)
}

/// Free-function form of [`PauliOperator::multiply`].
pub fn multiply(p: &PauliOperator, q: &PauliOperator) -> Result<PauliOperator, PauliError> {
    p.multiply(q)
}

/// Rank over GF(2) of the letter vectors of `ops`.
pub fn gf2_rank(ops: &[PauliOperator]) -> usize {
    let mut basis = Gf2Basis::new(ops.first().map_or(0, |p| p.num_qubits()));
    for p in ops {
        basis.insert(p);
    }
    basis.rank()
}

/// Incremental GF(2) row basis over symplectic letter vectors.
#[derive(Clone, Debug)]
pub struct Gf2Basis {
    n: usize,
    rows: Vec<(usize, Vec<u64>)>,
}

impl Gf2Basis {
    pub fn new(n: usize) -> Self {
        Gf2Basis { n, rows: Vec::new() }
    }

    fn vector(&self, p: &PauliOperator) -> Vec<u64> {
        let mut v = p.x_words().to_vec();
        v.extend_from_slice(p.z_words());
        v
    }

    fn reduce(&self, mut v: Vec<u64>) -> Vec<u64> {
        for (piv, row) in &self.rows {
            if (v[piv / 64] >> (piv % 64)) & 1 == 1 {
                for (a, b) in v.iter_mut().zip(row) {
                    *a ^= b;
                }
            }
        }
        v
    }

    pub fn contains(&self, p: &PauliOperator) -> bool {
        debug_assert_eq!(p.num_qubits(), self.n);
        self.reduce(self.vector(p)).iter().all(|&w| w == 0)
    }

    /// Returns true when `p` was independent and has been added.
    pub fn insert(&mut self, p: &PauliOperator) -> bool {
        let v = self.reduce(self.vector(p));
        let Some(piv) = first_bit(&v) else {
            return false;
        };
        for (_, row) in self.rows.iter_mut() {
            if (row[piv / 64] >> (piv % 64)) & 1 == 1 {
                for (a, b) in row.iter_mut().zip(&v) {
                    *a ^= b;
                }
            }
        }
        self.rows.push((piv, v));
        true
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }
}

fn first_bit(v: &[u64]) -> Option<usize> {
    v.iter().enumerate().find(|(_, &w)| w != 0).map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
}
