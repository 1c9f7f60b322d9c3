use super::PauliOperator;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Native Clifford gates. CZ is the only two-qubit gate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Gate {
    H(usize),
    S(usize),
    Sdg(usize),
    /// Square root of X, `H·S·H`.
    Sx(usize),
    Sxdg(usize),
    X(usize),
    Y(usize),
    Z(usize),
    Cz(usize, usize),
}

impl Gate {
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::Cz(a, b) => vec![a, b],
            Gate::H(q) | Gate::S(q) | Gate::Sdg(q) | Gate::Sx(q) | Gate::Sxdg(q) | Gate::X(q) | Gate::Y(q) | Gate::Z(q) => {
                vec![q]
            }
        }
    }

    pub fn is_two_qubit(&self) -> bool {
        matches!(self, Gate::Cz(..))
    }

    pub fn inverse(&self) -> Gate {
        match *self {
            Gate::S(q) => Gate::Sdg(q),
            Gate::Sdg(q) => Gate::S(q),
            Gate::Sx(q) => Gate::Sxdg(q),
            Gate::Sxdg(q) => Gate::Sx(q),
            g => g,
        }
    }

    pub fn max_qubit(&self) -> usize {
        self.qubits().into_iter().max().unwrap_or(0)
    }

    /// Relabels qubits through `map`.
    pub fn remapped(&self, map: impl Fn(usize) -> usize) -> Gate {
        match *self {
            Gate::H(q) => Gate::H(map(q)),
            Gate::S(q) => Gate::S(map(q)),
            Gate::Sdg(q) => Gate::Sdg(map(q)),
            Gate::Sx(q) => Gate::Sx(map(q)),
            Gate::Sxdg(q) => Gate::Sxdg(map(q)),
            Gate::X(q) => Gate::X(map(q)),
            Gate::Y(q) => Gate::Y(map(q)),
            Gate::Z(q) => Gate::Z(map(q)),
            Gate::Cz(a, b) => Gate::Cz(map(a), map(b)),
        }
    }

    /// `p ← G p G†` with exact sign.
    #[inline]
    pub fn conjugate_in_place(&self, p: &mut PauliOperator) {
        match *self {
            Gate::H(q) => {
                let (x, z) = (p.x_bit(q), p.z_bit(q));
                if x && z {
                    p.add_phase(2);
                }
                p.set_bits(q, z, x);
            }
            Gate::S(q) => {
                let (x, z) = (p.x_bit(q), p.z_bit(q));
                if x && z {
                    p.add_phase(2);
                }
                p.set_bits(q, x, z ^ x);
            }
            Gate::Sdg(q) => {
                let (x, z) = (p.x_bit(q), p.z_bit(q));
                if x && !z {
                    p.add_phase(2);
                }
                p.set_bits(q, x, z ^ x);
            }
            Gate::Sx(q) => {
                let (x, z) = (p.x_bit(q), p.z_bit(q));
                if z && !x {
                    p.add_phase(2);
                }
                p.set_bits(q, x ^ z, z);
            }
            Gate::Sxdg(q) => {
                let (x, z) = (p.x_bit(q), p.z_bit(q));
                if z && x {
                    p.add_phase(2);
                }
                p.set_bits(q, x ^ z, z);
            }
            Gate::X(q) => {
                if p.z_bit(q) {
                    p.add_phase(2);
                }
            }
            Gate::Y(q) => {
                if p.x_bit(q) != p.z_bit(q) {
                    p.add_phase(2);
                }
            }
            Gate::Z(q) => {
                if p.x_bit(q) {
                    p.add_phase(2);
                }
            }
            Gate::Cz(a, b) => {
                let (xa, za, xb, zb) = (p.x_bit(a), p.z_bit(a), p.x_bit(b), p.z_bit(b));
                if xa && xb && (za ^ zb) {
                    p.add_phase(2);
                }
                p.set_bits(a, xa, za ^ xb);
                p.set_bits(b, xb, zb ^ xa);
            }
        }
    }

    /// Conjugation of the letter masks only; the phase is not tracked.
    #[inline]
    pub fn conjugate_letters(&self, p: &mut PauliOperator) {
        match *self {
            Gate::H(q) => {
                let (x, z) = (p.x_bit(q), p.z_bit(q));
                p.set_bits(q, z, x);
            }
            Gate::S(q) | Gate::Sdg(q) => {
                let x = p.x_bit(q);
                p.flip_bits(q, false, x);
            }
            Gate::Sx(q) | Gate::Sxdg(q) => {
                let z = p.z_bit(q);
                p.flip_bits(q, z, false);
            }
            Gate::X(_) | Gate::Y(_) | Gate::Z(_) => {}
            Gate::Cz(a, b) => {
                let (xa, xb) = (p.x_bit(a), p.x_bit(b));
                p.flip_bits(a, false, xb);
                p.flip_bits(b, false, xa);
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Gate::H(_) => "h",
            Gate::S(_) => "s",
            Gate::Sdg(_) => "sdg",
            Gate::Sx(_) => "sx",
            Gate::Sxdg(_) => "sxdg",
            Gate::X(_) => "x",
            Gate::Y(_) => "y",
            Gate::Z(_) => "z",
            Gate::Cz(..) => "cz",
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Gate::Cz(a, b) => write!(f, "cz {a} {b}"),
            g => write!(f, "{} {}", g.name(), g.qubits()[0]),
        }
    }
}

impl FromStr for Gate {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut it = s.split_whitespace();
        let name = it.next().ok_or_else(|| format!("empty gate in {s:?}"))?;
        let args: Vec<usize> = it
            .map(|t| t.parse::<usize>().map_err(|e| format!("bad qubit {t:?}: {e}")))
            .collect::<Result<_, _>>()?;
        let one = |f: fn(usize) -> Gate| -> Result<Gate, String> {
            match args.as_slice() {
                [q] => Ok(f(*q)),
                _ => Err(format!("gate {name} takes one qubit")),
            }
        };
        match name {
            "h" => one(Gate::H),
            "s" => one(Gate::S),
            "sdg" => one(Gate::Sdg),
            "sx" => one(Gate::Sx),
            "sxdg" => one(Gate::Sxdg),
            "x" => one(Gate::X),
            "y" => one(Gate::Y),
            "z" => one(Gate::Z),
            "cz" => match args.as_slice() {
                [a, b] if a != b => Ok(Gate::Cz(*a, *b)),
                _ => Err("cz takes two distinct qubits".to_string()),
            },
            _ => Err(format!("unknown gate {name:?}")),
        }
    }
}
