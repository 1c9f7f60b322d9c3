//! Simulation and analysis of subspace noise tailoring on Trotterized
//! Fermi-Hubbard circuits.

pub mod circuits;
pub mod classify;
pub mod dense;
pub mod encodings;
pub mod engine;
pub mod experiment;
pub mod noise;
pub mod pauli;
pub mod qem;
pub mod resource;
pub mod rng;
pub mod scalar;
pub mod stats;

pub use pauli::{CliffordTableau, Gate, Letter, PauliError, PauliOperator, StabilizerState};
pub use scalar::Real;

pub type StateVectorF64 = dense::StateVector<f64>;
pub type StateVectorF32 = dense::StateVector<f32>;
