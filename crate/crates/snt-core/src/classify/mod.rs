//! Fault propagation and the PS / PP / undetectable partition of a noise model.

use crate::circuits::{LayerRole, LayeredCircuit};
use crate::noise::{NoiseError, NoiseModel};
use crate::dense::StateVector;
use crate::pauli::{CliffordTableau, Letter, PauliOperator};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::io::Write;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ClassifyError {
    #[error("layer {0} does not exist")]
    InvalidLayer(usize),
    #[error("fault acts on {got} qubits, circuit has {want}")]
    Size { got: usize, want: usize },
    #[error("fault is the identity")]
    Identity,
    #[error(transparent)]
    Noise(#[from] NoiseError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FaultClass {
    /// Fires at least one parity check.
    PsDetectable,
    /// Passes every check but anticommutes with a global stabilizer at the end.
    PpDetectable,
    Undetectable,
}

impl FaultClass {
    pub fn name(self) -> &'static str {
        match self {
            FaultClass::PsDetectable => "ps",
            FaultClass::PpDetectable => "pp",
            FaultClass::Undetectable => "undetectable",
        }
    }
}

impl fmt::Display for FaultClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A fault inserted after the Clifford part of `layer`, pushed to the end of the circuit.
#[derive(Clone, Debug, PartialEq)]
pub struct PropagatedError {
    pub layer: usize,
    pub fault: PauliOperator,
    /// (check round, image just before the round's first check layer).
    pub check_images: Vec<(usize, PauliOperator)>,
    /// Image at the end of the circuit, signs dropped.
    pub final_image: PauliOperator,
    /// `true` for every rotation (circuit order) whose angle the fault negates.
    pub angle_flips: Vec<bool>,
}

fn validate(circuit: &LayeredCircuit, layer: usize, p: &PauliOperator) -> Result<(), ClassifyError> {
    if layer >= circuit.num_layers() {
        return Err(ClassifyError::InvalidLayer(layer));
    }
    if p.num_qubits() != circuit.num_qubits() {
        return Err(ClassifyError::Size { got: p.num_qubits(), want: circuit.num_qubits() });
    }
    if p.is_trivial() {
        return Err(ClassifyError::Identity);
    }
    Ok(())
}

/// Pushes `p` from just after layer `layer`'s Clifford through the rest of
/// the circuit. Rotations leave the image alone and only flip their angle
/// when they anticommute with it.
pub fn propagate(circuit: &LayeredCircuit, layer: usize, p: &PauliOperator) -> Result<PropagatedError, ClassifyError> {
    validate(circuit, layer, p)?;
    let layers = circuit.layers();
    let mut angle_flips = vec![false; circuit.num_rotations()];
    let mut r = layers[..layer].iter().map(|l| l.rotations.len()).sum::<usize>();
    let mut check_images = Vec::new();
    let mut img = p.unsigned();
    let mut last_round = None;
    for (l, lay) in layers.iter().enumerate().skip(layer) {
        if l > layer {
            if let LayerRole::Check { round, .. } = lay.role {
                if last_round != Some(round) {
                    check_images.push((round, img.clone()));
                    last_round = Some(round);
                }
            }
            for g in &lay.clifford.gates {
                g.conjugate_letters(&mut img);
            }
        }
        for rot in &lay.rotations {
            angle_flips[r] = img.anticommutes(&rot.axis_pauli(img.num_qubits()));
            r += 1;
        }
    }
    Ok(PropagatedError { layer, fault: p.clone(), check_images, final_image: img, angle_flips })
}

/// Detectability at a point with no Clifford conjugation left to apply.
/// Returns `true` when `p` anticommutes with some element of `stabilizers`.
pub fn classify_at_logical_boundary(p: &PauliOperator, stabilizers: &[PauliOperator]) -> bool {
    stabilizers.iter().any(|s| p.anticommutes(s))
}

/// Classifies faults against precomputed suffix tableaus.
pub struct Classifier {
    suffix: Vec<CliffordTableau>,
    ancilla_mask: Vec<u64>,
    globals: Vec<PauliOperator>,
}

impl Classifier {
    pub fn new(circuit: &LayeredCircuit) -> Self {
        let n = circuit.num_qubits();
        let mut mask = PauliOperator::identity(n);
        for q in circuit.num_data_qubits()..n {
            mask.set(q, Letter::X);
        }
        Classifier {
            suffix: circuit.suffix_tableaus(),
            ancilla_mask: mask.x_words().to_vec(),
            globals: circuit.global_stabilizers().iter().map(|g| circuit.on_all_qubits(g)).collect(),
        }
    }

    /// Image at the end of the circuit of a fault after layer `layer`, signs dropped.
    pub fn final_image(&self, layer: usize, p: &PauliOperator) -> PauliOperator {
        self.suffix[layer + 1].conjugate_letters(p)
    }

    pub fn classify_image(&self, img: &PauliOperator) -> FaultClass {
        if img.x_words().iter().zip(&self.ancilla_mask).any(|(x, m)| x & m != 0) {
            FaultClass::PsDetectable
        } else if classify_at_logical_boundary(img, &self.globals) {
            FaultClass::PpDetectable
        } else {
            FaultClass::Undetectable
        }
    }

    pub fn classify(&self, layer: usize, p: &PauliOperator) -> FaultClass {
        self.classify_image(&self.final_image(layer, p))
    }
}

/// PS-detectable if a check round after the fault fires, PP-detectable if
/// only a global stabilizer sees it, otherwise undetectable.
pub fn classify_fault(circuit: &LayeredCircuit, layer: usize, p: &PauliOperator) -> Result<FaultClass, ClassifyError> {
    let prop = propagate(circuit, layer, p)?;
    Ok(Classifier::new(circuit).classify_image(&prop.final_image))
}

/// Brute-force reference for small circuits: prepares a state in the joint
/// +1 eigenspace of all stabilizers (ancillas in `|0⟩`), runs the circuit with
/// the fault, then projects onto passing checks and onto the global
/// stabilizers. A vanishing norm at either stage means detection. Returns
/// `None` when the norm is neither 0 nor 1, or the stabilizers admit no
/// common eigenstate.
pub fn classify_dense(circuit: &LayeredCircuit, layer: usize, p: &PauliOperator) -> Option<FaultClass> {
    validate(circuit, layer, p).ok()?;
    let nd = circuit.num_data_qubits();
    let mut gens: Vec<PauliOperator> = circuit.local_stabilizers().to_vec();
    gens.extend_from_slice(circuit.global_stabilizers());
    let psi = StateVector::<f64>::from_stabilizers(nd, &gens)?;
    let mut psi = psi.with_ancillas(circuit.num_ancillas());
    circuit.apply_to_state(&mut psi, None, &[(layer, p.clone())]);
    let n = circuit.num_qubits();
    let decide = |v: f64| -> Option<bool> {
        if v < 1e-9 {
            Some(true)
        } else if (v - 1.0).abs() < 1e-9 {
            Some(false)
        } else {
            None
        }
    };
    for a in nd..n {
        psi.project(&PauliOperator::single(n, a, Letter::Z), 1);
    }
    if decide(psi.norm_sqr())? {
        return Some(FaultClass::PsDetectable);
    }
    for g in circuit.global_stabilizers() {
        psi.project(&circuit.on_all_qubits(g), 1);
    }
    if decide(psi.norm_sqr())? {
        return Some(FaultClass::PpDetectable);
    }
    Some(FaultClass::Undetectable)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LayerPartition {
    /// Class of each channel entry, in channel order.
    pub classes: Vec<FaultClass>,
    pub ps_mass: f64,
    pub pp_mass: f64,
    /// Undetectable mass `η_k`.
    pub eta: f64,
}

impl LayerPartition {
    pub fn epsilon(&self) -> f64 {
        self.ps_mass + self.pp_mass + self.eta
    }

    pub fn indices(&self, class: FaultClass) -> impl Iterator<Item = usize> + '_ {
        self.classes.iter().enumerate().filter(move |(_, &c)| c == class).map(|(i, _)| i)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoisePartition {
    pub layers: Vec<LayerPartition>,
    check_layer: Vec<bool>,
    pub r_ps: f64,
    pub r_pp: f64,
    /// False when evolution layers carry no noise, so the ratios are reported as 0.
    pub ratios_defined: bool,
}

impl NoisePartition {
    pub fn r(&self) -> f64 {
        self.r_ps + self.r_pp
    }

    pub fn is_check_layer(&self, layer: usize) -> bool {
        self.check_layer[layer]
    }

    /// `Σ_k η_k` over evolution layers.
    pub fn total_eta(&self) -> f64 {
        self.layers.iter().zip(&self.check_layer).filter(|(_, &c)| !c).map(|(l, _)| l.eta).sum()
    }

    /// One row per channel entry: `layer,pauli,class,probability`.
    pub fn write_csv<W: Write>(&self, model: &NoiseModel, mut w: W) -> Result<(), ClassifyError> {
        writeln!(w, "layer,pauli,class,probability")?;
        for (l, (lp, ch)) in self.layers.iter().zip(model.channels()).enumerate() {
            for (c, (p, prob)) in lp.classes.iter().zip(ch.entries()) {
                writeln!(w, "{l},{},{c},{prob:?}", p.letters_string())?;
            }
        }
        Ok(())
    }
}

/// Classifies every channel entry. Check layers are partitioned too but
/// left out of `R_PS` and `R_PP`.
pub fn partition(circuit: &LayeredCircuit, model: &NoiseModel) -> Result<NoisePartition, ClassifyError> {
    model.check_matches(circuit)?;
    let cl = Classifier::new(circuit);
    let layers: Vec<LayerPartition> = model
        .channels()
        .par_iter()
        .enumerate()
        .map(|(l, ch)| {
            let mut lp = LayerPartition::default();
            for (p, prob) in ch.entries() {
                let c = cl.classify(l, p);
                match c {
                    FaultClass::PsDetectable => lp.ps_mass += prob,
                    FaultClass::PpDetectable => lp.pp_mass += prob,
                    FaultClass::Undetectable => lp.eta += prob,
                }
                lp.classes.push(c);
            }
            lp
        })
        .collect();
    let check_layer: Vec<bool> = (0..circuit.num_layers()).map(|l| model.is_check_layer(l)).collect();
    let (mut ps, mut pp, mut tot) = (0.0, 0.0, 0.0);
    for (lp, &chk) in layers.iter().zip(&check_layer) {
        if !chk {
            ps += lp.ps_mass;
            pp += lp.pp_mass;
            tot += lp.epsilon();
        }
    }
    let defined = tot > 0.0;
    Ok(NoisePartition {
        layers,
        check_layer,
        r_ps: if defined { ps / tot } else { 0.0 },
        r_pp: if defined { pp / tot } else { 0.0 },
        ratios_defined: defined,
    })
}
