//! Line-oriented text form of a [`LayeredCircuit`]:
//!
//! ```text
//! snt-circuit 1
//! qubits data=4 ancilla=1
//! local S0 XXYY
//! global G0 ZZII
//! step_ends 2
//! CLIFF 0: h 1; cz 0 1; h 1 | ROT 0: rz 1 -0.05 | STEP 0
//! CLIFF 3: h 4; cz 4 0; h 4 | CHECK 0: S0 -> anc4
//! ```

use super::{CircuitError, CliffordLayer, Layer, LayerRole, LayeredCircuit, RotationGate};
use crate::pauli::{Gate, Letter, PauliOperator};
use std::fmt::Write as _;

const MAGIC: &str = "snt-circuit 1";

pub(super) fn print(c: &LayeredCircuit) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{MAGIC}");
    let _ = writeln!(s, "qubits data={} ancilla={}", c.n_data, c.n_ancilla);
    for (k, p) in c.local_stabilizers.iter().enumerate() {
        let _ = writeln!(s, "local S{k} {p}");
    }
    for (k, p) in c.global_stabilizers.iter().enumerate() {
        let _ = writeln!(s, "global G{k} {p}");
    }
    let ends: Vec<String> = c.step_ends.iter().map(|e| e.to_string()).collect();
    let _ = writeln!(s, "step_ends {}", ends.join(" "));
    for (k, layer) in c.layers.iter().enumerate() {
        let gates: Vec<String> = layer.clifford.gates.iter().map(|g| g.to_string()).collect();
        let _ = write!(s, "CLIFF {k}: {}", gates.join("; "));
        match layer.role {
            LayerRole::Evolution { step } => {
                if !layer.rotations.is_empty() {
                    let rots: Vec<String> = layer
                        .rotations
                        .iter()
                        .map(|r| format!("r{} {} {:?}", r.axis.as_char().to_ascii_lowercase(), r.qubit, r.theta))
                        .collect();
                    let _ = write!(s, " | ROT {k}: {}", rots.join("; "));
                }
                let _ = writeln!(s, " | STEP {step}");
            }
            LayerRole::Check { round, stabilizer, ancilla } => {
                let _ = writeln!(s, " | CHECK {round}: S{stabilizer} -> anc{ancilla}");
            }
        }
    }
    s
}

fn err(line: usize, msg: impl Into<String>) -> CircuitError {
    CircuitError::Parse { line, msg: msg.into() }
}

fn parse_rotation(line: usize, t: &str) -> Result<RotationGate, CircuitError> {
    let parts: Vec<&str> = t.split_whitespace().collect();
    let [name, q, th] = parts.as_slice() else {
        return Err(err(line, format!("rotation {t:?} needs axis, qubit and angle")));
    };
    let axis = match *name {
        "rx" => Letter::X,
        "ry" => Letter::Y,
        "rz" => Letter::Z,
        _ => return Err(err(line, format!("unknown rotation {name:?}"))),
    };
    let qubit = q.parse().map_err(|e| err(line, format!("qubit {q:?}: {e}")))?;
    let theta: f64 = th.parse().map_err(|e| err(line, format!("angle {th:?}: {e}")))?;
    Ok(RotationGate { qubit, axis, theta })
}

/// Splits `"TAG k: body"` into (k, body).
fn tagged<'a>(line: usize, part: &'a str, tag: &str) -> Result<(usize, &'a str), CircuitError> {
    let rest = part.trim().strip_prefix(tag).ok_or_else(|| err(line, format!("expected {tag}")))?;
    let (idx, body) = rest.split_once(':').ok_or_else(|| err(line, format!("{tag} needs ':'")))?;
    let idx = idx.trim().parse().map_err(|e| err(line, format!("{tag} index: {e}")))?;
    Ok((idx, body.trim()))
}

pub(super) fn parse(text: &str) -> Result<LayeredCircuit, CircuitError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    match lines.next() {
        Some((_, l)) if l == MAGIC => {}
        Some((i, _)) => return Err(err(i, format!("expected {MAGIC:?}"))),
        None => return Err(err(0, "empty input")),
    }
    let mut c = LayeredCircuit {
        n_data: 0,
        n_ancilla: 0,
        layers: Vec::new(),
        local_stabilizers: Vec::new(),
        global_stabilizers: Vec::new(),
        step_ends: Vec::new(),
    };
    let mut seen_qubits = false;
    for (i, l) in lines {
        let (head, rest) = l.split_once(char::is_whitespace).unwrap_or((l, ""));
        match head {
            "qubits" => {
                for kv in rest.split_whitespace() {
                    let (k, v) = kv.split_once('=').ok_or_else(|| err(i, format!("bad field {kv:?}")))?;
                    let v: usize = v.parse().map_err(|e| err(i, format!("{k}: {e}")))?;
                    match k {
                        "data" => c.n_data = v,
                        "ancilla" => c.n_ancilla = v,
                        _ => return Err(err(i, format!("unknown field {k:?}"))),
                    }
                }
                seen_qubits = true;
            }
            "local" | "global" => {
                let (_, p) = rest.trim().split_once(char::is_whitespace).ok_or_else(|| err(i, "stabilizer needs a name"))?;
                let p: PauliOperator = p.trim().parse().map_err(|e| err(i, format!("{e}")))?;
                if p.num_qubits() != c.n_data {
                    return Err(err(i, format!("stabilizer has {} qubits, data register {}", p.num_qubits(), c.n_data)));
                }
                if head == "local" {
                    c.local_stabilizers.push(p);
                } else {
                    c.global_stabilizers.push(p);
                }
            }
            "step_ends" => {
                c.step_ends = rest
                    .split_whitespace()
                    .map(|t| t.parse().map_err(|e| err(i, format!("step end {t:?}: {e}"))))
                    .collect::<Result<_, _>>()?;
            }
            "CLIFF" => {
                if !seen_qubits {
                    return Err(err(i, "layer before qubits line"));
                }
                let parts: Vec<&str> = l.split('|').collect();
                let (k, body) = tagged(i, parts[0], "CLIFF")?;
                if k != c.layers.len() {
                    return Err(err(i, format!("layer {k} out of order")));
                }
                let gates: Vec<Gate> = body
                    .split(';')
                    .map(str::trim)
                    .filter(|g| !g.is_empty())
                    .map(|g| g.parse::<Gate>().map_err(|e| err(i, e)))
                    .collect::<Result<_, _>>()?;
                let n = c.n_data + c.n_ancilla;
                if let Some(g) = gates.iter().find(|g| g.max_qubit() >= n) {
                    return Err(err(i, format!("gate {g} outside {n} qubits")));
                }
                let mut rotations = Vec::new();
                let mut role = None;
                for part in &parts[1..] {
                    let p = part.trim();
                    if p.starts_with("ROT") {
                        let (_, body) = tagged(i, p, "ROT")?;
                        rotations = body.split(';').map(str::trim).filter(|r| !r.is_empty()).map(|r| parse_rotation(i, r)).collect::<Result<_, _>>()?;
                    } else if let Some(s) = p.strip_prefix("STEP") {
                        let step = s.trim().parse().map_err(|e| err(i, format!("step: {e}")))?;
                        role = Some(LayerRole::Evolution { step });
                    } else if p.starts_with("CHECK") {
                        let (round, body) = tagged(i, p, "CHECK")?;
                        let (st, anc) = body.split_once("->").ok_or_else(|| err(i, "CHECK needs '->'"))?;
                        let stabilizer = st.trim().strip_prefix('S').and_then(|v| v.parse().ok()).ok_or_else(|| err(i, "bad stabilizer"))?;
                        let ancilla = anc.trim().strip_prefix("anc").and_then(|v| v.parse().ok()).ok_or_else(|| err(i, "bad ancilla"))?;
                        role = Some(LayerRole::Check { round, stabilizer, ancilla });
                    } else {
                        return Err(err(i, format!("unknown section {p:?}")));
                    }
                }
                let role = role.ok_or_else(|| err(i, "layer needs STEP or CHECK"))?;
                c.layers.push(Layer { clifford: CliffordLayer::new(gates), rotations, role });
            }
            other => return Err(err(i, format!("unknown directive {other:?}"))),
        }
    }
    if let Some(&e) = c.step_ends.iter().find(|&&e| e >= c.layers.len()) {
        return Err(err(0, format!("step end {e} beyond {} layers", c.layers.len())));
    }
    Ok(c)
}
