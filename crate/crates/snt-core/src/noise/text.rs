//! Text form of a [`NoiseModel`]:
//!
//! ```text
//! snt-noise 1
//! qubits 5 measurements 1 meas_error 0.001
//! layer 0 evolution
//! XXIII 0.0001
//! layer 1 check
//! ```
//!
//! Every circuit layer gets a `layer` header, possibly with no entries.

use super::{LayerNoiseChannel, NoiseError, NoiseModel};
use crate::pauli::PauliOperator;
use std::fmt::Write as _;

const MAGIC: &str = "snt-noise 1";

pub(super) fn print(m: &NoiseModel) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{MAGIC}");
    let _ = writeln!(s, "qubits {} measurements {} meas_error {:?}", m.n_qubits, m.n_meas, m.meas_error);
    for (l, (ch, &chk)) in m.channels.iter().zip(&m.check_layer).enumerate() {
        let _ = writeln!(s, "layer {l} {}", if chk { "check" } else { "evolution" });
        for (p, prob) in &ch.entries {
            let _ = writeln!(s, "{} {prob:?}", p.letters_string());
        }
    }
    s
}

fn err(line: usize, msg: impl Into<String>) -> NoiseError {
    NoiseError::Parse { line, msg: msg.into() }
}

fn num<T: std::str::FromStr>(line: usize, what: &str, v: Option<&str>) -> Result<T, NoiseError>
where
    T::Err: std::fmt::Display,
{
    let v = v.ok_or_else(|| err(line, format!("missing {what}")))?;
    v.parse().map_err(|e| err(line, format!("{what} {v:?}: {e}")))
}

pub(super) fn parse(text: &str) -> Result<NoiseModel, NoiseError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    match lines.next() {
        Some((_, l)) if l == MAGIC => {}
        Some((i, _)) => return Err(err(i, format!("expected {MAGIC:?}"))),
        None => return Err(err(0, "empty input")),
    }
    let (i, header) = lines.next().ok_or_else(|| err(0, "missing qubits line"))?;
    let f: Vec<&str> = header.split_whitespace().collect();
    if f.len() != 6 || f[0] != "qubits" || f[2] != "measurements" || f[4] != "meas_error" {
        return Err(err(i, "expected `qubits N measurements M meas_error E`"));
    }
    let n_qubits: usize = num(i, "qubits", Some(f[1]))?;
    let n_meas: usize = num(i, "measurements", Some(f[3]))?;
    let meas_error: f64 = num(i, "meas_error", Some(f[5]))?;
    if !(0.0..1.0).contains(&meas_error) {
        return Err(err(i, format!("meas_error {meas_error} outside [0,1)")));
    }
    let mut channels: Vec<Vec<(PauliOperator, f64)>> = Vec::new();
    let mut check_layer = Vec::new();
    for (i, l) in lines {
        let mut parts = l.split_whitespace();
        let head = parts.next().unwrap_or_default();
        if head == "layer" {
            let k: usize = num(i, "layer index", parts.next())?;
            if k != channels.len() {
                return Err(err(i, format!("layer {k} out of order")));
            }
            let chk = match parts.next() {
                Some("check") => true,
                Some("evolution") => false,
                other => return Err(err(i, format!("bad layer kind {other:?}"))),
            };
            channels.push(Vec::new());
            check_layer.push(chk);
        } else {
            let cur = channels.last_mut().ok_or_else(|| err(i, "entry before first layer"))?;
            let p: PauliOperator = head.parse().map_err(|e| err(i, format!("{e}")))?;
            if p.num_qubits() != n_qubits {
                return Err(err(i, format!("Pauli on {} qubits, model has {n_qubits}", p.num_qubits())));
            }
            let prob: f64 = num(i, "probability", parts.next())?;
            cur.push((p, prob));
        }
    }
    let channels = channels.into_iter().map(LayerNoiseChannel::new).collect::<Result<Vec<_>, _>>()?;
    Ok(NoiseModel { n_qubits, channels, check_layer, meas_error, n_meas })
}
