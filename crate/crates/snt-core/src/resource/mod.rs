//! Resource estimation: predicted RMSE of mitigated Trotter simulations on
//! larger lattices, strategy selection, and the largest Trotter depth or
//! smallest gate fidelity compatible with a target accuracy.
//!
//! Costs come from the two-qubit gate count and per-encoding cost exponents,
//! biases from power-law fits to small-lattice simulation data, and variances
//! from the grouped-zero circuit sampling bound.

mod data;

use crate::encodings::{tqg_count_formula, Dim, EncodingError, EncodingKind, LatticeSpec};
use crate::noise::entanglement_fidelity;
use crate::qem::QemProtocol;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::OnceLock;
use thiserror::Error;

pub use data::{SWEEP, SWEEP_CIRCUITS};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ResourceError {
    #[error("invalid {field}: {msg}")]
    Invalid { field: &'static str, msg: String },
    #[error("fit needs at least 4 points spanning a decade in λ, got {points} points over a factor {span:.2}")]
    InsufficientSpan { points: usize, span: f64 },
    #[error("no bias model for {0} with {1}")]
    MissingModel(EncodingKind, &'static str),
    #[error("protocol {0} is not covered by the resource model")]
    Protocol(&'static str),
    #[error("target RMSE {target} is below the shot-noise floor {floor:.4e}")]
    Unreachable { target: f64, floor: f64 },
    #[error(transparent)]
    Encoding(#[from] EncodingError),
}

fn invalid(field: &'static str, msg: impl Into<String>) -> ResourceError {
    ResourceError::Invalid { field, msg: msg.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HardwareProfile {
    /// Average two-qubit gate fidelity.
    pub f_avg: f64,
    /// Ancilla readout error probability.
    pub eps_meas: f64,
    /// Shots per second.
    pub shot_rate: f64,
    pub n_shots: f64,
    pub n_circuits: f64,
}

impl HardwareProfile {
    /// 12 hours at 1 kHz, one new circuit instance per 100 shots.
    pub fn twelve_hours(f_avg: f64) -> Self {
        let n_shots = 1000.0 * 12.0 * 3600.0;
        HardwareProfile { f_avg, eps_meas: 1e-3, shot_rate: 1000.0, n_shots, n_circuits: n_shots / 100.0 }
    }

    pub fn with_fidelity(self, f_avg: f64) -> Self {
        HardwareProfile { f_avg, ..self }
    }

    pub fn with_circuits(self, n_circuits: f64) -> Self {
        HardwareProfile { n_circuits, ..self }
    }

    pub fn wall_time_hours(&self) -> f64 {
        self.n_shots / self.shot_rate / 3600.0
    }

    pub fn validate(&self) -> Result<(), ResourceError> {
        if !(self.f_avg > 0.25 && self.f_avg <= 1.0) {
            return Err(invalid("f_avg", format!("{} outside (0.25, 1]", self.f_avg)));
        }
        if !(0.0..0.5).contains(&self.eps_meas) {
            return Err(invalid("eps_meas", format!("{} outside [0, 0.5)", self.eps_meas)));
        }
        if !(self.shot_rate > 0.0 && self.shot_rate.is_finite()) {
            return Err(invalid("shot_rate", format!("{}", self.shot_rate)));
        }
        if !(self.n_circuits >= 2.0 && self.n_shots >= self.n_circuits && self.n_shots.is_finite()) {
            return Err(invalid("n_shots/n_circuits", format!("need 2 ≤ N_circuits ≤ N_shots, got {} and {}", self.n_circuits, self.n_shots)));
        }
        Ok(())
    }
}

/// Squared bias a²·x^{2e} + b as a function of an error rate x.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiasModel {
    pub a: f64,
    pub b: f64,
    pub exponent: f64,
}

impl BiasModel {
    pub const ZERO: BiasModel = BiasModel { a: 0.0, b: 0.0, exponent: 1.0 };

    pub fn squared_bias(&self, x: f64) -> f64 {
        if self.a == 0.0 {
            return self.b;
        }
        self.a * self.a * x.max(0.0).powf(2.0 * self.exponent) + self.b
    }
}

/// Grid scan followed by golden-section refinement around the best grid point.
fn minimize_1d(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> (f64, f64) {
    const GRID: usize = 48;
    let step = (hi - lo) / GRID as f64;
    let (mut best_i, mut best) = (0, f64::INFINITY);
    for i in 0..=GRID {
        let v = f(lo + step * i as f64);
        if v < best {
            best = v;
            best_i = i;
        }
    }
    let mut a = lo + step * best_i.saturating_sub(1) as f64;
    let mut b = (lo + step * (best_i + 1) as f64).min(hi);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..40 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let x = (a + b) / 2.0;
    let v = f(x);
    if v < best {
        (x, v)
    } else {
        (lo + step * best_i as f64, best)
    }
}

/// Least-squares fit of squared bias = a²x^{2e} + b in log space.
///
/// Points are `(x, Θ)`. Values below `floor` (including negative Θ from
/// unresolved points) are clipped to it, and b is constrained to `b ≥ floor`,
/// so noiseless data give a = 0, b = floor. `exponent = None` fits e as well.
pub fn fit_bias_model(points: &[(f64, f64)], exponent: Option<f64>, floor: f64) -> Result<BiasModel, ResourceError> {
    if !(floor > 0.0) {
        return Err(invalid("floor", format!("{floor} must be positive")));
    }
    if points.iter().any(|&(x, t)| !(x > 0.0) || !t.is_finite()) {
        return Err(invalid("points", "error rates must be positive and Θ finite"));
    }
    let (lo, hi) = points.iter().fold((f64::INFINITY, 0f64), |(l, h), &(x, _)| (l.min(x), h.max(x)));
    let span = if points.is_empty() { 1.0 } else { hi / lo };
    if points.len() < 4 || span < 10.0 {
        return Err(ResourceError::InsufficientSpan { points: points.len(), span });
    }
    if let Some(e) = exponent {
        if !(e > 0.0) {
            return Err(invalid("exponent", format!("{e}")));
        }
    }
    let ys: Vec<(f64, f64)> = points.iter().map(|&(x, t)| (x.ln(), t.max(floor).ln())).collect();
    let y_max = ys.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let ln_floor = floor.ln();
    const LN_A2_MIN: f64 = -80.0;
    let resid = |ln_a2: f64, ln_b: f64, e: f64| -> f64 {
        ys.iter()
            .map(|&(lx, y)| {
                let m = ln_a2 + 2.0 * e * lx;
                let model = m.max(ln_b) + (-(m - ln_b).abs()).exp().ln_1p();
                (model - y).powi(2)
            })
            .sum()
    };
    let inner = |e: f64| -> (f64, f64, f64) {
        let (ln_b, v) = minimize_1d(|ln_b| minimize_1d(|la| resid(la, ln_b, e), LN_A2_MIN, 20.0).1, ln_floor, y_max.max(ln_floor) + 1e-9);
        let (ln_a2, _) = minimize_1d(|la| resid(la, ln_b, e), LN_A2_MIN, 20.0);
        (ln_a2, ln_b, v)
    };
    let (e, (ln_a2, ln_b, _)) = match exponent {
        Some(e) => (e, inner(e)),
        None => {
            let (e, _) = minimize_1d(|e| inner(e).2, 0.25, 4.0);
            (e, inner(e))
        }
    };
    let b = if ln_b - ln_floor < 1e-9 { floor } else { ln_b.exp() };
    // a power law that stays far below b over the whole data range is not resolved
    let a = if ln_a2 + 2.0 * e * hi.ln() < ln_b - 20.0 { 0.0 } else { (ln_a2 / 2.0).exp() };
    Ok(BiasModel { a, b, exponent: e })
}

/// Cost exponents β (C = α·e^{βλ}) and detectable fraction R of one encoding.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EncodingCosts {
    pub beta_sv: f64,
    pub beta_snt: f64,
    pub detectable: f64,
}

/// Cost exponent of full PEC under depolarizing noise.
pub const BETA_PEC: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostTable(pub BTreeMap<EncodingKind, EncodingCosts>);

impl CostTable {
    /// Published values: β_SV from the per-site SV cost coefficients, β_SNT and R
    /// from the 4-site Clifford benchmark.
    pub fn published() -> Self {
        let t = [
            (EncodingKind::Jw, 0.65, 1.3, 0.64),
            (EncodingKind::Le, 0.45, 0.70, 0.91),
            (EncodingKind::Vc, 0.47, 0.77, 0.88),
            (EncodingKind::Dk, 0.43, 0.81, 0.83),
            (EncodingKind::Hx, 0.46, 0.66, 0.93),
        ];
        CostTable(t.into_iter().map(|(k, sv, snt, r)| (k, EncodingCosts { beta_sv: sv, beta_snt: snt, detectable: r })).collect())
    }

    /// Values extracted by this crate: β averaged over the `SWEEP` points with
    /// 0.1 < λ ≤ 1, R from classifying the 4-site chains.
    pub fn extracted() -> Self {
        let t = [
            (EncodingKind::Jw, 0.600, 1.359, 0.631),
            (EncodingKind::Le, 0.507, 0.659, 0.928),
            (EncodingKind::Vc, 0.532, 0.747, 0.911),
            (EncodingKind::Dk, 0.515, 0.923, 0.804),
            (EncodingKind::Hx, 0.534, 0.614, 0.967),
        ];
        CostTable(t.into_iter().map(|(k, sv, snt, r)| (k, EncodingCosts { beta_sv: sv, beta_snt: snt, detectable: r })).collect())
    }

    /// Extracted values where present, published ones otherwise.
    pub fn get(&self, kind: EncodingKind) -> EncodingCosts {
        self.0.get(&kind).copied().unwrap_or_else(|| Self::published().0[&kind])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObservableKind {
    /// Site occupations n = (1 − Z)/2: single-shot variance ≤ 1/4.
    Occupation,
    /// Pauli expectation values: single-shot variance ≤ 1.
    Pauli,
}

impl ObservableKind {
    fn scale(self) -> f64 {
        match self {
            ObservableKind::Occupation => 0.25,
            ObservableKind::Pauli => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiasEntry {
    pub encoding: EncodingKind,
    pub protocol: QemProtocol,
    pub model: BiasModel,
}

/// Everything a prediction needs besides the hardware and the target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResourceModel {
    pub costs: CostTable,
    /// Bias models in occupation units. SNT entries are functions of
    /// λ' = λ/rounds, SV entries of λ.
    pub bias: Vec<BiasEntry>,
    pub observable: ObservableKind,
    /// Largest C² a PEC-based protocol may have before it counts as infeasible.
    pub max_cost_sq: f64,
    /// Points with a best RMSE above this are marked infeasible in phase diagrams.
    pub rmse_ceiling: f64,
    /// Squared biases saturate here (occupation units).
    pub bias_cap: f64,
}

/// Fitted squared biases above this value sit on the saturation plateau and are left out.
const FIT_MAX_THETA: f64 = 0.05;

impl ResourceModel {
    /// Bias models fitted to `SWEEP` (SNT with exponent 2, SV with a free
    /// exponent, PEC unbiased) and extracted cost exponents.
    pub fn reference() -> Self {
        static REFERENCE: OnceLock<ResourceModel> = OnceLock::new();
        REFERENCE.get_or_init(Self::fit_reference).clone()
    }

    fn fit_reference() -> Self {
        let floor = 1.0 / SWEEP_CIRCUITS;
        let mut bias = Vec::new();
        for enc in EncodingKind::ALL {
            for (protocol, exponent) in [(QemProtocol::Sv, None), (QemProtocol::Snt, Some(2.0))] {
                let pts: Vec<(f64, f64)> = SWEEP
                    .iter()
                    .filter(|p| p.0 == enc && p.1 == protocol && p.3 <= FIT_MAX_THETA)
                    .map(|p| (p.2, p.3))
                    .collect();
                let model = fit_bias_model(&pts, exponent, floor).expect("frozen sweep spans several decades");
                bias.push(BiasEntry { encoding: enc, protocol, model });
            }
            bias.push(BiasEntry { encoding: enc, protocol: QemProtocol::PecFull, model: BiasModel::ZERO });
        }
        ResourceModel {
            costs: CostTable::extracted(),
            bias,
            observable: ObservableKind::Occupation,
            max_cost_sq: 1e6,
            rmse_ceiling: 0.1,
            bias_cap: 0.25,
        }
    }

    pub fn bias_model(&self, enc: EncodingKind, protocol: QemProtocol) -> Result<BiasModel, ResourceError> {
        self.bias
            .iter()
            .find(|b| b.encoding == enc && b.protocol == protocol)
            .map(|b| b.model)
            .ok_or(ResourceError::MissingModel(enc, protocol.name()))
    }
}

/// Candidate protocols for strategy selection.
pub const PROTOCOLS: [QemProtocol; 3] = [QemProtocol::Sv, QemProtocol::Snt, QemProtocol::PecFull];

/// Number of local stabilizers measured per check round on an N-site lattice.
pub fn local_stabilizer_count(kind: EncodingKind, n_sites: usize) -> usize {
    match kind {
        EncodingKind::Jw => 0,
        EncodingKind::Dk => n_sites.saturating_sub(2),
        _ => (2 * n_sites).saturating_sub(2),
    }
}

/// Nominal stabilizer weight, i.e. two-qubit gates per measured check.
pub fn nominal_check_weight(kind: EncodingKind) -> usize {
    match kind {
        EncodingKind::Jw => 0,
        EncodingKind::Le => 4,
        EncodingKind::Vc | EncodingKind::Dk | EncodingKind::Hx => 6,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LimitingFactor {
    Bias,
    /// Shot noise within circuit instances.
    Shots,
    /// Spread between sampled circuit instances.
    Circuits,
    /// Sampling cost above the feasibility ceiling.
    Cost,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RmsePrediction {
    pub encoding: EncodingKind,
    pub protocol: QemProtocol,
    pub n_trotter: usize,
    pub check_rounds: usize,
    pub n_tqg: u64,
    pub n_tqg_checks: u64,
    pub lambda: f64,
    /// λ per check round, the variable SNT bias depends on.
    pub lambda_prime: f64,
    pub csp: f64,
    pub cost: f64,
    /// Probability of the unmodified circuit in grouped-zero sampling.
    pub p_zero: f64,
    pub bias_sq: f64,
    pub variance: f64,
    pub rmse: f64,
    pub feasible: bool,
    pub limiting: LimitingFactor,
}

fn lattice_dim(lattice: &LatticeSpec) -> Result<Dim, ResourceError> {
    if !lattice.spinful {
        return Err(invalid("lattice", "gate-count formulas are for spinful lattices"));
    }
    if lattice.ny == 1 || lattice.nx == 1 {
        Ok(Dim::OneD)
    } else if lattice.nx == lattice.ny {
        Ok(Dim::TwoD)
    } else {
        Err(invalid("lattice", format!("2D formulas need a square lattice, got {}x{}", lattice.nx, lattice.ny)))
    }
}

/// Predicted RMSE of one strategy. `check_rounds` only matters for SV and SNT
/// with encodings that have local stabilizers; it is ignored otherwise.
pub fn predict_rmse(
    enc: EncodingKind,
    protocol: QemProtocol,
    lattice: &LatticeSpec,
    n_trotter: usize,
    check_rounds: usize,
    hw: &HardwareProfile,
    model: &ResourceModel,
) -> Result<RmsePrediction, ResourceError> {
    hw.validate()?;
    if !PROTOCOLS.contains(&protocol) {
        return Err(ResourceError::Protocol(protocol.name()));
    }
    if n_trotter == 0 {
        return Err(invalid("n_trotter", "must be positive"));
    }
    let dim = lattice_dim(lattice)?;
    let n_sites = lattice.n_sites();
    let n_tqg = tqg_count_formula(enc, n_sites, dim)? * n_trotter as u64;
    let uses_checks = protocol != QemProtocol::PecFull && local_stabilizer_count(enc, n_sites) > 0;
    let rounds = if uses_checks {
        if check_rounds == 0 || check_rounds > n_trotter {
            return Err(invalid("check_rounds", format!("{check_rounds} outside 1..={n_trotter}")));
        }
        check_rounds
    } else {
        0
    };
    let n_checks = local_stabilizer_count(enc, n_sites) * rounds;
    let n_tqg_checks = (n_checks * nominal_check_weight(enc)) as u64;

    let neg_ln_f = -entanglement_fidelity(hw.f_avg).ln();
    let lambda = n_tqg as f64 * neg_ln_f;
    let lambda_chk = n_tqg_checks as f64 * neg_ln_f;
    let lambda_prime = if rounds > 0 { lambda / rounds as f64 } else { lambda };
    let csp = (-(lambda + lambda_chk)).exp();

    let costs = model.costs.get(enc);
    let meas = if rounds > 0 { -(n_checks as f64) * (-hw.eps_meas).ln_1p() / 2.0 } else { 0.0 };
    let ln_cost = match protocol {
        QemProtocol::PecFull => BETA_PEC * lambda,
        QemProtocol::Sv => 1.5f64.ln() + costs.beta_sv * lambda + lambda_chk / 2.0 + meas,
        _ => 1.5f64.ln() + costs.beta_snt * lambda + lambda_chk / 2.0 + meas,
    };
    let cost = ln_cost.exp();
    let p_zero = match protocol {
        QemProtocol::PecFull => (-lambda).exp(),
        QemProtocol::Snt => (-(1.0 - costs.detectable) * lambda).exp(),
        _ => 1.0,
    };

    let scale = model.observable.scale();
    let x = if protocol == QemProtocol::Snt { lambda_prime } else { lambda };
    let bias_sq = (model.bias_model(enc, protocol)?.squared_bias(x).min(model.bias_cap)) * 4.0 * scale;
    let shot_var = cost * cost * scale / hw.n_shots;
    let circ_var = cost * cost * scale * (1.0 - p_zero).powi(2) / (hw.n_circuits - 1.0);
    let variance = shot_var + circ_var;
    let rmse = (bias_sq + variance).sqrt();
    let feasible = protocol == QemProtocol::Sv || cost * cost <= model.max_cost_sq;
    let limiting = if !feasible {
        LimitingFactor::Cost
    } else if bias_sq >= variance {
        LimitingFactor::Bias
    } else if circ_var > shot_var {
        LimitingFactor::Circuits
    } else {
        LimitingFactor::Shots
    };
    Ok(RmsePrediction {
        encoding: enc,
        protocol,
        n_trotter,
        check_rounds: rounds,
        n_tqg,
        n_tqg_checks,
        lambda,
        lambda_prime,
        csp,
        cost,
        p_zero,
        bias_sq,
        variance,
        rmse,
        feasible,
        limiting,
    })
}

/// Feasible prediction with the lowest RMSE, ties going to the lower cost.
fn best_of(cands: impl IntoIterator<Item = RmsePrediction>) -> Option<RmsePrediction> {
    cands.into_iter().filter(|p| p.feasible).fold(None, |best: Option<RmsePrediction>, p| match best {
        Some(b) if (b.rmse, b.cost) <= (p.rmse, p.cost) => Some(b),
        _ => Some(p),
    })
}

/// Best feasible strategy over encodings and, for check-based protocols,
/// check rounds 1..=n_trotter. `protocols` restricts the candidates.
pub fn best_strategy(
    lattice: &LatticeSpec,
    n_trotter: usize,
    protocols: &[QemProtocol],
    hw: &HardwareProfile,
    model: &ResourceModel,
    optimise_rounds: bool,
) -> Result<Option<RmsePrediction>, ResourceError> {
    let mut cands = Vec::new();
    for enc in EncodingKind::ALL {
        for &p in protocols {
            let rounds: Vec<usize> = if optimise_rounds && p == QemProtocol::Snt && local_stabilizer_count(enc, lattice.n_sites()) > 0 {
                (1..=n_trotter).collect()
            } else {
                vec![1]
            };
            for r in rounds {
                cands.push(predict_rmse(enc, p, lattice, n_trotter, r, hw, model)?);
            }
        }
    }
    Ok(best_of(cands))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub n_sites: usize,
    pub nx: usize,
    pub ny: usize,
    pub f_avg: f64,
    pub n_circuits: f64,
    /// `None` when no strategy is feasible or every RMSE exceeds the ceiling.
    pub best: Option<RmsePrediction>,
    pub limiting: LimitingFactor,
}

/// Optimal (encoding, protocol) over a grid of lattices and fidelities, with a
/// single round of checks at the end.
pub fn phase_diagram(
    lattices: &[LatticeSpec],
    fidelities: &[f64],
    n_trotter: usize,
    hw: &HardwareProfile,
    model: &ResourceModel,
) -> Result<Vec<PhasePoint>, ResourceError> {
    let mut out = Vec::with_capacity(lattices.len() * fidelities.len());
    for lat in lattices {
        for &f in fidelities {
            let hw_f = hw.with_fidelity(f);
            let best = best_strategy(lat, n_trotter, &PROTOCOLS, &hw_f, model, false)?;
            let (best, limiting) = match best {
                Some(b) if b.rmse <= model.rmse_ceiling => {
                    let l = b.limiting;
                    (Some(b), l)
                }
                Some(b) => (None, b.limiting),
                None => (None, LimitingFactor::Cost),
            };
            out.push(PhasePoint { n_sites: lat.n_sites(), nx: lat.nx, ny: lat.ny, f_avg: f, n_circuits: hw.n_circuits, best, limiting });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrotterReach {
    /// Largest Trotter depth meeting the target, 0 if none does.
    pub steps: usize,
    /// True when the search cap was reached, i.e. the depth is limited only by `cap`.
    pub unbounded: bool,
    pub best: Option<RmsePrediction>,
}

fn meets(lattice: &LatticeSpec, n: usize, protocol: QemProtocol, target: f64, hw: &HardwareProfile, model: &ResourceModel) -> Result<Option<RmsePrediction>, ResourceError> {
    Ok(best_strategy(lattice, n, &[protocol], hw, model, true)?.filter(|b| b.rmse <= target))
}

/// Largest Trotter depth at which `protocol` (best encoding and check
/// rounds) reaches `target` RMSE, searched up to `cap` steps.
pub fn max_trotter(lattice: &LatticeSpec, protocol: QemProtocol, target: f64, hw: &HardwareProfile, model: &ResourceModel, cap: usize) -> Result<TrotterReach, ResourceError> {
    if !(target > 0.0) || cap == 0 {
        return Err(invalid("target", format!("target {target}, cap {cap}")));
    }
    if let Some(b) = meets(lattice, cap, protocol, target, hw, model)? {
        return Ok(TrotterReach { steps: cap, unbounded: true, best: Some(b) });
    }
    let Some(first) = meets(lattice, 1, protocol, target, hw, model)? else {
        return Ok(TrotterReach { steps: 0, unbounded: false, best: None });
    };
    let (mut lo, mut hi, mut best) = (1, cap, first);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        match meets(lattice, mid, protocol, target, hw, model)? {
            Some(b) => {
                lo = mid;
                best = b;
            }
            None => hi = mid,
        }
    }
    Ok(TrotterReach { steps: lo, unbounded: false, best: Some(best) })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityRequirement {
    pub f_avg: f64,
    pub best: RmsePrediction,
}

/// Smallest average two-qubit gate fidelity at which `protocol` reaches
/// `target` RMSE after `n_trotter` steps.
pub fn required_fidelity(lattice: &LatticeSpec, n_trotter: usize, protocol: QemProtocol, target: f64, hw: &HardwareProfile, model: &ResourceModel) -> Result<FidelityRequirement, ResourceError> {
    if !(target > 0.0) {
        return Err(invalid("target", format!("{target}")));
    }
    let Some(top) = meets(lattice, n_trotter, protocol, target, &hw.with_fidelity(1.0), model)? else {
        let floor = best_strategy(lattice, n_trotter, &[protocol], &hw.with_fidelity(1.0), model, true)?.map_or(f64::INFINITY, |b| b.rmse);
        return Err(ResourceError::Unreachable { target, floor });
    };
    // bisect on log10(1 − F) between 1e-12 and 0.7
    let (mut good, mut bad) = (-12.0f64, (0.7f64).log10());
    let mut best = top;
    if let Some(b) = meets(lattice, n_trotter, protocol, target, &hw.with_fidelity(1.0 - 10f64.powf(bad)), model)? {
        return Ok(FidelityRequirement { f_avg: 1.0 - 10f64.powf(bad), best: b });
    }
    for _ in 0..60 {
        let mid = (good + bad) / 2.0;
        match meets(lattice, n_trotter, protocol, target, &hw.with_fidelity(1.0 - 10f64.powf(mid)), model)? {
            Some(b) => {
                good = mid;
                best = b;
            }
            None => bad = mid,
        }
    }
    Ok(FidelityRequirement { f_avg: 1.0 - 10f64.powf(good), best })
}
