//! Bias, variance and cost bookkeeping, plus closed-form cost and
//! detectability expressions.

use crate::classify::classify_at_logical_boundary;
use crate::pauli::{Letter, PauliOperator};
use crate::rng::labelled_rng;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("{0} values but {1} references")]
    Length(usize, usize),
    #[error("negative input: {0}")]
    Negative(&'static str),
    #[error("every shot was rejected (Π = 1)")]
    AllRejected,
    #[error("projector mean {0} is not positive")]
    ProjectorMean(f64),
    #[error("no noise: the ratio is undefined")]
    NoNoise,
    #[error("invalid argument: {0}")]
    Invalid(String),
}

/// Unbiased squared-bias estimate over an observable set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasEstimate {
    pub theta_i: Vec<f64>,
    pub theta: f64,
    pub var_theta: f64,
}

impl BiasEstimate {
    /// Resolution band: Θ below a couple of standard deviations is compatible with zero.
    pub fn resolved(&self, n_sigma: f64) -> bool {
        self.theta > n_sigma * self.var_theta.sqrt()
    }
}

/// Θ_i = (Ō_i − ⟨O_i⟩)² − S²_i with S²_i the variance of the estimator Ō_i;
/// references are treated as exact.
pub fn squared_bias(means: &[f64], variances: &[f64], references: &[f64]) -> Result<BiasEstimate, StatsError> {
    if means.len() != references.len() || variances.len() != references.len() {
        return Err(StatsError::Length(means.len().min(variances.len()), references.len()));
    }
    if means.is_empty() {
        return Err(StatsError::Invalid("empty observable set".into()));
    }
    if variances.iter().any(|&v| v < 0.0) {
        return Err(StatsError::Negative("variance"));
    }
    let k = means.len() as f64;
    let mut theta_i = Vec::with_capacity(means.len());
    let mut var = 0.0;
    for ((&m, &s2), &r) in means.iter().zip(variances).zip(references) {
        let d2 = (m - r).powi(2);
        theta_i.push(d2 - s2);
        var += 2.0 * s2 * s2 + 4.0 * s2 * d2;
    }
    Ok(BiasEstimate { theta: theta_i.iter().sum::<f64>() / k, theta_i, var_theta: var / (k * k) })
}

/// RMSE of one observable from its squared bias and variance.
pub fn rmse(bias_sq: f64, variance: f64) -> Result<f64, StatsError> {
    if bias_sq < 0.0 {
        return Err(StatsError::Negative("squared bias"));
    }
    if variance < 0.0 {
        return Err(StatsError::Negative("variance"));
    }
    Ok((bias_sq + variance).sqrt())
}

/// Square root of the mean MSE over `(bias², variance)` pairs.
pub fn rmse_avg(items: &[(f64, f64)]) -> Result<f64, StatsError> {
    if items.is_empty() {
        return Err(StatsError::Invalid("empty observable set".into()));
    }
    let mut s = 0.0;
    for &(b, v) in items {
        s += rmse(b, v)?.powi(2);
    }
    Ok((s / items.len() as f64).sqrt())
}

/// Constant prefactor of ratio symmetry verification with two globals.
pub fn pp_cost_alpha() -> f64 {
    1.5
}

/// Upper bound 1/√MSP on the cost increase from ancilla readout errors.
pub fn meas_cost_bound(msp: f64) -> Result<f64, StatsError> {
    if !(msp > 0.0 && msp <= 1.0) {
        return Err(StatsError::Invalid(format!("MSP {msp} outside (0, 1]")));
    }
    Ok(1.0 / msp.sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub c_ps: f64,
    /// 1.5/⟨M⟩ when PP ran, otherwise 1.
    pub c_pp: f64,
    pub c_pec: f64,
    pub c_total: f64,
    pub lambda: f64,
    /// ln(C_total/α)/λ with α the PP prefactor; `None` for λ ≤ 0.1.
    pub beta: Option<f64>,
}

/// Below this error rate β is dominated by finite-sample noise and not reported.
pub const BETA_MIN_LAMBDA: f64 = 0.1;

/// Assembles C = C_PS·C_PP·C_PEC. `projector_mean` is ⟨M⟩ on the accepted
/// shots, `None` when no PP stage ran; `lambda` must exclude check layers.
pub fn cost_breakdown(rejection: f64, projector_mean: Option<f64>, c_pec: f64, lambda: f64) -> Result<CostBreakdown, StatsError> {
    if !(0.0..=1.0).contains(&rejection) {
        return Err(StatsError::Invalid(format!("rejection {rejection}")));
    }
    if rejection >= 1.0 {
        return Err(StatsError::AllRejected);
    }
    if c_pec < 1.0 || lambda < 0.0 {
        return Err(StatsError::Invalid(format!("C_PEC {c_pec}, λ {lambda}")));
    }
    let c_ps = 1.0 / (1.0 - rejection).sqrt();
    let (c_pp, alpha) = match projector_mean {
        Some(m) if m <= 0.0 => return Err(StatsError::ProjectorMean(m)),
        Some(m) => (pp_cost_alpha() / m, pp_cost_alpha()),
        None => (1.0, 1.0),
    };
    let c_total = c_ps * c_pp * c_pec;
    let beta = (lambda > BETA_MIN_LAMBDA).then(|| (c_total / alpha).ln() / lambda);
    Ok(CostBreakdown { c_ps, c_pp, c_pec, c_total, lambda, beta })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RVariant {
    /// One stabilizer Z^{⊗N_Q}.
    SpinlessLocal,
    /// Separate parities of the two spin halves.
    SpinLocal,
    /// Global depolarizing noise with `g` independent stabilizers.
    Global { g: u32 },
}

/// Fraction of single-qubit noise detected by the JW parity stabilizers.
/// `p_xy` is the total X-or-Y probability per qubit, `p_z` the Z probability.
pub fn analytic_r_jw(p_xy: f64, p_z: f64, n_q: u32, variant: RVariant) -> Result<f64, StatsError> {
    if let RVariant::Global { g } = variant {
        if g == 0 || g > n_q {
            return Err(StatsError::Invalid(format!("global variant needs 1 ≤ g ≤ N_Q, got g={g}, N_Q={n_q}")));
        }
        // 4^N (1 − 2^−g)/(4^N − 1), written to stay finite for large N
        let tail = 4f64.powi(-(n_q as i32));
        return Ok((1.0 - 2f64.powi(-(g as i32))) / (1.0 - tail));
    }
    if !(0.0..1.0).contains(&p_xy) || !(0.0..1.0).contains(&p_z) || p_xy + p_z > 1.0 {
        return Err(StatsError::Invalid(format!("probabilities p_xy={p_xy}, p_z={p_z}")));
    }
    if n_q < 2 {
        return Err(StatsError::Invalid("N_Q must be at least 2".into()));
    }
    let total = -(n_q as f64 * (-(p_xy + p_z)).ln_1p()).exp_m1();
    if total <= 0.0 {
        return Err(StatsError::NoNoise);
    }
    let q = 1.0 - 2.0 * p_xy;
    let detected = match variant {
        RVariant::SpinlessLocal => 0.5 * (1.0 - q.powi(n_q as i32)),
        RVariant::SpinLocal => {
            if n_q % 2 != 0 {
                return Err(StatsError::Invalid("spinful N_Q must be even".into()));
            }
            // both halves even: ((1 + a)/2)², a = q^{N_Q/2}
            let a = q.powi(n_q as i32 / 2);
            1.0 - 0.25 * (1.0 + a).powi(2)
        }
        RVariant::Global { .. } => unreachable!(),
    };
    Ok(detected / total)
}

/// Monte Carlo counterpart of `analytic_r_jw`: iid single-qubit Paulis on
/// `stabilizers.num_qubits()` qubits, conditioned on a non-trivial error,
/// classified against the given stabilizers. Returns (R, standard error).
pub fn monte_carlo_r(stabilizers: &[PauliOperator], p_xy: f64, p_z: f64, samples: usize, seed: u64) -> Result<(f64, f64), StatsError> {
    let n = stabilizers.first().map(|s| s.num_qubits()).ok_or_else(|| StatsError::Invalid("no stabilizers".into()))?;
    if p_xy + p_z <= 0.0 {
        return Err(StatsError::NoNoise);
    }
    let mut rng = labelled_rng(seed, "mc-r");
    let p_err = p_xy + p_z;
    let mut detected = 0usize;
    let mut drawn = 0usize;
    let mut e = PauliOperator::identity(n);
    while drawn < samples {
        for q in 0..n {
            e.set(q, Letter::I);
        }
        let mut any = false;
        for q in 0..n {
            let u: f64 = rng.gen();
            if u < p_err {
                any = true;
                let l = if u < p_xy / 2.0 {
                    Letter::X
                } else if u < p_xy {
                    Letter::Y
                } else {
                    Letter::Z
                };
                e.set(q, l);
            }
        }
        if !any {
            continue;
        }
        drawn += 1;
        if classify_at_logical_boundary(&e, stabilizers) {
            detected += 1;
        }
    }
    let r = detected as f64 / samples as f64;
    Ok((r, (r * (1.0 - r) / samples as f64).sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CostVariant {
    /// Detectable noise removed by post-selection (β = R/2 + 2(1−R)).
    Ps,
    /// Detectable noise removed by post-processing (β = R + 2(1−R)).
    Pp,
}

pub fn snt_beta(r: f64, variant: CostVariant) -> f64 {
    match variant {
        CostVariant::Ps => r / 2.0 + 2.0 * (1.0 - r),
        CostVariant::Pp => r + 2.0 * (1.0 - r),
    }
}

/// Lowest-order SNT cost e^{βλ}.
pub fn snt_cost_model(r: f64, lambda: f64, variant: CostVariant) -> Result<f64, StatsError> {
    if !(0.0..=1.0).contains(&r) || lambda < 0.0 {
        return Err(StatsError::Invalid(format!("R={r}, λ={lambda}")));
    }
    Ok((snt_beta(r, variant) * lambda).exp())
}
