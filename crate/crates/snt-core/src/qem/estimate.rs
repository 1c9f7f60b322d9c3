use super::{QemError, QemProtocol, SampledCircuits, SamplingStrategy};
use crate::engine::ShotRecord;
use serde::{Deserialize, Serialize};

/// Where the estimators find their inputs in `ShotRecord::outcomes`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementLayout {
    pub observables: Vec<usize>,
    /// Global stabilizers used by PP, signed so the ideal state has +1.
    pub globals: Vec<usize>,
    /// Report occupations (1 − V)/2 instead of the measured Paulis V.
    pub occupations: bool,
}

/// Share of the shots given to each of the 2^g A-groups and to the B-group.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PpAllocation {
    Optimal,
    /// Relative sizes (per A-group, B-group), normalised to the budget.
    Custom { n_a: f64, n_b: f64 },
    /// Every shot feeds every group; only valid when all products commute.
    Joint,
}

impl PpAllocation {
    /// Fractions (per A-group, B) for `g` global stabilizers.
    pub fn fractions(self, g: usize) -> Option<(f64, f64)> {
        let k = (1usize << g) as f64;
        match self {
            PpAllocation::Joint => None,
            PpAllocation::Optimal => Some(match g {
                1 => (1.0 / 3.0, 1.0 / 3.0),
                2 => (1.0 / 6.0, 1.0 / 3.0),
                _ => (1.0 / (k + 1.0), 1.0 / (k + 1.0)),
            }),
            PpAllocation::Custom { n_a, n_b } => {
                let t = k * n_a + n_b;
                Some((n_a / t, n_b / t))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateOptions {
    pub pp_allocation: PpAllocation,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        EstimateOptions { pp_allocation: PpAllocation::Optimal }
    }
}

/// Shot count, sum and sum of squares of one circuit's samples.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CircuitTally {
    pub n: f64,
    pub sum: f64,
    pub sum_sq: f64,
}

impl CircuitTally {
    pub fn push(&mut self, y: f64) {
        self.n += 1.0;
        self.sum += y;
        self.sum_sq += y * y;
    }

    pub fn mean(&self) -> f64 {
        self.sum / self.n
    }

    /// Unbiased within-circuit sample variance; needs two samples.
    pub fn sample_variance(&self) -> Option<f64> {
        (self.n >= 2.0).then(|| ((self.sum_sq - self.sum * self.sum / self.n) / (self.n - 1.0)).max(0.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearEstimate {
    pub mean: f64,
    pub variance: f64,
    pub n_circuits: usize,
    pub n_samples: usize,
}

/// Pooled mean and the two-contribution variance
/// (1/N_c)(⟨σ²⟩/⟨n⟩ + Var_c[μ](1 + Var_c[n]/⟨n⟩²)), without the C² factor.
fn pooled(tallies: &[CircuitTally]) -> Option<(f64, f64, usize, usize)> {
    let used: Vec<&CircuitTally> = tallies.iter().filter(|t| t.n > 0.0).collect();
    let nc = used.len();
    if nc == 0 {
        return None;
    }
    let n_tot: f64 = used.iter().map(|t| t.n).sum();
    let mean = used.iter().map(|t| t.sum).sum::<f64>() / n_tot;
    let within: Vec<f64> = used.iter().filter_map(|t| t.sample_variance()).collect();
    let sigma2 = if within.is_empty() { 0.0 } else { within.iter().sum::<f64>() / within.len() as f64 };
    if nc == 1 {
        let t = used[0];
        return Some((mean, t.sample_variance()? / t.n, 1, t.n as usize));
    }
    let ncf = nc as f64;
    let n_bar = n_tot / ncf;
    let var_n = used.iter().map(|t| (t.n - n_bar).powi(2)).sum::<f64>() / ncf;
    let mu_bar = used.iter().map(|t| t.mean()).sum::<f64>() / ncf;
    let s2_mu = used.iter().map(|t| (t.mean() - mu_bar).powi(2)).sum::<f64>() / (ncf - 1.0);
    // the spread of sample means contains each circuit's own shot noise
    let noise = used.iter().map(|t| t.sample_variance().unwrap_or(sigma2) / t.n).sum::<f64>() / ncf;
    let var_mu = (s2_mu - noise).max(0.0);
    let var = (sigma2 / n_bar + var_mu * (1.0 + var_n / (n_bar * n_bar))) / ncf;
    Some((mean, var, nc, n_tot as usize))
}

/// Scaled estimate C·⟨μ⟩ with its variance. For grouped-zero sampling the
/// first tally is the unmodified circuit, weighted by p₀.
pub fn linear_estimate(tallies: &[CircuitTally], strategy: SamplingStrategy, p_zero: f64, scale: f64) -> Option<LinearEstimate> {
    let c2 = scale * scale;
    match strategy {
        SamplingStrategy::GroupedZero if tallies.len() > 1 => {
            let z = &tallies[0];
            if z.n == 0.0 {
                return None;
            }
            let (m1, v1, nc, ns) = pooled(&tallies[1..])?;
            let v0 = z.sample_variance().unwrap_or(0.0) / z.n;
            Some(LinearEstimate {
                mean: scale * (p_zero * z.mean() + (1.0 - p_zero) * m1),
                variance: c2 * (p_zero * p_zero * v0 + (1.0 - p_zero).powi(2) * v1),
                n_circuits: nc + 1,
                n_samples: ns + z.n as usize,
            })
        }
        _ => {
            let (m, v, nc, ns) = pooled(tallies)?;
            Some(LinearEstimate { mean: scale * m, variance: c2 * v, n_circuits: nc, n_samples: ns })
        }
    }
}

fn tallies_for<'a>(
    records: impl Iterator<Item = &'a ShotRecord>,
    circuits: &SampledCircuits,
    value: impl Fn(&ShotRecord) -> f64,
) -> Result<Vec<CircuitTally>, QemError> {
    let mut t = vec![CircuitTally::default(); circuits.instances.len()];
    for r in records {
        let i = circuits.index_of(r.instance).ok_or_else(|| QemError::Layout(format!("record for unknown instance {}", r.instance)))?;
        t[i].push(r.sign as f64 * value(r));
    }
    Ok(t)
}

fn linear_for<'a>(
    records: impl Iterator<Item = &'a ShotRecord>,
    circuits: &SampledCircuits,
    scale: f64,
    value: impl Fn(&ShotRecord) -> f64,
) -> Result<LinearEstimate, QemError> {
    let t = tallies_for(records, circuits, value)?;
    linear_estimate(&t, circuits.strategy, circuits.p_zero, scale).ok_or_else(|| QemError::Insufficient("no usable shots".into()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PpEstimate {
    /// ⟨O S_T⟩ for every subset T of the globals (T = ∅ first).
    pub a_terms: Vec<f64>,
    /// ⟨S_T⟩ for every subset, ⟨S_∅⟩ being the normalisation.
    pub b_terms: Vec<f64>,
    pub a: f64,
    pub b: f64,
    pub var_a: f64,
    pub var_b: f64,
    pub estimate: f64,
    pub variance: f64,
    /// False when ⟨B⟩ ≤ 0.
    pub valid: bool,
}

fn subset_product(r: &ShotRecord, globals: &[usize], mask: usize) -> f64 {
    globals.iter().enumerate().filter(|(j, _)| mask >> j & 1 == 1).map(|(_, &g)| r.outcomes[g] as f64).product()
}

/// Deterministic low-discrepancy assignment of record positions to groups
/// 0..k (A-groups) and k (B).
fn assign_groups(n: usize, k: usize, fa: f64, fb: f64) -> Vec<usize> {
    let target: Vec<f64> = (0..k).map(|_| fa).chain(std::iter::once(fb)).collect();
    let mut count = vec![0f64; k + 1];
    (0..n)
        .map(|i| {
            let g = (0..=k)
                .max_by(|&a, &b| (target[a] * (i + 1) as f64 - count[a]).total_cmp(&(target[b] * (i + 1) as f64 - count[b])).then(b.cmp(&a)))
                .expect("at least one group");
            count[g] += 1.0;
            g
        })
        .collect()
}

/// Ratio estimator ⟨O M⟩/⟨M⟩ with M = ∏(1 + S_j)/2 over the globals.
/// Shots are split between the 2^g A-circuits and one B-circuit by position
/// in `records`; with `postselect` only accepted shots enter the averages.
pub fn pp_estimate(
    records: &[ShotRecord],
    observable: usize,
    globals: &[usize],
    circuits: &SampledCircuits,
    postselect: bool,
    alloc: PpAllocation,
) -> Result<PpEstimate, QemError> {
    let g = globals.len();
    if g > 8 {
        return Err(QemError::Layout(format!("{g} global stabilizers is too many for PP")));
    }
    let k = 1usize << g;
    let scale = circuits.cost;
    let groups = alloc.fractions(g).map(|(fa, fb)| assign_groups(records.len(), k, fa, fb));
    let in_group = |grp: usize| {
        let groups = &groups;
        records.iter().enumerate().filter(move |(i, r)| (!postselect || !r.any_fired()) && groups.as_ref().is_none_or(|v| v[*i] == grp)).map(|(_, r)| r)
    };
    let mut a_terms = Vec::with_capacity(k);
    let mut var_a = 0.0;
    for t in 0..k {
        let e = linear_for(in_group(t), circuits, scale, |r| r.outcomes[observable] as f64 * subset_product(r, globals, t))?;
        a_terms.push(e.mean);
        var_a += e.variance;
    }
    let mut b_terms = Vec::with_capacity(k);
    for t in 0..k {
        b_terms.push(linear_for(in_group(k), circuits, scale, |r| subset_product(r, globals, t))?.mean);
    }
    // a single B-circuit: the variance of the per-shot sum carries the covariances
    let var_b = linear_for(in_group(k), circuits, scale, |r| (0..k).map(|t| subset_product(r, globals, t)).sum())?.variance;
    let kf = k as f64;
    let a = a_terms.iter().sum::<f64>() / kf;
    let b = b_terms.iter().sum::<f64>() / kf;
    let (var_a, var_b) = (var_a / (kf * kf), var_b / (kf * kf));
    let valid = b > 0.0;
    let estimate = if valid { a / b } else { f64::NAN };
    let variance = if valid { (var_a + estimate * estimate * var_b) / (b * b) } else { f64::INFINITY };
    Ok(PpEstimate { a_terms, b_terms, a, b, var_a, var_b, estimate, variance, valid })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObservableEstimate {
    pub mean: f64,
    pub variance: f64,
    pub valid: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolEstimate {
    pub protocol: QemProtocol,
    pub observables: Vec<ObservableEstimate>,
    pub n_shots: usize,
    pub n_accepted: usize,
    /// Rejected fraction Π (0 for protocols without post-selection).
    pub rejection: f64,
    pub c_ps: f64,
    pub c_pec: f64,
    /// ⟨M⟩ on the accepted shots, when PP ran.
    pub projector_mean: Option<f64>,
    /// 1.5/⟨M⟩, when PP ran.
    pub c_pp: Option<f64>,
}

impl ProtocolEstimate {
    pub fn c_total(&self) -> f64 {
        self.c_ps * self.c_pp.unwrap_or(1.0) * self.c_pec
    }
}

/// Runs the protocol's estimator chain on the records of `circuits`.
pub fn estimate(
    protocol: QemProtocol,
    records: &[ShotRecord],
    layout: &MeasurementLayout,
    circuits: &SampledCircuits,
    opts: &EstimateOptions,
) -> Result<ProtocolEstimate, QemError> {
    if records.is_empty() {
        return Err(QemError::Insufficient("no shots".into()));
    }
    let width = records[0].outcomes.len();
    if let Some(&bad) = layout.observables.iter().chain(&layout.globals).find(|&&i| i >= width) {
        return Err(QemError::Layout(format!("outcome index {bad} out of range ({width} measured)")));
    }
    let ps = protocol.uses_postselection();
    let n_accepted = records.iter().filter(|r| !r.any_fired()).count();
    let rejection = if ps { 1.0 - n_accepted as f64 / records.len() as f64 } else { 0.0 };
    if ps && n_accepted == 0 {
        return Err(QemError::AllRejected);
    }
    let scale = if protocol.pec_mode().is_some() { circuits.cost } else { 1.0 };
    let accepted = || records.iter().filter(move |r| !ps || !r.any_fired());
    let use_pp = protocol.uses_pp() && !layout.globals.is_empty();
    let mut observables = Vec::with_capacity(layout.observables.len());
    let mut projector_mean = None;
    for &o in &layout.observables {
        let (mean, variance, valid) = if use_pp {
            let pp = pp_estimate(records, o, &layout.globals, circuits, ps, opts.pp_allocation)?;
            projector_mean = Some(pp.b);
            (pp.estimate, pp.variance, pp.valid)
        } else if protocol == QemProtocol::Snt {
            // post-selected PEC: normalise by the signed acceptance and
            // linearise the ratio on the same shots
            let num = linear_for(accepted(), circuits, scale, |r| r.outcomes[o] as f64)?;
            let den = linear_for(accepted(), circuits, scale, |_| 1.0)?;
            let est = num.mean / den.mean;
            let z = linear_for(accepted(), circuits, scale, |r| r.outcomes[o] as f64 - est)?;
            (est, z.variance / (den.mean * den.mean), den.mean > 0.0)
        } else {
            let e = linear_for(accepted(), circuits, scale, |r| r.outcomes[o] as f64)?;
            (e.mean, e.variance, true)
        };
        observables.push(if layout.occupations {
            ObservableEstimate { mean: (1.0 - mean) / 2.0, variance: variance / 4.0, valid }
        } else {
            ObservableEstimate { mean, variance, valid }
        });
    }
    let c_pp = projector_mean.map(|m| if m > 0.0 { 1.5 / m } else { f64::INFINITY });
    Ok(ProtocolEstimate {
        protocol,
        observables,
        n_shots: records.len(),
        n_accepted,
        rejection,
        c_ps: super::ps_cost(rejection),
        c_pec: scale,
        projector_mean,
        c_pp,
    })
}

#[cfg(test)]
pub(super) mod tests_support {
    pub fn assign(n: usize, k: usize, fa: f64, fb: f64) -> Vec<usize> {
        super::assign_groups(n, k, fa, fb)
    }
}
