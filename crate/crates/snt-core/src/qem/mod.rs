//! Mitigation protocols built on top of recorded shots: post-selection on
//! parity checks, ratio-based symmetry verification for global stabilizers,
//! and quasi-probability cancellation of a chosen subset of the noise.

mod estimate;

pub use estimate::{
    estimate, linear_estimate, pp_estimate, CircuitTally, EstimateOptions, LinearEstimate, MeasurementLayout,
    ObservableEstimate, PpAllocation, PpEstimate, ProtocolEstimate,
};

use crate::classify::{FaultClass, NoisePartition};
use crate::engine::{CircuitInstance, ShotRecord};
use crate::noise::NoiseModel;
use crate::rng::labelled_rng;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QemError {
    #[error("invalid shot budget: {0}")]
    Budget(String),
    #[error("partition does not match the noise model ({0})")]
    Mismatch(String),
    #[error("protocol {0} needs a noise partition")]
    MissingPartition(QemProtocol),
    #[error("every shot was rejected")]
    AllRejected,
    #[error("not enough data: {0}")]
    Insufficient(String),
    #[error("layout: {0}")]
    Layout(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QemProtocol {
    Unmitigated,
    Ps,
    /// Post-selection followed by ratio symmetry verification.
    Sv,
    PecFull,
    /// Cancellation of undetectable noise, then post-selection and PP.
    Snt,
}

impl QemProtocol {
    pub const ALL: [QemProtocol; 5] = [Self::Unmitigated, Self::Ps, Self::Sv, Self::PecFull, Self::Snt];

    pub fn name(self) -> &'static str {
        match self {
            Self::Unmitigated => "unmitigated",
            Self::Ps => "ps",
            Self::Sv => "sv",
            Self::PecFull => "pec",
            Self::Snt => "snt",
        }
    }

    pub fn uses_postselection(self) -> bool {
        matches!(self, Self::Ps | Self::Sv | Self::Snt)
    }

    pub fn uses_pp(self) -> bool {
        matches!(self, Self::Sv | Self::Snt)
    }

    pub fn pec_mode(self) -> Option<PecMode> {
        match self {
            Self::PecFull => Some(PecMode::All),
            Self::Snt => Some(PecMode::UndetectableOnly),
            _ => None,
        }
    }
}

impl std::fmt::Display for QemProtocol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for QemProtocol {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Self::ALL.into_iter().find(|p| p.name() == s.to_ascii_lowercase()).ok_or_else(|| format!("unknown protocol '{s}'"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PecMode {
    UndetectableOnly,
    All,
}

/// Targets of one layer: channel entry indices with their probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerPlan {
    pub targets: Vec<(usize, f64)>,
    /// η_k, the targeted probability mass.
    pub mass: f64,
}

impl LayerPlan {
    pub fn gamma(&self) -> f64 {
        1.0 + 2.0 * self.mass
    }

    /// Draws the insertion for this layer: `None` is the unmodified layer
    /// (positive sign), `Some(entry)` inserts that Pauli with negative sign.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<usize> {
        if self.mass == 0.0 {
            return None;
        }
        let mut u = rng.gen::<f64>() * self.gamma() - (1.0 + self.mass);
        if u < 0.0 {
            return None;
        }
        for &(e, p) in &self.targets {
            u -= p;
            if u < 0.0 {
                return Some(e);
            }
        }
        self.targets.last().map(|t| t.0)
    }
}

/// First-order inverse of the targeted part of each layer channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuasiProbabilityPlan {
    pub layers: Vec<LayerPlan>,
}

impl QuasiProbabilityPlan {
    pub fn identity(num_layers: usize) -> Self {
        QuasiProbabilityPlan { layers: vec![LayerPlan { targets: vec![], mass: 0.0 }; num_layers] }
    }

    /// Plan inverting every entry of every layer channel.
    pub fn full(model: &NoiseModel) -> Self {
        let layers = model
            .channels()
            .iter()
            .map(|ch| {
                let targets: Vec<(usize, f64)> = ch.entries().iter().enumerate().map(|(i, e)| (i, e.1)).collect();
                LayerPlan { mass: targets.iter().map(|t| t.1).sum(), targets }
            })
            .collect();
        QuasiProbabilityPlan { layers }
    }

    /// Total sampling overhead ∏ γ_k.
    pub fn cost(&self) -> f64 {
        self.layers.iter().map(LayerPlan::gamma).product()
    }

    /// Probability that no layer receives an insertion.
    pub fn p_zero(&self) -> f64 {
        self.layers.iter().map(|l| (1.0 + l.mass) / l.gamma()).product()
    }

    pub fn total_mass(&self) -> f64 {
        self.layers.iter().map(|l| l.mass).sum()
    }

    pub fn is_identity(&self) -> bool {
        self.layers.iter().all(|l| l.mass == 0.0)
    }

    /// One circuit draw: sign and `(layer, entry)` insertions.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (i8, Vec<(usize, usize)>) {
        let ins: Vec<(usize, usize)> = self.layers.iter().enumerate().filter_map(|(l, lp)| lp.sample(rng).map(|e| (l, e))).collect();
        (if ins.len() % 2 == 0 { 1 } else { -1 }, ins)
    }
}

/// Builds the cancellation plan. Every noisy layer is included, parity-check
/// layers too: their undetectable data errors bias the result like any other.
pub fn build_quasiprobability(model: &NoiseModel, partition: &NoisePartition, mode: PecMode) -> Result<QuasiProbabilityPlan, QemError> {
    if partition.layers.len() != model.num_layers() {
        return Err(QemError::Mismatch(format!("{} partition layers vs {} model layers", partition.layers.len(), model.num_layers())));
    }
    if mode == PecMode::All {
        return Ok(QuasiProbabilityPlan::full(model));
    }
    let mut layers = Vec::with_capacity(model.num_layers());
    for (l, lp) in partition.layers.iter().enumerate() {
        let entries = model.channel(l).entries();
        if lp.classes.len() != entries.len() {
            return Err(QemError::Mismatch(format!("layer {l}: {} classes vs {} entries", lp.classes.len(), entries.len())));
        }
        let targets: Vec<(usize, f64)> =
            lp.indices(FaultClass::Undetectable).map(|i| (i, entries[i].1)).filter(|t| t.1 > 0.0).collect();
        layers.push(LayerPlan { mass: targets.iter().map(|t| t.1).sum(), targets });
    }
    Ok(QuasiProbabilityPlan { layers })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplingStrategy {
    Plain,
    /// The unmodified circuit is run once with a share p₀ of the shots; the
    /// remaining draws are conditioned on at least one insertion.
    GroupedZero,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShotBudget {
    pub n_shots: usize,
    pub n_circuits: usize,
    pub strategy: SamplingStrategy,
}

impl ShotBudget {
    pub fn plain(n_shots: usize, n_circuits: usize) -> Self {
        ShotBudget { n_shots, n_circuits, strategy: SamplingStrategy::Plain }
    }

    pub fn validate(&self) -> Result<(), QemError> {
        if self.n_circuits == 0 || self.n_shots == 0 {
            return Err(QemError::Budget("shots and circuits must be positive".into()));
        }
        if self.n_circuits > self.n_shots {
            return Err(QemError::Budget(format!("{} circuits exceed {} shots", self.n_circuits, self.n_shots)));
        }
        if self.strategy == SamplingStrategy::GroupedZero && self.n_circuits < 2 {
            return Err(QemError::Budget("grouped-zero sampling needs at least two circuits".into()));
        }
        Ok(())
    }
}

/// Sampled circuit instances plus what the estimators need to weight them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledCircuits {
    pub instances: Vec<CircuitInstance>,
    pub strategy: SamplingStrategy,
    /// ∏ γ_k of the plan the instances were drawn from.
    pub cost: f64,
    pub p_zero: f64,
}

impl SampledCircuits {
    /// `n_circuits` copies of the unmodified circuit sharing `n_shots`.
    pub fn unmodified(n_shots: usize, n_circuits: usize) -> Result<Self, QemError> {
        let b = ShotBudget::plain(n_shots, n_circuits);
        b.validate()?;
        Ok(SampledCircuits {
            instances: split_shots(n_shots, n_circuits).enumerate().map(|(i, s)| CircuitInstance::plain(i as u64, s)).collect(),
            strategy: SamplingStrategy::Plain,
            cost: 1.0,
            p_zero: 1.0,
        })
    }

    pub fn total_shots(&self) -> usize {
        self.instances.iter().map(|i| i.shots).sum()
    }

    /// Position of an instance id, which is its index by construction.
    pub(crate) fn index_of(&self, id: u64) -> Option<usize> {
        let i = id as usize;
        (i < self.instances.len() && self.instances[i].id == id).then_some(i)
    }
}

fn split_shots(n_shots: usize, n: usize) -> impl Iterator<Item = usize> {
    let (q, r) = (n_shots / n, n_shots % n);
    (0..n).map(move |i| q + usize::from(i < r))
}

pub fn sample_instances(plan: &QuasiProbabilityPlan, budget: &ShotBudget, seed: u64) -> Result<SampledCircuits, QemError> {
    budget.validate()?;
    let mut rng = labelled_rng(seed, "pec-instances");
    let cost = plan.cost();
    let p_zero = plan.p_zero();
    if plan.is_identity() {
        return Ok(SampledCircuits {
            instances: vec![CircuitInstance::plain(0, budget.n_shots)],
            strategy: SamplingStrategy::Plain,
            cost,
            p_zero,
        });
    }
    let instances = match budget.strategy {
        SamplingStrategy::Plain => split_shots(budget.n_shots, budget.n_circuits)
            .enumerate()
            .map(|(i, shots)| {
                let (sign, insertions) = plan.sample(&mut rng);
                CircuitInstance { id: i as u64, sign, insertions, paulis: vec![], shots }
            })
            .collect(),
        SamplingStrategy::GroupedZero => {
            let n0 = ((budget.n_shots as f64 * p_zero).round() as usize).clamp(1, budget.n_shots - (budget.n_circuits - 1));
            let mut v = vec![CircuitInstance::plain(0, n0)];
            for (i, shots) in split_shots(budget.n_shots - n0, budget.n_circuits - 1).enumerate() {
                let (sign, insertions) = loop {
                    let d = plan.sample(&mut rng);
                    if !d.1.is_empty() {
                        break d;
                    }
                };
                v.push(CircuitInstance { id: i as u64 + 1, sign, insertions, paulis: vec![], shots });
            }
            v
        }
    };
    Ok(SampledCircuits { instances, strategy: budget.strategy, cost, p_zero })
}

/// Result of discarding shots whose parity checks fired.
#[derive(Debug, Clone, PartialEq)]
pub struct PostSelection<'a> {
    pub accepted: Vec<&'a ShotRecord>,
    /// Rejected fraction Π.
    pub rejection: f64,
}

impl PostSelection<'_> {
    /// C_PS = 1/√(1−Π); infinite when everything was rejected.
    pub fn cost(&self) -> f64 {
        ps_cost(self.rejection)
    }
}

pub fn ps_cost(rejection: f64) -> f64 {
    1.0 / (1.0 - rejection).sqrt()
}

pub fn postselect(records: &[ShotRecord]) -> PostSelection<'_> {
    let accepted: Vec<&ShotRecord> = records.iter().filter(|r| !r.any_fired()).collect();
    let rejection = if records.is_empty() { 0.0 } else { 1.0 - accepted.len() as f64 / records.len() as f64 };
    PostSelection { accepted, rejection }
}

#[cfg(test)]
mod tests;
