//! The four descriptions of the two-photon polarizer experiment.
//!
//! Every model yields an analytic [`PredictionSet`] and a per-trial sampler
//! that draws from an injected random stream. The sampler never owns its
//! randomness, so the Monte Carlo engine can key one stream per trial.

mod aniso;
mod balls;
mod lhv;
mod qm;

use std::fmt;
use std::str::FromStr;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::domain::{
    sum_distributions, Angle, JointDistribution, Outcome, PhotonCharge, PolarizerSettings,
    WeightedDistribution,
};
use crate::error::{Error, Result};
use crate::kinematics::AnisotropyParameter;

pub use aniso::{
    aniso_pass_probability, aniso_pass_probability_via_norm, aniso_predict, aniso_sample,
    preferred_direction_overlap, AnisotropicModel,
};
pub use balls::{balls_predict, balls_sample, BallsBoxesModel};
pub use lhv::{lhv_predict, lhv_sample, LhvModel};
pub use qm::{qm_predict, qm_sample, QmModel};

/// Whose account of the experiment is being computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ObserverView {
    A,
    B,
    /// Only the charge-summed distribution, which every observer agrees on.
    #[serde(rename = "blind")]
    ChargeBlind,
}

impl ObserverView {
    pub fn label(self) -> &'static str {
        match self {
            ObserverView::A => "A",
            ObserverView::B => "B",
            ObserverView::ChargeBlind => "blind",
        }
    }
}

impl fmt::Display for ObserverView {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ObserverView {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "A" | "a" => Ok(ObserverView::A),
            "B" | "b" => Ok(ObserverView::B),
            "blind" | "charge-blind" => Ok(ObserverView::ChargeBlind),
            other => Err(format!("unknown view '{other}' (expected A, B or blind)")),
        }
    }
}

/// Per-charge conditional distributions, each carrying its emission weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChargeResolved {
    pub positive: WeightedDistribution,
    pub negative: WeightedDistribution,
}

impl ChargeResolved {
    pub fn get(&self, charge: PhotonCharge) -> &WeightedDistribution {
        match charge {
            PhotonCharge::Positive => &self.positive,
            PhotonCharge::Negative => &self.negative,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictionSet {
    pub per_charge: Option<ChargeResolved>,
    pub summed: JointDistribution,
}

impl PredictionSet {
    pub fn charge_blind(summed: JointDistribution) -> Self {
        PredictionSet { per_charge: None, summed }
    }

    pub fn from_charges(positive: WeightedDistribution, negative: WeightedDistribution) -> Result<Self> {
        let summed = sum_distributions(&positive, &negative)?;
        Ok(PredictionSet {
            per_charge: Some(ChargeResolved { positive, negative }),
            summed,
        })
    }

    /// Drops the per-charge breakdown.
    pub fn blinded(self) -> Self {
        PredictionSet::charge_blind(self.summed)
    }
}

/// Result of one emitted pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub charge: Option<PhotonCharge>,
    pub outcome_a: Outcome,
    pub outcome_b: Outcome,
    pub hidden_angle: Option<Angle>,
}

pub trait ExperimentModel: Send + Sync {
    /// Short identifier including any configuration that changes results.
    fn id(&self) -> String;

    fn predict(&self, settings: &PolarizerSettings, view: ObserverView) -> Result<PredictionSet>;

    fn sample(&self, settings: &PolarizerSettings, rng: &mut dyn RngCore) -> TrialRecord;

    /// The prediction that `sample` draws from, per charge where defined.
    fn sampling_prediction(&self, settings: &PolarizerSettings) -> Result<PredictionSet> {
        self.predict(settings, ObserverView::ChargeBlind)
    }

    /// Observer-invariant distribution.
    fn summed(&self, settings: &PolarizerSettings) -> JointDistribution {
        self.predict(settings, ObserverView::ChargeBlind)
            .expect("charge-blind prediction is defined for every model")
            .summed
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Qm,
    Balls,
    Aniso,
    Lhv,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [ModelKind::Qm, ModelKind::Balls, ModelKind::Aniso, ModelKind::Lhv];

    pub fn label(self) -> &'static str {
        match self {
            ModelKind::Qm => "qm",
            ModelKind::Balls => "balls",
            ModelKind::Aniso => "aniso",
            ModelKind::Lhv => "lhv",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "qm" => Ok(ModelKind::Qm),
            "balls" => Ok(ModelKind::Balls),
            "aniso" => Ok(ModelKind::Aniso),
            "lhv" => Ok(ModelKind::Lhv),
            other => Err(format!("unknown model '{other}' (expected qm, balls, aniso or lhv)")),
        }
    }
}

/// A configured model of any kind.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Model {
    Qm(QmModel),
    Lhv(LhvModel),
    Balls(BallsBoxesModel),
    Aniso(AnisotropicModel),
}

impl Model {
    /// Builds a model. `view` selects whose account the sampler follows;
    /// `r` is only used by the anisotropic model.
    pub fn build(kind: ModelKind, view: ObserverView, r: f64) -> Result<Self> {
        Ok(match kind {
            ModelKind::Qm => Model::Qm(QmModel),
            ModelKind::Lhv => Model::Lhv(LhvModel),
            ModelKind::Balls => Model::Balls(BallsBoxesModel::new(view)),
            ModelKind::Aniso => Model::Aniso(AnisotropicModel::new(AnisotropyParameter::new(r)?, view)?),
        })
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            Model::Qm(_) => ModelKind::Qm,
            Model::Lhv(_) => ModelKind::Lhv,
            Model::Balls(_) => ModelKind::Balls,
            Model::Aniso(_) => ModelKind::Aniso,
        }
    }

    fn inner(&self) -> &dyn ExperimentModel {
        match self {
            Model::Qm(m) => m,
            Model::Lhv(m) => m,
            Model::Balls(m) => m,
            Model::Aniso(m) => m,
        }
    }
}

impl ExperimentModel for Model {
    fn id(&self) -> String {
        self.inner().id()
    }

    fn predict(&self, settings: &PolarizerSettings, view: ObserverView) -> Result<PredictionSet> {
        self.inner().predict(settings, view)
    }

    fn sample(&self, settings: &PolarizerSettings, rng: &mut dyn RngCore) -> TrialRecord {
        self.inner().sample(settings, rng)
    }

    fn sampling_prediction(&self, settings: &PolarizerSettings) -> Result<PredictionSet> {
        self.inner().sampling_prediction(settings)
    }

    fn summed(&self, settings: &PolarizerSettings) -> JointDistribution {
        self.inner().summed(settings)
    }
}

/// Half/half weighting of the two charges, checked on the way in.
pub(crate) fn equal_charge_weights(
    positive: JointDistribution,
    negative: JointDistribution,
) -> Result<PredictionSet> {
    PredictionSet::from_charges(
        WeightedDistribution::new(0.5, positive)?,
        WeightedDistribution::new(0.5, negative)?,
    )
}

pub(crate) fn charge_free_view(model: &'static str, view: ObserverView) -> Result<()> {
    match view {
        ObserverView::ChargeBlind => Ok(()),
        other => Err(Error::UnsupportedView { model, view: other.label() }),
    }
}

/// Uniform draw in [0, 1).
pub(crate) fn uniform(rng: &mut dyn RngCore) -> f64 {
    use rand::Rng;
    rng.random::<f64>()
}

pub(crate) fn bernoulli(rng: &mut dyn RngCore, p: f64) -> bool {
    uniform(rng) < p
}
