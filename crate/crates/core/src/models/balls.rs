//! Balls-and-boxes gedanken model.
//!
//! Each box passes a positively charged ball with probability
//! (dy / dy_max)^2 and a negatively charged one with the complement. The
//! observer sees its own box at full aperture and the other box contracted
//! by its relative velocity, which is tied to the relative angle of the two
//! index dials.

use rand::RngCore;

use super::{bernoulli, equal_charge_weights, ExperimentModel, ObserverView, PredictionSet, TrialRecord};
use crate::domain::{Angle, JointDistribution, Outcome, PhotonCharge, PolarizerSettings};
use crate::error::Result;
use crate::kinematics::{observed_aperture, Aperture};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallsBoxesModel {
    /// Maximal tube length; every box is built with it.
    pub dy_max: f64,
    /// Observer whose account the sampler follows. A charge-blind model
    /// samples from A's account.
    pub view: ObserverView,
}

impl BallsBoxesModel {
    pub fn new(view: ObserverView) -> Self {
        BallsBoxesModel { dy_max: 1.0, view }
    }

    /// Apertures of boxes (A, B) as measured by `view`.
    fn apertures(&self, theta: Angle, view: ObserverView) -> Result<(Aperture, Aperture)> {
        let own = Aperture::full(self.dy_max)?;
        let other = Aperture::new(observed_aperture(self.dy_max, theta)?, self.dy_max)?;
        Ok(match view {
            ObserverView::B => (other, own),
            ObserverView::A | ObserverView::ChargeBlind => (own, other),
        })
    }

    /// Pass probabilities at boxes (A, B) for a ball pair of the given charge.
    pub fn pass_probabilities(
        &self,
        settings: &PolarizerSettings,
        view: ObserverView,
        charge: PhotonCharge,
    ) -> Result<(f64, f64)> {
        let (a, b) = self.apertures(settings.relative_angle(), view)?;
        let (pa, pb) = (a.pass_probability(), b.pass_probability());
        Ok(match charge {
            PhotonCharge::Positive => (pa, pb),
            PhotonCharge::Negative => (1.0 - pa, 1.0 - pb),
        })
    }

    fn sampling_view(&self) -> ObserverView {
        match self.view {
            ObserverView::ChargeBlind => ObserverView::A,
            v => v,
        }
    }
}

impl Default for BallsBoxesModel {
    fn default() -> Self {
        BallsBoxesModel::new(ObserverView::A)
    }
}

/// Per-charge and summed distributions from the observer `view`.
pub fn balls_predict(settings: &PolarizerSettings, view: ObserverView) -> Result<PredictionSet> {
    BallsBoxesModel::default().predict(settings, view)
}

/// One pair from A's account: charge is a fair coin, then each box decides
/// independently given the charge.
pub fn balls_sample(settings: &PolarizerSettings, rng: &mut dyn RngCore) -> TrialRecord {
    BallsBoxesModel::default().sample(settings, rng)
}

impl ExperimentModel for BallsBoxesModel {
    fn id(&self) -> String {
        format!("balls(view={})", self.view)
    }

    fn predict(&self, settings: &PolarizerSettings, view: ObserverView) -> Result<PredictionSet> {
        let account = match view {
            ObserverView::ChargeBlind => ObserverView::A,
            v => v,
        };
        let per_charge = |charge| -> Result<JointDistribution> {
            let (pa, pb) = self.pass_probabilities(settings, account, charge)?;
            JointDistribution::independent(pa, pb)
        };
        let set = equal_charge_weights(
            per_charge(PhotonCharge::Positive)?,
            per_charge(PhotonCharge::Negative)?,
        )?;
        Ok(match view {
            ObserverView::ChargeBlind => set.blinded(),
            _ => set,
        })
    }

    fn sample(&self, settings: &PolarizerSettings, rng: &mut dyn RngCore) -> TrialRecord {
        let charge = if bernoulli(rng, 0.5) { PhotonCharge::Positive } else { PhotonCharge::Negative };
        let (pa, pb) = self
            .pass_probabilities(settings, self.sampling_view(), charge)
            .expect("model apertures are valid");
        let a = bernoulli(rng, pa);
        let b = bernoulli(rng, pb);
        TrialRecord {
            charge: Some(charge),
            outcome_a: Outcome::from_pass(a),
            outcome_b: Outcome::from_pass(b),
            hidden_angle: None,
        }
    }

    fn sampling_prediction(&self, settings: &PolarizerSettings) -> Result<PredictionSet> {
        self.predict(settings, self.sampling_view())
    }
}
