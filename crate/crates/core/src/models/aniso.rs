//! Anisotropic-spacetime model.
//!
//! Each polarizer's optical axis is the preferred direction of a locally
//! anisotropic spacetime, and each observer measures field lengths with the
//! direction-dependent norm of their own spacetime. A positively charged pair
//! arrives with fields along the two optical axes; a negatively charged pair
//! arrives with the perpendicular fields. The pass probability is the
//! squared-norm ratio raised to 1/r, which makes it the squared direction
//! cosine for every admissible r.

use std::f64::consts::{FRAC_PI_2, TAU};

use rand::RngCore;

use super::{bernoulli, equal_charge_weights, uniform, ExperimentModel, ObserverView, PredictionSet, TrialRecord};
use crate::domain::{Angle, JointDistribution, Outcome, PhotonCharge, PolarizerSettings};
use crate::error::{Error, Result};
use crate::kinematics::{
    bogoslovsky_norm_3, direction_overlap_sq, AnisotropyParameter, FieldVector, PreferredDirection,
};

fn check_exponent(r: AnisotropyParameter) -> Result<f64> {
    let v = r.value();
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(Error::ProbabilityExponentOutOfRange(v))
    }
}

/// Probability that a photon with field `e` passes, as measured in the
/// spacetime with preferred direction `nu`.
///
/// Equal to (||e||^2 / |e|^2)^(1/r). The r-powers cancel exactly, so the
/// value is evaluated as the squared direction cosine and does not change
/// in the last bit when r changes.
pub fn aniso_pass_probability(e: &FieldVector, nu: &PreferredDirection, r: AnisotropyParameter) -> Result<f64> {
    check_exponent(r)?;
    let mag = e.magnitude();
    if !(mag > 0.0) {
        return Err(Error::ZeroField);
    }
    let cosine = (nu.dot(&e.e).abs() / mag).min(1.0);
    Ok(cosine * cosine)
}

/// Same probability evaluated literally through the anisotropic norm.
pub fn aniso_pass_probability_via_norm(
    e: &FieldVector,
    nu: &PreferredDirection,
    r: AnisotropyParameter,
) -> Result<f64> {
    let rv = check_exponent(r)?;
    let mag = e.magnitude();
    let norm = bogoslovsky_norm_3(e, nu, r)?;
    let ratio = (norm * norm) / (mag * mag);
    Ok(ratio.powf(1.0 / rv).min(1.0))
}

/// (nu_A . nu_B)^2 for the two optical axes: the probability that both
/// observers record the same result.
pub fn preferred_direction_overlap(settings: &PolarizerSettings) -> f64 {
    let nu_a = PreferredDirection::in_plane(settings.theta_a);
    let nu_b = PreferredDirection::in_plane(settings.theta_b);
    direction_overlap_sq(&nu_a, &nu_b)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnisotropicModel {
    r: AnisotropyParameter,
    /// Observer whose account the sampler follows; charge-blind samples
    /// from A's account.
    pub view: ObserverView,
}

impl AnisotropicModel {
    pub fn new(r: AnisotropyParameter, view: ObserverView) -> Result<Self> {
        check_exponent(r)?;
        Ok(AnisotropicModel { r, view })
    }

    pub fn r(&self) -> AnisotropyParameter {
        self.r
    }

    /// Photon fields (towards A, towards B) for a pair of the given charge.
    pub fn fields(settings: &PolarizerSettings, charge: PhotonCharge) -> (FieldVector, FieldVector) {
        let nu_a = PreferredDirection::in_plane(settings.theta_a);
        let nu_b = PreferredDirection::in_plane(settings.theta_b);
        match charge {
            PhotonCharge::Positive => (FieldVector::along(&nu_a, 1.0), FieldVector::along(&nu_b, 1.0)),
            PhotonCharge::Negative => (
                FieldVector::along(&nu_a.perpendicular_in_plane(), 1.0),
                FieldVector::along(&nu_b.perpendicular_in_plane(), 1.0),
            ),
        }
    }

    /// Pass probabilities at (A, B) as computed by observer `view`.
    pub fn pass_probabilities(
        &self,
        settings: &PolarizerSettings,
        view: ObserverView,
        charge: PhotonCharge,
    ) -> Result<(f64, f64)> {
        let axis = match view {
            ObserverView::B => settings.theta_b,
            ObserverView::A | ObserverView::ChargeBlind => settings.theta_a,
        };
        let nu = PreferredDirection::in_plane(axis);
        let (e_a, e_b) = Self::fields(settings, charge);
        Ok((
            aniso_pass_probability(&e_a, &nu, self.r)?,
            aniso_pass_probability(&e_b, &nu, self.r)?,
        ))
    }

    fn sampling_view(&self) -> ObserverView {
        match self.view {
            ObserverView::ChargeBlind => ObserverView::A,
            v => v,
        }
    }
}

/// Per-charge and summed distributions from the observer `view`.
pub fn aniso_predict(
    settings: &PolarizerSettings,
    view: ObserverView,
    r: AnisotropyParameter,
) -> Result<PredictionSet> {
    AnisotropicModel::new(r, view)?.predict(settings, view)
}

/// One pair from A's account.
pub fn aniso_sample(settings: &PolarizerSettings, rng: &mut dyn RngCore, r: AnisotropyParameter) -> Result<TrialRecord> {
    Ok(AnisotropicModel::new(r, ObserverView::A)?.sample(settings, rng))
}

/// Charge selected by a field vector that starts at `start` (measured from
/// the optical axis) and rotates until it meets either the axis line or
/// its perpendicular. Reaching the axis line makes the photon positive.
pub fn charge_from_start_direction(start: f64) -> PhotonCharge {
    let quadrant = ((start.rem_euclid(TAU) / FRAC_PI_2).floor() as u32).min(3);
    // the next stop is at (quadrant + 1) * 90 degrees; even multiples lie on the axis
    if quadrant % 2 == 1 {
        PhotonCharge::Positive
    } else {
        PhotonCharge::Negative
    }
}

impl ExperimentModel for AnisotropicModel {
    fn id(&self) -> String {
        format!("aniso(r={},view={})", self.r.value(), self.view)
    }

    fn predict(&self, settings: &PolarizerSettings, view: ObserverView) -> Result<PredictionSet> {
        let per_charge = |charge| -> Result<JointDistribution> {
            let (pa, pb) = self.pass_probabilities(settings, view, charge)?;
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
        let start = uniform(rng) * TAU;
        let charge = charge_from_start_direction(start);
        let (pa, pb) = self
            .pass_probabilities(settings, self.sampling_view(), charge)
            .expect("model fields are non-zero and r is validated");
        let a = bernoulli(rng, pa);
        let b = bernoulli(rng, pb);
        TrialRecord {
            charge: Some(charge),
            outcome_a: Outcome::from_pass(a),
            outcome_b: Outcome::from_pass(b),
            hidden_angle: Some(Angle::from_radians(start).expect("finite draw")),
        }
    }

    fn sampling_prediction(&self, settings: &PolarizerSettings) -> Result<PredictionSet> {
        self.predict(settings, self.sampling_view())
    }
}
