//! Deterministic local-hidden-variable baseline.
//!
//! Each pair carries a hidden axis lambda, uniform on [0, pi). A polarizer
//! answers Yes exactly when its optical axis lies within pi/4 of lambda
//! (angles taken mod pi). The joint distribution is piecewise linear in the
//! relative angle and the CHSH statistic never exceeds 2.

use std::f64::consts::{FRAC_PI_4, PI};

use rand::RngCore;

use super::{charge_free_view, uniform, ExperimentModel, ObserverView, PredictionSet, TrialRecord};
use crate::domain::{Angle, JointDistribution, Outcome, PolarizerSettings};
use crate::error::Result;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LhvModel;

/// Distance between two axes, mod pi, in [0, pi/2].
pub(crate) fn axis_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(PI);
    d.min(PI - d)
}

fn answers_yes(axis: Angle, lambda: f64) -> bool {
    axis_distance(axis.radians(), lambda) < FRAC_PI_4
}

/// Closed form: p_yy = p_nn = 1/2 - delta/pi and p_yn = p_ny = delta/pi, where
/// delta is the axis distance. The two pi/2-wide Yes windows overlap over
/// pi/2 - delta, and so do the No windows.
pub fn lhv_predict(settings: &PolarizerSettings) -> JointDistribution {
    let delta = axis_distance(settings.theta_a.radians(), settings.theta_b.radians());
    let differ = delta / PI;
    let agree = 0.5 - differ;
    JointDistribution::new(agree, differ, differ, agree).expect("window overlaps form a distribution")
}

pub fn lhv_sample(settings: &PolarizerSettings, rng: &mut dyn RngCore) -> TrialRecord {
    let lambda = uniform(rng) * PI;
    TrialRecord {
        charge: None,
        outcome_a: Outcome::from_pass(answers_yes(settings.theta_a, lambda)),
        outcome_b: Outcome::from_pass(answers_yes(settings.theta_b, lambda)),
        hidden_angle: Some(Angle::from_radians(lambda).expect("finite draw")),
    }
}

impl ExperimentModel for LhvModel {
    fn id(&self) -> String {
        "lhv".to_string()
    }

    fn predict(&self, settings: &PolarizerSettings, view: ObserverView) -> Result<PredictionSet> {
        charge_free_view("lhv", view)?;
        Ok(PredictionSet::charge_blind(lhv_predict(settings)))
    }

    fn sample(&self, settings: &PolarizerSettings, rng: &mut dyn RngCore) -> TrialRecord {
        lhv_sample(settings, rng)
    }
}
