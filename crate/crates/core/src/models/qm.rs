//! Standard quantum prediction for an entangled photon pair.

use rand::RngCore;

use super::{bernoulli, charge_free_view, ExperimentModel, ObserverView, PredictionSet, TrialRecord};
use crate::domain::{JointDistribution, Outcome, PolarizerSettings};
use crate::error::Result;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct QmModel;

/// (cos^2/2, sin^2/2, sin^2/2, cos^2/2) of the relative angle.
pub fn qm_predict(settings: &PolarizerSettings) -> JointDistribution {
    let theta = settings.relative_angle();
    let c2 = 0.5 * theta.cos_sq();
    let s2 = 0.5 * theta.sin_sq();
    JointDistribution::new(c2, s2, s2, c2).expect("quantum prediction is a distribution")
}

/// Measurement at A first (fair coin), then B with the Malus probability of
/// the collapsed state: cos^2 if A passed, sin^2 if it did not.
pub fn qm_sample(settings: &PolarizerSettings, rng: &mut dyn RngCore) -> TrialRecord {
    let theta = settings.relative_angle();
    let a_passed = bernoulli(rng, 0.5);
    let p_b = if a_passed { theta.cos_sq() } else { theta.sin_sq() };
    let b_passed = bernoulli(rng, p_b);
    TrialRecord {
        charge: None,
        outcome_a: Outcome::from_pass(a_passed),
        outcome_b: Outcome::from_pass(b_passed),
        hidden_angle: None,
    }
}

impl ExperimentModel for QmModel {
    fn id(&self) -> String {
        "qm".to_string()
    }

    fn predict(&self, settings: &PolarizerSettings, view: ObserverView) -> Result<PredictionSet> {
        charge_free_view("qm", view)?;
        Ok(PredictionSet::charge_blind(qm_predict(settings)))
    }

    fn sample(&self, settings: &PolarizerSettings, rng: &mut dyn RngCore) -> TrialRecord {
        qm_sample(settings, rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{marginals, PROB_TOL};
    use crate::error::Error;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn at(deg: f64) -> PolarizerSettings {
        PolarizerSettings::from_degrees(deg, 0.0).unwrap()
    }

    #[test]
    fn predict_examples() {
        assert_eq!(qm_predict(&at(0.0)).cells(), [0.5, 0.0, 0.0, 0.5]);
        assert_eq!(qm_predict(&at(90.0)).cells(), [0.0, 0.5, 0.5, 0.0]);
        let d = qm_predict(&at(30.0));
        for (x, y) in d.cells().iter().zip([0.375, 0.125, 0.125, 0.375]) {
            assert_abs_diff_eq!(*x, y, epsilon = PROB_TOL);
        }
    }

    #[test]
    fn marginals_are_half_on_grid() {
        for k in -180..=180 {
            let m = marginals(&qm_predict(&at(k as f64))).unwrap();
            assert_abs_diff_eq!(m.p_a_yes, 0.5, epsilon = PROB_TOL);
            assert_abs_diff_eq!(m.p_b_yes, 0.5, epsilon = PROB_TOL);
        }
    }

    #[test]
    fn only_charge_blind_view() {
        let err = QmModel.predict(&at(10.0), ObserverView::A).unwrap_err();
        assert!(matches!(err, Error::UnsupportedView { .. }));
    }

    #[test]
    fn sampler_forced_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..2000 {
            let t = qm_sample(&at(0.0), &mut rng);
            assert_eq!(t.outcome_a, t.outcome_b);
            let t = qm_sample(&at(90.0), &mut rng);
            assert_ne!(t.outcome_a, t.outcome_b);
            assert!(t.charge.is_none());
        }
    }

    #[test]
    fn sampler_frequency_at_thirty_degrees() {
        let n = 1_000_000;
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let s = at(30.0);
        let yy = (0..n)
            .filter(|_| {
                let t = qm_sample(&s, &mut rng);
                t.outcome_a == Outcome::Yes && t.outcome_b == Outcome::Yes
            })
            .count();
        let p_hat = yy as f64 / n as f64;
        let se = (0.375f64 * 0.625 / n as f64).sqrt();
        assert!((p_hat - 0.375).abs() < 4.0 * se, "p_hat = {p_hat}");
    }
}
