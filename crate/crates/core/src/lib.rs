//! Simulation laboratory for the two-photon polarizer correlation experiment.
//!
//! Four descriptions of the same experiment live side by side:
//!
//! * `qm`: the standard quantum prediction, with a two-step collapse sampler;
//! * `lhv`: a deterministic local-hidden-variable baseline;
//! * `balls`: the balls-and-boxes gedanken model, where Lorentz contraction
//!   of a box aperture produces the Malus-law pass probabilities;
//! * `aniso`: observers living in locally anisotropic spacetimes whose
//!   preferred directions are the polarizer axes.
//!
//! [`bell`] evaluates CHSH statistics over any of them, [`montecarlo`] runs
//! seeded, partition-invariant trial batches, and [`cli`] is the command
//! line front end.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bell;
pub mod cli;
pub mod domain;
pub mod error;
pub mod kinematics;
pub mod models;
pub mod montecarlo;

pub use domain::{
    marginals, relative_angle, sum_distributions, Angle, JointDistribution, Marginals, Outcome,
    PhotonCharge, PolarizerSettings, WeightedDistribution, PROB_TOL,
};
pub use error::{Error, Result};
pub use models::{ExperimentModel, Model, ModelKind, ObserverView, PredictionSet, TrialRecord};
