//! Seeded trial engine.
//!
//! Trial `i` of a run with seed `s` draws from its own ChaCha8 stream: the
//! key comes from `s` and the stream number is `i`. A tally therefore does
//! not depend on how the trial range is split across workers, and merging
//! sub-tallies is plain integer addition.

use std::ops::Range;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::domain::{cell_index, JointDistribution, PhotonCharge, PolarizerSettings, CELL_LABELS, PROB_TOL};
use crate::error::{Error, Result};
use crate::models::{ExperimentModel, PredictionSet, TrialRecord};

/// Trials per work item in [`run_trials`].
const CHUNK: u64 = 1 << 16;

/// Counts of the four joint outcomes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    /// YY, YN, NY, NN.
    pub counts: [u64; 4],
    /// Same shape per charge (positive, negative) for models that define one.
    pub per_charge: Option<[[u64; 4]; 2]>,
    pub n: u64,
    pub seed: u64,
    pub model_id: String,
}

impl Tally {
    pub fn empty(model_id: impl Into<String>, seed: u64, with_charge: bool) -> Self {
        Tally {
            counts: [0; 4],
            per_charge: with_charge.then_some([[0; 4]; 2]),
            n: 0,
            seed,
            model_id: model_id.into(),
        }
    }

    pub fn record(&mut self, trial: &TrialRecord) {
        let cell = cell_index(trial.outcome_a, trial.outcome_b);
        self.counts[cell] += 1;
        self.n += 1;
        if let Some(per) = self.per_charge.as_mut() {
            let charge = trial.charge.expect("charged model produced a charge-free trial");
            per[charge.index()][cell] += 1;
        }
    }

    /// Adds another tally of the same run. Associative and commutative.
    pub fn merge(&mut self, other: &Tally) -> Result<()> {
        if self.seed != other.seed || self.model_id != other.model_id {
            return Err(Error::IncompatibleTally(format!(
                "{}#{} vs {}#{}",
                self.model_id, self.seed, other.model_id, other.seed
            )));
        }
        match (self.per_charge.as_mut(), other.per_charge.as_ref()) {
            (Some(mine), Some(theirs)) => {
                for (m, t) in mine.iter_mut().zip(theirs) {
                    for (x, y) in m.iter_mut().zip(t) {
                        *x += y;
                    }
                }
            }
            (None, None) => {}
            _ => return Err(Error::IncompatibleTally("per-charge counts present on one side only".into())),
        }
        for (x, y) in self.counts.iter_mut().zip(other.counts) {
            *x += y;
        }
        self.n += other.n;
        Ok(())
    }

    pub fn charge_counts(&self, charge: PhotonCharge) -> Option<[u64; 4]> {
        self.per_charge.map(|p| p[charge.index()])
    }

    /// Checks the count invariants.
    pub fn is_consistent(&self) -> bool {
        let total: u64 = self.counts.iter().sum();
        if total != self.n {
            return false;
        }
        match self.per_charge {
            None => true,
            Some(per) => (0..4).all(|c| per[0][c] + per[1][c] == self.counts[c]),
        }
    }
}

fn base_stream(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random stream of trial `index`.
pub fn trial_stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = base_stream(seed);
    rng.set_stream(index);
    rng
}

fn has_charge(model: &dyn ExperimentModel, settings: &PolarizerSettings) -> Result<bool> {
    Ok(model.sampling_prediction(settings)?.per_charge.is_some())
}

fn run_range_unchecked(
    model: &dyn ExperimentModel,
    settings: &PolarizerSettings,
    seed: u64,
    range: Range<u64>,
    with_charge: bool,
) -> Tally {
    let base = base_stream(seed);
    let mut tally = Tally::empty(model.id(), seed, with_charge);
    for i in range {
        let mut rng = base.clone();
        rng.set_stream(i);
        tally.record(&model.sample(settings, &mut rng));
    }
    tally
}

/// Runs trials `range` of the run keyed by `seed`.
pub fn run_trial_range(
    model: &dyn ExperimentModel,
    settings: &PolarizerSettings,
    seed: u64,
    range: Range<u64>,
) -> Result<Tally> {
    let with_charge = has_charge(model, settings)?;
    Ok(run_range_unchecked(model, settings, seed, range, with_charge))
}

fn merge_all(first: Tally, rest: impl IntoIterator<Item = Tally>) -> Result<Tally> {
    let mut total = first;
    for t in rest {
        total.merge(&t)?;
    }
    Ok(total)
}

/// Runs `n` trials on the global rayon pool.
pub fn run_trials(model: &dyn ExperimentModel, settings: &PolarizerSettings, n: u64, seed: u64) -> Result<Tally> {
    if n == 0 {
        return Err(Error::ZeroTrials);
    }
    let with_charge = has_charge(model, settings)?;
    let chunks: Vec<Range<u64>> = (0..n.div_ceil(CHUNK))
        .map(|k| k * CHUNK..((k + 1) * CHUNK).min(n))
        .collect();
    let parts: Vec<Tally> = chunks
        .into_par_iter()
        .map(|r| run_range_unchecked(model, settings, seed, r, with_charge))
        .collect();
    let mut parts = parts.into_iter();
    let first = parts.next().expect("n >= 1 gives one chunk");
    merge_all(first, parts)
}

/// Runs `n` trials split evenly over `workers` threads of a dedicated pool.
pub fn run_trials_with_workers(
    model: &dyn ExperimentModel,
    settings: &PolarizerSettings,
    n: u64,
    seed: u64,
    workers: usize,
) -> Result<Tally> {
    if n == 0 {
        return Err(Error::ZeroTrials);
    }
    let workers = workers.max(1);
    let with_charge = has_charge(model, settings)?;
    let per = n.div_ceil(workers as u64);
    let ranges: Vec<Range<u64>> = (0..workers as u64)
        .map(|w| (w * per).min(n)..((w + 1) * per).min(n))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .expect("thread pool");
    let parts: Vec<Tally> = pool.install(|| {
        ranges
            .into_par_iter()
            .map(|r| run_range_unchecked(model, settings, seed, r, with_charge))
            .collect()
    });
    let mut parts = parts.into_iter();
    let first = parts.next().expect("at least one worker");
    merge_all(first, parts)
}

/// Frequencies with binomial standard errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalDistribution {
    pub estimates: JointDistribution,
    /// sqrt(p(1 - p) / n) per cell.
    pub standard_errors: [f64; 4],
    pub counts: [u64; 4],
    pub n: u64,
}

fn empirical_from_counts(counts: [u64; 4]) -> Result<EmpiricalDistribution> {
    let n: u64 = counts.iter().sum();
    if n == 0 {
        return Err(Error::ZeroTrials);
    }
    let nf = n as f64;
    let p = counts.map(|c| c as f64 / nf);
    Ok(EmpiricalDistribution {
        estimates: JointDistribution::from_cells(p)?,
        standard_errors: p.map(|q| (q * (1.0 - q) / nf).sqrt()),
        counts,
        n,
    })
}

pub fn to_empirical(t: &Tally) -> Result<EmpiricalDistribution> {
    empirical_from_counts(t.counts)
}

/// Outcome of checking one cell against its analytic probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CellCheck {
    /// Ordinary cell: standardized deviation using the analytic standard error.
    Z { z: f64 },
    /// Analytic probability is 0 or 1 and the count matches exactly.
    Exact,
    /// Analytic probability is 0 or 1 and the count does not match.
    ImpossibleEvent { expected: u64, observed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CellReport {
    pub label: &'static str,
    pub analytic: f64,
    pub estimate: f64,
    pub check: CellCheck,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub cells: [CellReport; 4],
    pub chi_square: f64,
    pub degrees_of_freedom: usize,
    pub p_value: f64,
    pub hard_failure: bool,
}

impl ConvergenceReport {
    pub fn max_abs_z(&self) -> f64 {
        self.cells
            .iter()
            .filter_map(|c| match c.check {
                CellCheck::Z { z } => Some(z.abs()),
                _ => None,
            })
            .fold(0.0, f64::max)
    }

    pub fn z_scores(&self) -> [Option<f64>; 4] {
        self.cells.map(|c| match c.check {
            CellCheck::Z { z } => Some(z),
            _ => None,
        })
    }

    /// No impossible event and every z-score below `limit` in magnitude.
    pub fn passes(&self, limit: f64) -> bool {
        !self.hard_failure && self.max_abs_z() < limit
    }
}

/// Compares empirical frequencies with the analytic distribution.
///
/// Cells whose analytic probability is within 1e-12 of 0 or 1 have no
/// usable standard error; for those the count must match exactly. The
/// chi-square statistic runs over the remaining cells.
pub fn convergence_report(analytic: &JointDistribution, empirical: &EmpiricalDistribution) -> ConvergenceReport {
    let n = empirical.n;
    let nf = n as f64;
    let mut chi_square = 0.0;
    let mut free_cells = 0usize;
    let mut hard_failure = false;
    let cells = std::array::from_fn(|k| {
        let p = analytic.cells()[k];
        let observed = empirical.counts[k];
        let check = if p <= PROB_TOL || p >= 1.0 - PROB_TOL {
            let expected = if p <= PROB_TOL { 0 } else { n };
            if observed == expected {
                CellCheck::Exact
            } else {
                hard_failure = true;
                CellCheck::ImpossibleEvent { expected, observed }
            }
        } else {
            free_cells += 1;
            let expected = nf * p;
            let diff = observed as f64 - expected;
            chi_square += diff * diff / expected;
            let se = (p * (1.0 - p) / nf).sqrt();
            CellCheck::Z { z: (empirical.estimates.cells()[k] - p) / se }
        };
        CellReport { label: CELL_LABELS[k], analytic: p, estimate: empirical.estimates.cells()[k], check }
    });
    let dof = free_cells.saturating_sub(1);
    let p_value = if dof == 0 {
        1.0
    } else {
        let dist = ChiSquared::new(dof as f64).expect("positive degrees of freedom");
        1.0 - dist.cdf(chi_square)
    };
    ConvergenceReport { cells, chi_square, degrees_of_freedom: dof, p_value, hard_failure }
}

/// Per-charge check of a charged model's tally.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChargeReport {
    pub charge: PhotonCharge,
    /// Fraction of trials that carried this charge and its z-score against the weight.
    pub fraction: f64,
    pub fraction_z: f64,
    pub empirical: EmpiricalDistribution,
    pub report: ConvergenceReport,
}

/// Compares per-charge tallies with the per-charge conditional
/// distributions. `None` when either side has no charge breakdown.
pub fn charge_reports(prediction: &PredictionSet, tally: &Tally) -> Result<Option<Vec<ChargeReport>>> {
    let (Some(per), Some(_)) = (prediction.per_charge.as_ref(), tally.per_charge.as_ref()) else {
        return Ok(None);
    };
    let nf = tally.n as f64;
    let mut out = Vec::with_capacity(2);
    for charge in PhotonCharge::ALL {
        let counts = tally.charge_counts(charge).expect("checked above");
        let weighted = per.get(charge);
        let seen: u64 = counts.iter().sum();
        let fraction = seen as f64 / nf;
        let w = weighted.weight;
        let fraction_z = (fraction - w) / (w * (1.0 - w) / nf).sqrt();
        let empirical = empirical_from_counts(counts)?;
        let report = convergence_report(&weighted.distribution, &empirical);
        out.push(ChargeReport { charge, fraction, fraction_z, empirical, report });
    }
    Ok(Some(out))
}
