//! Correlation coefficients and the CHSH statistic over any model.
//!
//! S = E(a,b) - E(a,b') + E(a',b) + E(a',b'). The scan also tries the minus
//! sign on each of the other three terms, so no choice of convention can
//! hide a violation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{marginals, Angle, JointDistribution, PolarizerSettings};
use crate::error::{Error, Result};
use crate::models::ExperimentModel;
use crate::montecarlo::{run_trials, Tally};

/// Largest grid spacing a scan accepts, in degrees.
pub const MAX_SCAN_RESOLUTION_DEG: f64 = 15.0;

/// E = P(YY) + P(NN) - P(YN) - P(NY).
pub fn correlation(d: &JointDistribution) -> Result<f64> {
    marginals(d)?;
    Ok(d.p_yy() + d.p_nn() - d.p_yn() - d.p_ny())
}

/// The four analyzer settings of a CHSH test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChshSettings {
    pub a: Angle,
    pub a_prime: Angle,
    pub b: Angle,
    pub b_prime: Angle,
}

impl ChshSettings {
    pub fn from_degrees(a: f64, a_prime: f64, b: f64, b_prime: f64) -> Result<Self> {
        Ok(ChshSettings {
            a: Angle::from_degrees(a)?,
            a_prime: Angle::from_degrees(a_prime)?,
            b: Angle::from_degrees(b)?,
            b_prime: Angle::from_degrees(b_prime)?,
        })
    }

    /// Settings 0 / 45 / 22.5 / 67.5 degrees, optimal for the quantum prediction.
    pub fn tsirelson() -> Self {
        Self::from_degrees(0.0, 45.0, 22.5, 67.5).expect("finite angles")
    }

    /// (a,b), (a,b'), (a',b), (a',b').
    pub fn pairs(&self) -> [PolarizerSettings; 4] {
        [
            PolarizerSettings::new(self.a, self.b),
            PolarizerSettings::new(self.a, self.b_prime),
            PolarizerSettings::new(self.a_prime, self.b),
            PolarizerSettings::new(self.a_prime, self.b_prime),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Provenance {
    Analytic,
    Empirical { trials: u64, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChshResult {
    pub s_value: f64,
    /// E(a,b), E(a,b'), E(a',b), E(a',b').
    pub correlations: [f64; 4],
    /// Index of the correlation carrying the minus sign (1 is the usual form).
    pub minus_position: usize,
    pub provenance: Provenance,
    /// Combined standard error, empirical results only.
    pub standard_error: Option<f64>,
}

pub const CANONICAL_MINUS: usize = 1;

fn combine(correlations: &[f64; 4], minus_position: usize) -> f64 {
    correlations
        .iter()
        .enumerate()
        .map(|(i, e)| if i == minus_position { -e } else { *e })
        .sum()
}

/// Analytic S from the model's charge-summed distributions.
pub fn chsh(model: &dyn ExperimentModel, s: &ChshSettings) -> Result<ChshResult> {
    let mut correlations = [0.0; 4];
    for (slot, pair) in correlations.iter_mut().zip(s.pairs()) {
        *slot = correlation(&model.summed(&pair))?;
    }
    Ok(ChshResult {
        s_value: combine(&correlations, CANONICAL_MINUS),
        correlations,
        minus_position: CANONICAL_MINUS,
        provenance: Provenance::Analytic,
        standard_error: None,
    })
}

/// Correlation estimated from a tally, with its standard error sqrt((1 - E^2) / n).
pub fn empirical_correlation(t: &Tally) -> (f64, f64) {
    let [yy, yn, ny, nn] = t.counts;
    let n = t.n as f64;
    let e = (yy as f64 + nn as f64 - yn as f64 - ny as f64) / n;
    (e, ((1.0 - e * e).max(0.0) / n).sqrt())
}

/// Monte Carlo S with `trials` pairs per setting. Setting k uses seed + k.
pub fn chsh_empirical(model: &dyn ExperimentModel, s: &ChshSettings, trials: u64, seed: u64) -> Result<ChshResult> {
    let mut correlations = [0.0; 4];
    let mut variance = 0.0;
    for (k, pair) in s.pairs().iter().enumerate() {
        let tally = run_trials(model, pair, trials, seed.wrapping_add(k as u64))?;
        let (e, se) = empirical_correlation(&tally);
        correlations[k] = e;
        variance += se * se;
    }
    Ok(ChshResult {
        s_value: combine(&correlations, CANONICAL_MINUS),
        correlations,
        minus_position: CANONICAL_MINUS,
        provenance: Provenance::Empirical { trials, seed },
        standard_error: Some(variance.sqrt()),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub settings: ChshSettings,
    pub result: ChshResult,
    pub resolution_deg: f64,
    pub grid_points: usize,
    /// Whether a was pinned to 0 (valid for rotation-invariant models).
    pub reduced: bool,
}

impl ScanResult {
    pub fn max_abs_s(&self) -> f64 {
        self.result.s_value.abs()
    }
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    key: i64,
    s: f64,
    idx: [usize; 4],
    minus: usize,
}

// |S| quantized at 1e-12 so that rounding noise cannot reorder ties
fn tie_key(s: f64) -> i64 {
    (s.abs() * 1e12).round() as i64
}

fn better(current: Option<Candidate>, next: Candidate) -> Option<Candidate> {
    match current {
        Some(c) if c.key >= next.key => Some(c),
        _ => Some(next),
    }
}

/// Exhaustive search for the largest |S| over a grid on [0, 180) degrees.
///
/// Correlations are tabulated once per (a-axis, b-axis) pair. Ties are
/// broken by the first candidate in row-major order (a, a', b, b', sign
/// position); parallel evaluation returns the same answer as a sequential
/// loop.
pub fn chsh_scan(model: &dyn ExperimentModel, resolution: Angle, reduce: bool) -> Result<ScanResult> {
    let res = resolution.degrees();
    if !(res > 0.0) {
        return Err(Error::InvalidResolution(res, "must be positive"));
    }
    if res > MAX_SCAN_RESOLUTION_DEG {
        return Err(Error::InvalidResolution(res, "coarser than 15 degrees"));
    }
    let steps = 180.0 / res;
    if (steps - steps.round()).abs() > 1e-9 {
        return Err(Error::InvalidResolution(res, "must divide 180 degrees"));
    }
    let m = steps.round() as usize;
    let angles: Vec<Angle> = (0..m)
        .map(|k| Angle::from_degrees(k as f64 * res))
        .collect::<Result<_>>()?;

    let mut table = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            let d = model.summed(&PolarizerSettings::new(angles[i], angles[j]));
            table[i * m + j] = correlation(&d)?;
        }
    }
    let e = |i: usize, j: usize| table[i * m + j];

    let a_range = if reduce { 0..1 } else { 0..m };
    let rows: Vec<(usize, usize)> = a_range.flat_map(|a| (0..m).map(move |ap| (a, ap))).collect();
    let best = rows
        .par_iter()
        .map(|&(a, ap)| {
            let mut best: Option<Candidate> = None;
            for b in 0..m {
                for bp in 0..m {
                    let corr = [e(a, b), e(a, bp), e(ap, b), e(ap, bp)];
                    for minus in 0..4 {
                        let s = combine(&corr, minus);
                        best = better(best, Candidate { key: tie_key(s), s, idx: [a, ap, b, bp], minus });
                    }
                }
            }
            best
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(None, |acc, c| match c {
            Some(c) => better(acc, c),
            None => acc,
        })
        .expect("grid has at least one point");

    let [a, ap, b, bp] = best.idx;
    let settings = ChshSettings { a: angles[a], a_prime: angles[ap], b: angles[b], b_prime: angles[bp] };
    Ok(ScanResult {
        settings,
        result: ChshResult {
            s_value: best.s,
            correlations: [e(a, b), e(a, bp), e(ap, b), e(ap, bp)],
            minus_position: best.minus,
            provenance: Provenance::Analytic,
            standard_error: None,
        },
        resolution_deg: res,
        grid_points: m,
        reduced: reduce,
    })
}
