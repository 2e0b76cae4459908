//! The four subcommands, each turning a resolved [`RunConfig`] into records.

use crate::bell::{chsh, chsh_empirical, chsh_scan, correlation, ChshResult, ChshSettings, Provenance};
use crate::domain::{marginals, Angle, JointDistribution, PhotonCharge, PolarizerSettings, CELL_LABELS};
use crate::error::Error;
use crate::models::{preferred_direction_overlap, ExperimentModel, Model};
use crate::montecarlo::{
    charge_reports, convergence_report, run_trials, to_empirical, CellCheck, ConvergenceReport,
    EmpiricalDistribution,
};

use super::config::RunConfig;
use super::render::Record;

/// Why a command did not produce a clean result.
#[derive(Debug, Clone, PartialEq)]
pub enum Failure {
    /// Parameters rejected before or during evaluation.
    Usage(String),
    /// The run completed but an impossible event was observed; the records are still emitted.
    HardFailure(Vec<Record>),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

pub type Outcome = std::result::Result<Vec<Record>, Failure>;

const P_NAMES: [&str; 4] = ["p_yy", "p_yn", "p_ny", "p_nn"];
const SE_NAMES: [&str; 4] = ["se_yy", "se_yn", "se_ny", "se_nn"];
const COUNT_NAMES: [&str; 4] = ["count_yy", "count_yn", "count_ny", "count_nn"];
const ANALYTIC_NAMES: [&str; 4] = ["analytic_yy", "analytic_yn", "analytic_ny", "analytic_nn"];
const Z_NAMES: [&str; 4] = ["z_yy", "z_yn", "z_ny", "z_nn"];

fn model_of(config: &RunConfig) -> Result<Model, Error> {
    Model::build(config.model, config.view, config.r)
}

fn settings_of(config: &RunConfig) -> Result<PolarizerSettings, Error> {
    PolarizerSettings::from_degrees(config.theta_a, config.theta_b)
}

fn with_cells(mut record: Record, names: [&'static str; 4], values: [f64; 4]) -> Record {
    for (name, v) in names.into_iter().zip(values) {
        record = record.with(name, v);
    }
    record
}

fn prediction_record(theta_deg: f64, scope: &str, weight: f64, d: &JointDistribution, overlap: f64) -> Result<Record, Error> {
    let m = marginals(d)?;
    Ok(with_cells(Record::new().with("theta_deg", theta_deg).with("scope", scope).with("weight", weight), P_NAMES, d.cells())
        .with("p_a_yes", m.p_a_yes)
        .with("p_b_yes", m.p_b_yes)
        .with("p_agree", d.p_agree())
        .with("axis_overlap", overlap))
}

/// Per-charge rows (when the model and view define them) followed by the summed row.
pub fn predict(config: &RunConfig) -> Outcome {
    let model = model_of(config)?;
    let settings = settings_of(config)?;
    let prediction = model.predict(&settings, config.view)?;
    let theta = config.theta_a - config.theta_b;
    let overlap = preferred_direction_overlap(&settings);
    let mut rows = Vec::new();
    if let Some(per) = prediction.per_charge {
        for charge in PhotonCharge::ALL {
            let w = per.get(charge);
            rows.push(prediction_record(theta, charge.label(), w.weight, &w.distribution, overlap)?);
        }
    }
    rows.push(prediction_record(theta, "summed", 1.0, &prediction.summed, overlap)?);
    Ok(rows)
}

fn simulation_record(
    scope: &str,
    empirical: &EmpiricalDistribution,
    report: &ConvergenceReport,
    fraction: Option<(f64, f64)>,
) -> Record {
    let mut r = Record::new().with("scope", scope).with("n", empirical.n);
    r = with_cells(r, P_NAMES, empirical.estimates.cells());
    r = with_cells(r, SE_NAMES, empirical.standard_errors);
    r = with_cells(r, ANALYTIC_NAMES, report.cells.map(|c| c.analytic));
    for (name, count) in COUNT_NAMES.into_iter().zip(empirical.counts) {
        r = r.with(name, count);
    }
    for (name, z) in Z_NAMES.into_iter().zip(report.z_scores()) {
        r = r.with(name, z);
    }
    let impossible: Vec<&str> = report
        .cells
        .iter()
        .zip(CELL_LABELS)
        .filter(|(c, _)| matches!(c.check, CellCheck::ImpossibleEvent { .. }))
        .map(|(_, label)| label)
        .collect();
    r.with("max_abs_z", report.max_abs_z())
        .with("chi_square", report.chi_square)
        .with("dof", report.degrees_of_freedom)
        .with("p_value", report.p_value)
        .with("impossible_cells", impossible.join(" "))
        .with("hard_failure", report.hard_failure)
        .with("fraction", fraction.map(|f| f.0))
        .with("fraction_z", fraction.map(|f| f.1))
}

/// Draws `config.trials` pairs and compares them with the distribution the
/// sampler follows. The seed must already be fixed in `config`.
pub fn simulate(config: &RunConfig) -> Outcome {
    let seed = config.seed.expect("seed fixed before dispatch");
    let model = model_of(config)?;
    let settings = settings_of(config)?;
    let prediction = model.sampling_prediction(&settings)?;
    let tally = run_trials(&model, &settings, config.trials, seed)?;
    let empirical = to_empirical(&tally)?;
    let summed = convergence_report(&prediction.summed, &empirical);
    let mut hard = summed.hard_failure;
    let mut rows = Vec::new();
    if let Some(reports) = charge_reports(&prediction, &tally)? {
        for c in reports {
            hard |= c.report.hard_failure;
            rows.push(simulation_record(c.charge.label(), &c.empirical, &c.report, Some((c.fraction, c.fraction_z))));
        }
    }
    rows.push(simulation_record("summed", &empirical, &summed, None));
    if hard {
        Err(Failure::HardFailure(rows))
    } else {
        Ok(rows)
    }
}

fn chsh_record(label: &str, s: &ChshSettings, result: &ChshResult) -> Record {
    let (trials, seed) = match result.provenance {
        Provenance::Analytic => (None, None),
        Provenance::Empirical { trials, seed } => (Some(trials), Some(seed)),
    };
    let r = Record::new()
        .with("label", label)
        .with("a", s.a.degrees())
        .with("a_prime", s.a_prime.degrees())
        .with("b", s.b.degrees())
        .with("b_prime", s.b_prime.degrees());
    with_cells(r, ["e_ab", "e_ab_prime", "e_a_prime_b", "e_a_prime_b_prime"], result.correlations)
        .with("s", result.s_value)
        .with("minus_position", result.minus_position)
        .with("se", result.standard_error)
        .with("trials", trials)
        .with("seed", seed)
}

/// Analytic S at four explicit angles or at the best point of a grid scan,
/// optionally followed by a Monte Carlo estimate at the same angles.
pub fn chsh_cmd(config: &RunConfig) -> Outcome {
    let model = model_of(config)?;
    let mut rows = Vec::new();
    let settings = if let Some(res) = config.scan {
        let scan = chsh_scan(&model, Angle::from_degrees(res)?, !config.full_scan)?;
        rows.push(chsh_record("scan", &scan.settings, &scan.result));
        scan.settings
    } else {
        let angles = [config.a, config.a_prime, config.b, config.b_prime];
        let [Some(a), Some(ap), Some(b), Some(bp)] = angles else {
            return Err(Failure::Usage(
                "chsh needs all of --a, --a-prime, --b, --b-prime, or --scan RESOLUTION".to_string(),
            ));
        };
        let s = ChshSettings::from_degrees(a, ap, b, bp)?;
        rows.push(chsh_record("analytic", &s, &chsh(&model, &s)?));
        s
    };
    if config.empirical {
        let seed = config.seed.expect("seed fixed before dispatch");
        let result = chsh_empirical(&model, &settings, config.trials, seed)?;
        rows.push(chsh_record("empirical", &settings, &result));
    }
    Ok(rows)
}

/// Relative angles start, start + step, ... up to stop inclusive.
pub fn sweep_angles(start: f64, stop: f64, step: f64) -> Result<Vec<f64>, String> {
    if !(start.is_finite() && stop.is_finite() && step.is_finite()) {
        return Err("sweep bounds must be finite".to_string());
    }
    if step <= 0.0 {
        return Err(format!("sweep step must be positive, got {step}"));
    }
    if stop < start {
        return Err(format!("empty sweep: stop {stop} is below start {start}"));
    }
    let slack = step * 1e-9;
    Ok((0u64..)
        .map(|k| start + k as f64 * step)
        .take_while(|t| *t <= stop + slack)
        .collect())
}

/// S(theta) at a = 0, b = theta, a' = 2 theta, b' = 3 theta, that is 3E(theta) - E(3 theta).
fn sweep_chsh(model: &Model, theta: f64) -> Result<f64, Error> {
    let s = ChshSettings::from_degrees(0.0, 2.0 * theta, theta, 3.0 * theta)?;
    Ok(chsh(model, &s)?.s_value)
}

/// One record per relative angle with theta_a = theta_b + theta.
pub fn sweep(config: &RunConfig) -> Outcome {
    let (Some(start), Some(stop), Some(step)) = (config.sweep_start, config.sweep_stop, config.sweep_step) else {
        return Err(Failure::Usage("sweep needs --start, --stop and --step".to_string()));
    };
    let thetas = sweep_angles(start, stop, step).map_err(Failure::Usage)?;
    let model = model_of(config)?;
    let mut rows = Vec::with_capacity(thetas.len());
    for theta in thetas {
        let settings = PolarizerSettings::from_degrees(config.theta_b + theta, config.theta_b)?;
        let d = model.summed(&settings);
        let s = if config.with_chsh { Some(sweep_chsh(&model, theta)?) } else { None };
        let m = marginals(&d)?;
        rows.push(
            with_cells(Record::new().with("theta_deg", theta), P_NAMES, d.cells())
                .with("p_a_yes", m.p_a_yes)
                .with("p_b_yes", m.p_b_yes)
                .with("correlation", correlation(&d)?)
                .with("s", s),
        );
    }
    Ok(rows)
}
