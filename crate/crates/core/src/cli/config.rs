//! Effective run configuration: defaults, then the optional config file,
//! then command-line flags.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::models::{ModelKind, ObserverView};

pub const DEFAULT_R: f64 = 0.5;
pub const DEFAULT_TRIALS: u64 = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Table,
    Csv,
    Json,
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputFormat::Table => "table",
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        })
    }
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "table" => Ok(OutputFormat::Table),
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(format!("unknown output format '{other}' (expected table, csv or json)")),
        }
    }
}

/// Every knob of a run. Serialized into each output so a result can be
/// reproduced from its own file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    pub model: ModelKind,
    /// Degrees.
    pub theta_a: f64,
    /// Degrees.
    pub theta_b: f64,
    pub r: f64,
    pub view: ObserverView,
    pub trials: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub output: OutputFormat,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep_start: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep_stop: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep_step: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a_prime: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b_prime: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scan: Option<f64>,
    pub full_scan: bool,
    pub empirical: bool,
    pub with_chsh: bool,
}

/// Partial configuration from a file or from flags; later layers win.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigLayer {
    pub command: Option<String>,
    pub model: Option<ModelKind>,
    pub theta_a: Option<f64>,
    pub theta_b: Option<f64>,
    pub r: Option<f64>,
    pub view: Option<ObserverView>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub output: Option<OutputFormat>,
    pub sweep_start: Option<f64>,
    pub sweep_stop: Option<f64>,
    pub sweep_step: Option<f64>,
    pub a: Option<f64>,
    pub a_prime: Option<f64>,
    pub b: Option<f64>,
    pub b_prime: Option<f64>,
    pub scan: Option<f64>,
    pub full_scan: Option<bool>,
    pub empirical: Option<bool>,
    pub with_chsh: Option<bool>,
}

macro_rules! overlay {
    ($base:ident, $top:ident, $($field:ident),*) => {
        $( if $top.$field.is_some() { $base.$field = $top.$field.clone(); } )*
    };
}

impl ConfigLayer {
    pub fn from_toml(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| format!("invalid config file: {e}"))
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        Self::from_toml(&text)
    }

    /// `self` overridden by every field set in `top`.
    pub fn overlaid(mut self, top: &ConfigLayer) -> ConfigLayer {
        overlay!(
            self, top, command, model, theta_a, theta_b, r, view, trials, seed, output, sweep_start,
            sweep_stop, sweep_step, a, a_prime, b, b_prime, scan, full_scan, empirical, with_chsh
        );
        self
    }

    /// Fills defaults and validates. Errors are usage errors.
    pub fn resolve(self, command: &str) -> Result<RunConfig, String> {
        let model = self.model.unwrap_or(ModelKind::Qm);
        let view = self.view.unwrap_or(match model {
            ModelKind::Qm | ModelKind::Lhv => ObserverView::ChargeBlind,
            ModelKind::Balls | ModelKind::Aniso => ObserverView::A,
        });
        if matches!(model, ModelKind::Qm | ModelKind::Lhv) && view != ObserverView::ChargeBlind {
            return Err(format!("model {model} defines no hidden charge; only --view blind is available"));
        }
        let r = self.r.unwrap_or(DEFAULT_R);
        if model == ModelKind::Aniso && !(r > 0.0 && r < 1.0) {
            return Err(format!("--r must lie strictly between 0 and 1, got {r}"));
        }
        let trials = self.trials.unwrap_or(DEFAULT_TRIALS);
        if trials == 0 {
            return Err("--trials must be at least 1".to_string());
        }
        let theta_a = self.theta_a.unwrap_or(0.0);
        let theta_b = self.theta_b.unwrap_or(0.0);
        for (name, v) in [("theta-a", theta_a), ("theta-b", theta_b)] {
            if !v.is_finite() {
                return Err(format!("--{name} must be finite"));
            }
        }
        Ok(RunConfig {
            command: command.to_string(),
            model,
            theta_a,
            theta_b,
            r,
            view,
            trials,
            seed: self.seed,
            output: self.output.unwrap_or(OutputFormat::Table),
            sweep_start: self.sweep_start,
            sweep_stop: self.sweep_stop,
            sweep_step: self.sweep_step,
            a: self.a,
            a_prime: self.a_prime,
            b: self.b,
            b_prime: self.b_prime,
            scan: self.scan,
            full_scan: self.full_scan.unwrap_or(false),
            empirical: self.empirical.unwrap_or(false),
            with_chsh: self.with_chsh.unwrap_or(false),
        })
    }
}

impl RunConfig {
    /// Flat key-value text, readable back with `--config`.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("flat config serializes")
    }
}
