//! Command line front end: `predict`, `simulate`, `chsh` and `sweep`.
//!
//! Exit status is 0 on success, 1 when output cannot be written, 2 for a
//! usage error and 3 when a simulation observed an event its model forbids.

pub mod commands;
pub mod config;
pub mod render;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use crate::models::{ModelKind, ObserverView};
use commands::Failure;
use config::{ConfigLayer, OutputFormat, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_HARD_FAILURE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "eprlab", version, about = "Two-photon polarizer correlation laboratory")]
struct Cli {
    /// Flat TOML file with run settings; flags override it.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Analytic joint distributions, per charge where the model defines one.
    Predict(Common),
    /// Seeded Monte Carlo run checked against the analytic distribution.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        mc: MonteCarlo,
    },
    /// CHSH statistic at four angles or maximized over a grid.
    Chsh {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        mc: MonteCarlo,
        #[arg(long, allow_negative_numbers = true)]
        a: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        a_prime: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        b: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        b_prime: Option<f64>,
        /// Grid spacing in degrees; must divide 180 and be at most 15.
        #[arg(long, value_name = "DEGREES")]
        scan: Option<f64>,
        /// Scan all four angles instead of pinning a = 0.
        #[arg(long)]
        full_scan: bool,
        /// Add a Monte Carlo estimate of S at the same angles.
        #[arg(long)]
        empirical: bool,
    },
    /// Distribution series over a range of relative angles.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_negative_numbers = true)]
        start: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        stop: Option<f64>,
        #[arg(long)]
        step: Option<f64>,
        /// Add S at a = 0, b = theta, a' = 2 theta, b' = 3 theta.
        #[arg(long)]
        with_chsh: bool,
    },
}

#[derive(Debug, Args)]
struct Common {
    #[arg(long)]
    model: Option<ModelKind>,
    /// Degrees.
    #[arg(long, allow_negative_numbers = true)]
    theta_a: Option<f64>,
    /// Degrees.
    #[arg(long, allow_negative_numbers = true)]
    theta_b: Option<f64>,
    /// Anisotropy parameter of the aniso model, strictly between 0 and 1.
    #[arg(long)]
    r: Option<f64>,
    /// A, B or blind. Defaults to A for balls and aniso, blind otherwise.
    #[arg(long)]
    view: Option<ObserverView>,
    #[arg(long, visible_alias = "format")]
    output: Option<OutputFormat>,
    /// Write to this file instead of standard output.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct MonteCarlo {
    #[arg(long)]
    trials: Option<u64>,
    /// Drawn at random and recorded in the output when omitted.
    #[arg(long)]
    seed: Option<u64>,
}

impl Common {
    fn layer(&self) -> ConfigLayer {
        ConfigLayer {
            model: self.model,
            theta_a: self.theta_a,
            theta_b: self.theta_b,
            r: self.r,
            view: self.view,
            output: self.output,
            ..Default::default()
        }
    }
}

impl MonteCarlo {
    fn apply(&self, layer: ConfigLayer) -> ConfigLayer {
        ConfigLayer { trials: self.trials, seed: self.seed, ..layer }
    }
}

struct Invocation {
    name: &'static str,
    flags: ConfigLayer,
    out: Option<PathBuf>,
}

impl Command {
    fn invocation(&self) -> Invocation {
        let (name, common, flags) = match self {
            Command::Predict(common) => ("predict", common, common.layer()),
            Command::Simulate { common, mc } => ("simulate", common, mc.apply(common.layer())),
            Command::Chsh { common, mc, a, a_prime, b, b_prime, scan, full_scan, empirical } => {
                let layer = ConfigLayer {
                    a: *a,
                    a_prime: *a_prime,
                    b: *b,
                    b_prime: *b_prime,
                    scan: *scan,
                    full_scan: full_scan.then_some(true),
                    empirical: empirical.then_some(true),
                    ..mc.apply(common.layer())
                };
                ("chsh", common, layer)
            }
            Command::Sweep { common, start, stop, step, with_chsh } => {
                let layer = ConfigLayer {
                    sweep_start: *start,
                    sweep_stop: *stop,
                    sweep_step: *step,
                    with_chsh: with_chsh.then_some(true),
                    ..common.layer()
                };
                ("sweep", common, layer)
            }
        };
        Invocation { name, flags, out: common.out.clone() }
    }
}

fn needs_seed(config: &RunConfig) -> bool {
    config.command == "simulate" || (config.command == "chsh" && config.empirical)
}

/// Parses `args` (program name first), runs the command and returns the exit status.
pub fn run_with_io<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = stdout.write_all(text.as_bytes());
                    EXIT_OK
                }
                _ => {
                    let _ = stderr.write_all(text.as_bytes());
                    EXIT_USAGE
                }
            };
        }
    };
    let usage = |stderr: &mut dyn Write, msg: &str| {
        let _ = writeln!(stderr, "error: {msg}");
        EXIT_USAGE
    };

    let invocation = cli.command.invocation();
    let base = match &cli.config {
        Some(path) => match ConfigLayer::load(path) {
            Ok(layer) => layer,
            Err(msg) => return usage(stderr, &msg),
        },
        None => ConfigLayer::default(),
    };
    let mut config = match base.overlaid(&invocation.flags).resolve(invocation.name) {
        Ok(c) => c,
        Err(msg) => return usage(stderr, &msg),
    };
    if needs_seed(&config) && config.seed.is_none() {
        config.seed = Some(rand::random());
    }

    let (records, status) = match dispatch(&config) {
        Ok(records) => (records, EXIT_OK),
        Err(Failure::HardFailure(records)) => {
            let _ = writeln!(stderr, "error: an event with analytic probability 0 or 1 came out the other way");
            (records, EXIT_HARD_FAILURE)
        }
        Err(Failure::Usage(msg)) => return usage(stderr, &msg),
    };
    let text = render::render(&config, &records);
    let written = match &invocation.out {
        Some(path) => std::fs::write(path, text.as_bytes()).map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => stdout.write_all(text.as_bytes()).map_err(|e| format!("cannot write output: {e}")),
    };
    match written {
        Ok(()) => status,
        Err(msg) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_IO
        }
    }
}

fn dispatch(config: &RunConfig) -> commands::Outcome {
    match config.command.as_str() {
        "predict" => commands::predict(config),
        "simulate" => commands::simulate(config),
        "chsh" => commands::chsh_cmd(config),
        "sweep" => commands::sweep(config),
        other => Err(Failure::Usage(format!("unknown command '{other}'"))),
    }
}

/// Entry point for the binary.
pub fn run() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with_io(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run_with_io(std::iter::once("eprlab").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run(&["--help"]).0, EXIT_OK);
        assert_eq!(run(&["--version"]).0, EXIT_OK);
        assert_eq!(run(&[]).0, EXIT_USAGE);
        assert_eq!(run(&["predict", "--model", "nope"]).0, EXIT_USAGE);
        assert_eq!(run(&["predict", "--model", "aniso", "--r", "1.5"]).0, EXIT_USAGE);
        assert_eq!(run(&["predict", "--model", "qm", "--view", "A"]).0, EXIT_USAGE);
        assert_eq!(run(&["simulate", "--trials", "0"]).0, EXIT_USAGE);
        assert_eq!(run(&["sweep", "--start", "0", "--stop", "10", "--step", "0"]).0, EXIT_USAGE);
        assert_eq!(run(&["chsh", "--scan", "7"]).0, EXIT_USAGE);
        assert_eq!(run(&["predict", "--config", "/nonexistent/file.toml"]).0, EXIT_USAGE);
    }

    #[test]
    fn negative_angles_parse() {
        let (code, out, _) = run(&["predict", "--theta-a", "-30", "--output", "json"]);
        assert_eq!(code, EXIT_OK);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["rows"][0]["theta_deg"], -30.0);
    }

    #[test]
    fn generated_seed_is_recorded() {
        let (code, out, _) = run(&["simulate", "--trials", "10", "--output", "json"]);
        assert_eq!(code, EXIT_OK);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert!(v["config"]["seed"].is_u64());
    }

    #[test]
    fn unwritable_out_path() {
        assert_eq!(run(&["predict", "--out", "/nonexistent/dir/out.txt"]).0, EXIT_IO);
    }
}
