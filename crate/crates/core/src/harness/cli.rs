//! The `sbandit` command line.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use super::config::ExperimentConfig;
use super::output::{fmt_sig9, write_results};
use super::runner::{reference_coefficients, run_experiment};
use crate::error::{BanditError, Result};
use crate::saddle::{brute_force_value, solve_k_learner, solve_lambda_learner};

#[derive(Debug, Parser)]
#[command(name = "sbandit", version, about = "Structured bandit experiments and lower-bound solvers")]
struct Cli {
    /// Overrides the master seed of the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SolverChoice {
    K,
    Lambda,
    Brute,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Prints certified bounds on the perturbed game value of the configured instance.
    Solve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 1e-3)]
        eps: f64,
        #[arg(long, default_value_t = 5000)]
        iters: usize,
        #[arg(long, value_enum, default_value_t = SolverChoice::K)]
        solver: SolverChoice,
        /// Grid step of the brute-force solver.
        #[arg(long, default_value_t = 0.01)]
        step: f64,
    },
    /// Prints the closest point of one cell of an alternative set.
    Altmin {
        #[arg(long)]
        config: PathBuf,
        /// Candidate best arm (0-based).
        #[arg(long)]
        j: usize,
        /// Challenger arm (0-based).
        #[arg(long)]
        k: usize,
        /// Comma-separated nonnegative weights, one per arm.
        #[arg(long, value_delimiter = ',', required = true)]
        weights: Vec<f64>,
    },
    /// Simulates every configured algorithm and writes CSV files.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        horizon: Option<u64>,
        #[arg(long)]
        reps: Option<usize>,
    },
}

fn join(xs: &[f64]) -> String {
    let parts: Vec<String> = xs.iter().map(|&x| fmt_sig9(x)).collect();
    format!("[{}]", parts.join(", "))
}

fn load(path: &PathBuf, seed: Option<u64>) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::from_path(path)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn execute(cli: Cli, out: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Solve { config, eps, iters, solver, step } => {
            let cfg = load(&config, cli.seed)?;
            let inst = &cfg.instance;
            match solver {
                SolverChoice::K | SolverChoice::Lambda => {
                    let r = match solver {
                        SolverChoice::K => solve_k_learner(inst, eps, iters)?,
                        _ => solve_lambda_learner(inst, eps, iters)?,
                    };
                    writeln!(out, "solver={}", if matches!(solver, SolverChoice::K) { "k" } else { "lambda" })?;
                    writeln!(out, "eps={}", fmt_sig9(eps))?;
                    writeln!(out, "iterations={}", r.iterations)?;
                    writeln!(out, "D_lower={}", fmt_sig9(r.value_lower))?;
                    writeln!(out, "D_upper={}", fmt_sig9(r.value_upper))?;
                    writeln!(out, "V={}", fmt_sig9(r.rate()))?;
                    writeln!(out, "proportions={}", join(&r.proportions))?;
                    writeln!(out, "regret_proportions={}", join(&r.regret_proportions))?;
                }
                SolverChoice::Brute => {
                    let (lo, hi) = brute_force_value(inst, eps, step)?;
                    writeln!(out, "solver=brute")?;
                    writeln!(out, "eps={}", fmt_sig9(eps))?;
                    writeln!(out, "D_lower={}", fmt_sig9(lo))?;
                    writeln!(out, "D_upper={}", fmt_sig9(hi))?;
                    writeln!(out, "V={}", fmt_sig9(2.0 / (lo + hi)))?;
                }
            }
        }
        Command::Altmin { config, j, k, weights } => {
            let cfg = load(&config, cli.seed)?;
            let inst = &cfg.instance;
            if weights.len() != inst.arms() {
                return Err(BanditError::DimensionMismatch { expected: inst.arms(), got: weights.len() });
            }
            let r = inst.structure().alt_min(inst.family(), inst.means(), &weights, j, k)?;
            writeln!(out, "lambda={}", join(&r.lambda))?;
            writeln!(out, "value={}", fmt_sig9(r.value))?;
        }
        Command::Run { config, out: dir, horizon, reps } => {
            let mut cfg = load(&config, cli.seed)?;
            if let Some(h) = horizon {
                cfg.set_horizon(h)?;
            }
            if let Some(r) = reps {
                if r == 0 {
                    return Err(BanditError::Config("repetitions must be at least 1".into()));
                }
                cfg.repetitions = r;
            }
            let reference = reference_coefficients(&cfg)?;
            let results = run_experiment(&cfg);
            write_results(&dir, &results, Some(&reference))?;
            for s in &results.summaries {
                writeln!(
                    out,
                    "{}: mean regret {} (std {}) at t={}",
                    s.algorithm,
                    fmt_sig9(*s.mean.last().unwrap_or(&f64::NAN)),
                    fmt_sig9(*s.std.last().unwrap_or(&f64::NAN)),
                    cfg.horizon
                )?;
            }
            if !results.failures.is_empty() {
                return Err(BanditError::NonFinite(format!(
                    "{} run(s) aborted; see {}",
                    results.failures.len(),
                    dir.join("failures.csv").display()
                )));
            }
        }
    }
    Ok(())
}

/// Runs the command line and returns the process exit code: 0 on success,
/// 2 on usage or validation errors, 1 on runtime errors.
pub fn run<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    match execute(cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_validation() {
                2
            } else {
                1
            }
        }
    }
}
