//! Multi-repetition simulation and aggregation.

use rayon::prelude::*;

use super::config::ExperimentConfig;
use crate::algos::{Agent, AlgorithmKind, Environment};
use crate::error::Result;
use crate::saddle::{solve_k_learner, solve_lambda_learner};

/// SplitMix64 finaliser.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// 64-bit FNV-1a.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3))
}

/// `splitmix64(splitmix64(master ^ fnv1a64(algorithm)) ^ rep)`.
pub fn child_seed(master: u64, algorithm: &str, rep: usize) -> u64 {
    splitmix64(splitmix64(master ^ fnv1a64(algorithm.as_bytes())) ^ rep as u64)
}

/// Result of one simulated run.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretTrace {
    pub algorithm: AlgorithmKind,
    pub rep: usize,
    pub seed: u64,
    /// Cumulative pseudo-regret at each checkpoint.
    pub regret: Vec<f64>,
    pub counts: Vec<u64>,
    pub explore_rounds: u64,
    pub exploit_rounds: u64,
}

/// A run that aborted.
#[derive(Debug, Clone, PartialEq)]
pub struct RunFailure {
    pub algorithm: AlgorithmKind,
    pub rep: usize,
    pub seed: u64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlgorithmSummary {
    pub algorithm: AlgorithmKind,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResults {
    pub checkpoints: Vec<u64>,
    pub summaries: Vec<AlgorithmSummary>,
    pub traces: Vec<RegretTrace>,
    pub failures: Vec<RunFailure>,
}

/// Simulates one run of `kind` with the given seed.
pub fn simulate(cfg: &ExperimentConfig, kind: AlgorithmKind, rep: usize, seed: u64) -> Result<RegretTrace> {
    let inst = &cfg.instance;
    let mut agent = Agent::new(cfg.algo_config(kind)?, inst.structure().clone(), *inst.family())?;
    let mut env = Environment::new(inst.means().to_vec(), *inst.family(), seed)?;
    let gaps = inst.gaps();
    let mut regret = Vec::with_capacity(cfg.checkpoints.len());
    let mut next = cfg.checkpoints.iter().peekable();
    let mut total = 0.0;
    for t in 1..=cfg.horizon {
        let (arm, _, _) = agent.step(&mut env)?;
        total += gaps[arm];
        while next.peek().is_some_and(|&&c| c == t) {
            regret.push(total);
            next.next();
        }
    }
    Ok(RegretTrace {
        algorithm: kind,
        rep,
        seed,
        regret,
        counts: agent.state.counts.clone(),
        explore_rounds: agent.state.explore_rounds,
        exploit_rounds: agent.state.exploit_rounds,
    })
}

/// Runs every algorithm `repetitions` times. Repetitions run in parallel but the
/// output only depends on the configuration.
pub fn run_experiment(cfg: &ExperimentConfig) -> ExperimentResults {
    let jobs: Vec<(AlgorithmKind, usize)> =
        cfg.algorithms.iter().flat_map(|&a| (0..cfg.repetitions).map(move |r| (a, r))).collect();
    let outcomes: Vec<(AlgorithmKind, usize, u64, Result<RegretTrace>)> = jobs
        .par_iter()
        .map(|&(a, r)| {
            let seed = child_seed(cfg.seed, a.name(), r);
            (a, r, seed, simulate(cfg, a, r, seed))
        })
        .collect();
    let mut traces = Vec::new();
    let mut failures = Vec::new();
    for (algorithm, rep, seed, out) in outcomes {
        match out {
            Ok(t) => traces.push(t),
            Err(e) => failures.push(RunFailure { algorithm, rep, seed, message: e.to_string() }),
        }
    }
    let summaries = cfg
        .algorithms
        .iter()
        .map(|&a| summarise(a, traces.iter().filter(|t| t.algorithm == a), cfg.checkpoints.len()))
        .collect();
    ExperimentResults { checkpoints: cfg.checkpoints.clone(), summaries, traces, failures }
}

fn summarise<'a>(algorithm: AlgorithmKind, runs: impl Iterator<Item = &'a RegretTrace>, n: usize) -> AlgorithmSummary {
    let runs: Vec<&RegretTrace> = runs.collect();
    let r = runs.len() as f64;
    let mut mean = vec![0.0; n];
    let mut std = vec![0.0; n];
    for i in 0..n {
        let m = runs.iter().map(|t| t.regret[i]).sum::<f64>() / r;
        mean[i] = m;
        if runs.len() > 1 {
            std[i] = (runs.iter().map(|t| (t.regret[i] - m).powi(2)).sum::<f64>() / (r - 1.0)).sqrt();
        }
    }
    if runs.is_empty() {
        mean.fill(f64::NAN);
        std.fill(f64::NAN);
    }
    AlgorithmSummary { algorithm, mean, std }
}

/// Perturbation used for the structural reference curve.
pub const REFERENCE_EPS: f64 = 1e-3;
/// Solver iterations for the structural reference curve.
pub const REFERENCE_ITERS: usize = 5000;

/// Coefficients of `ln t` for the unconstrained and the structural lower bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceCoefficients {
    pub unconstrained: f64,
    pub structural: f64,
}

impl ReferenceCoefficients {
    pub fn curves(&self, checkpoints: &[u64]) -> Vec<(u64, f64, f64)> {
        checkpoints
            .iter()
            .map(|&t| {
                let l = (t as f64).ln();
                (t, self.unconstrained * l, self.structural * l)
            })
            .collect()
    }
}

pub fn reference_coefficients(cfg: &ExperimentConfig) -> Result<ReferenceCoefficients> {
    // Both primal values certify a lower bound on D_eps; the larger is kept.
    let a = solve_k_learner(&cfg.instance, REFERENCE_EPS, REFERENCE_ITERS)?;
    let b = solve_lambda_learner(&cfg.instance, REFERENCE_EPS, REFERENCE_ITERS)?;
    Ok(ReferenceCoefficients {
        unconstrained: cfg.instance.unconstrained_rate(),
        structural: a.value_lower.max(b.value_lower).recip(),
    })
}
