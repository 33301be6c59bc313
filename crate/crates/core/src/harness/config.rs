//! Experiment configuration files.

use std::path::Path;

use serde::Deserialize;

use crate::algos::{AlgoConfig, AlgorithmKind, EpsilonSchedule};
use crate::concentration::{CiMode, ThresholdConfig};
use crate::error::{BanditError, Result};
use crate::expfamily::Family;
use crate::saddle::Instance;
use crate::structures::{Structure, StructureKind};

/// Tolerance of the structure membership check on the true means.
pub const MEMBERSHIP_TOL: f64 = 1e-7;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    name: Option<String>,
    #[serde(default = "default_family")]
    family: String,
    #[serde(default = "one")]
    variance: f64,
    means: Option<Vec<f64>>,
    theta: Option<Vec<f64>>,
    horizon: u64,
    #[serde(default = "one_u")]
    repetitions: usize,
    #[serde(default)]
    seed: u64,
    algorithms: Vec<String>,
    #[serde(default = "fifty")]
    checkpoints: usize,
    checkpoint_list: Option<Vec<u64>>,
    structure: RawStructure,
    #[serde(default)]
    exploration: RawExploration,
    #[serde(default)]
    ossb: RawOssb,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStructure {
    kind: String,
    s: Option<usize>,
    gamma: Option<f64>,
    arms: Option<Vec<Vec<f64>>>,
    l: Option<f64>,
    categories: Option<Vec<usize>>,
    lower: Option<f64>,
    upper: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExploration {
    #[serde(default = "default_schedule")]
    schedule: String,
    #[serde(default = "half")]
    eps0: f64,
    #[serde(default = "one")]
    c: f64,
    #[serde(default = "four")]
    a: f64,
    #[serde(default = "default_ci")]
    ci_mode: String,
    #[serde(default = "half")]
    eta: f64,
}

impl Default for RawExploration {
    fn default() -> Self {
        RawExploration {
            schedule: default_schedule(),
            eps0: 0.5,
            c: 1.0,
            a: 4.0,
            ci_mode: default_ci(),
            eta: 0.5,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOssb {
    #[serde(default = "fifty")]
    iterations: usize,
    #[serde(default = "hundredth")]
    gap_floor: f64,
}

impl Default for RawOssb {
    fn default() -> Self {
        RawOssb { iterations: 50, gap_floor: 0.01 }
    }
}

fn default_family() -> String {
    "gaussian".into()
}
fn default_schedule() -> String {
    "harmonic".into()
}
fn default_ci() -> String {
    "experiment".into()
}
fn one() -> f64 {
    1.0
}
fn one_u() -> usize {
    1
}
fn half() -> f64 {
    0.5
}
fn four() -> f64 {
    4.0
}
fn fifty() -> usize {
    50
}
fn hundredth() -> f64 {
    0.01
}

/// A validated experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub name: String,
    pub instance: Instance<f64>,
    pub horizon: u64,
    pub repetitions: usize,
    pub seed: u64,
    pub algorithms: Vec<AlgorithmKind>,
    pub checkpoints: Vec<u64>,
    pub schedule: EpsilonSchedule<f64>,
    pub ci_mode: CiMode,
    pub eta: f64,
    pub ossb_iterations: usize,
    pub ossb_gap_floor: f64,
}

fn cfg_err(msg: impl Into<String>) -> BanditError {
    BanditError::Config(msg.into())
}

fn need<T>(v: Option<T>, kind: &str, field: &str) -> Result<T> {
    v.ok_or_else(|| cfg_err(format!("structure `{kind}` requires `{field}`")))
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| BanditError::Io(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        if cfg.name.is_empty() {
            cfg.name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        }
        Ok(cfg)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| cfg_err(e.to_string()))?;
        Self::from_raw(raw)
    }

    fn from_raw(raw: RawConfig) -> Result<Self> {
        let family = match raw.family.as_str() {
            "gaussian" => Family::gaussian(raw.variance)?,
            "bernoulli" => Family::bernoulli(),
            other => return Err(cfg_err(format!("unknown family `{other}`"))),
        };
        let st = &raw.structure;
        let means = match (&raw.means, &raw.theta) {
            (Some(m), None) => m.clone(),
            (None, Some(theta)) => {
                let arms = st.arms.as_ref().ok_or_else(|| cfg_err("`theta` needs a linear structure with `arms`"))?;
                arms.iter()
                    .map(|a| {
                        if a.len() != theta.len() {
                            return Err(BanditError::DimensionMismatch { expected: theta.len(), got: a.len() });
                        }
                        Ok(a.iter().zip(theta).map(|(x, t)| x * t).sum())
                    })
                    .collect::<Result<Vec<f64>>>()?
            }
            _ => return Err(cfg_err("give exactly one of `means` and `theta`")),
        };
        let k = means.len();
        let kind = match st.kind.as_str() {
            "unconstrained" => StructureKind::Unconstrained,
            "sparse" => StructureKind::Sparse { s: need(st.s, "sparse", "s")?, gamma: need(st.gamma, "sparse", "gamma")? },
            "linear" => StructureKind::Linear { arms: need(st.arms.clone(), "linear", "arms")? },
            "unimodal" => StructureKind::Unimodal,
            "lipschitz" => StructureKind::Lipschitz { l: need(st.l, "lipschitz", "l")? },
            "categorised" | "categorized" => {
                StructureKind::Categorised { categories: need(st.categories.clone(), "categorised", "categories")? }
            }
            other => return Err(cfg_err(format!("unknown structure `{other}`"))),
        };
        let mut structure = Structure::new(kind, k)?;
        match (st.lower, st.upper) {
            (Some(lo), Some(hi)) => structure = structure.with_bounds(lo, hi)?,
            (None, None) => {}
            _ => return Err(cfg_err("structure box needs both `lower` and `upper`")),
        }
        if !structure.membership(&means, MEMBERSHIP_TOL) {
            return Err(cfg_err(format!("means {means:?} do not belong to the {} structure", structure.name())));
        }
        let instance = Instance::new(means, family, structure)?;
        if raw.horizon < k as u64 {
            return Err(cfg_err(format!("horizon {} is below the number of arms {k}", raw.horizon)));
        }
        if raw.repetitions == 0 {
            return Err(cfg_err("repetitions must be at least 1"));
        }
        if raw.algorithms.is_empty() {
            return Err(cfg_err("no algorithms listed"));
        }
        let mut algorithms = Vec::new();
        for a in &raw.algorithms {
            let kind: AlgorithmKind = a.parse()?;
            if algorithms.contains(&kind) {
                return Err(cfg_err(format!("algorithm `{a}` listed twice")));
            }
            algorithms.push(kind);
        }
        let checkpoints = match raw.checkpoint_list {
            Some(mut list) => {
                list.sort_unstable();
                list.dedup();
                if list.first() == Some(&0) || list.last().is_some_and(|&c| c > raw.horizon) || list.is_empty() {
                    return Err(cfg_err("checkpoints must lie in [1, horizon]"));
                }
                list
            }
            None => log_grid(raw.horizon, raw.checkpoints),
        };
        let ex = &raw.exploration;
        let schedule = match ex.schedule.as_str() {
            "harmonic" => EpsilonSchedule::Harmonic { eps0: ex.eps0, c: ex.c },
            "power" => EpsilonSchedule::Power { a: ex.a },
            "constant" => EpsilonSchedule::Constant(ex.eps0),
            other => return Err(cfg_err(format!("unknown eps schedule `{other}`"))),
        };
        schedule.validate()?;
        let ci_mode = match ex.ci_mode.as_str() {
            "experiment" => CiMode::Experiment,
            "theory" => CiMode::Theory,
            other => return Err(cfg_err(format!("unknown ci_mode `{other}`"))),
        };
        ThresholdConfig::new(k, ex.eta, ci_mode)?;
        if raw.ossb.iterations == 0 || !(raw.ossb.gap_floor > 0.0) {
            return Err(cfg_err("ossb needs positive `iterations` and `gap_floor`"));
        }
        Ok(ExperimentConfig {
            name: raw.name.unwrap_or_default(),
            instance,
            horizon: raw.horizon,
            repetitions: raw.repetitions,
            seed: raw.seed,
            algorithms,
            checkpoints,
            schedule,
            ci_mode,
            eta: ex.eta,
            ossb_iterations: raw.ossb.iterations,
            ossb_gap_floor: raw.ossb.gap_floor,
        })
    }

    pub fn arms(&self) -> usize {
        self.instance.arms()
    }

    /// Replaces the horizon and rebuilds the default checkpoint grid.
    pub fn set_horizon(&mut self, horizon: u64) -> Result<()> {
        if horizon < self.arms() as u64 {
            return Err(cfg_err(format!("horizon {horizon} is below the number of arms {}", self.arms())));
        }
        let n = self.checkpoints.len().max(1);
        self.horizon = horizon;
        self.checkpoints = log_grid(horizon, n);
        Ok(())
    }

    pub fn algo_config(&self, kind: AlgorithmKind) -> Result<AlgoConfig<f64>> {
        let mut c = AlgoConfig::new(kind, self.arms(), self.horizon)?;
        c.schedule = self.schedule;
        c.thresholds = ThresholdConfig::new(self.arms(), self.eta, self.ci_mode)?;
        c.ossb_iterations = self.ossb_iterations;
        c.ossb_gap_floor = self.ossb_gap_floor;
        Ok(c)
    }
}

/// `n` log-spaced rounds in `[10, horizon]`, rounded and deduplicated; always ends at `horizon`.
pub fn log_grid(horizon: u64, n: usize) -> Vec<u64> {
    let lo = 10u64.min(horizon).max(1);
    if n <= 1 || horizon == lo {
        return vec![horizon];
    }
    let ratio = (horizon as f64 / lo as f64).ln();
    let mut grid: Vec<u64> = (0..n)
        .map(|i| ((lo as f64) * (ratio * i as f64 / (n - 1) as f64).exp()).round() as u64)
        .map(|c| c.clamp(lo, horizon))
        .collect();
    *grid.last_mut().expect("nonempty") = horizon;
    grid.dedup();
    grid
}
