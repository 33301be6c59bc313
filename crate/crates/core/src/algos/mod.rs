//! Bandit algorithms driven by sampled rewards.

mod env;
mod ossb;
mod sp;

pub use env::Environment;
pub use sp::{optimistic_ratio, ucb_ratio};

use std::fmt;
use std::str::FromStr;

use crate::concentration::{exploit_threshold, ThresholdConfig};
use crate::error::{BanditError, Result};
use crate::expfamily::Family;
use crate::learners::{HedgeState, LambdaLearner};
use crate::scalar::{argmax, argmin, Scalar};
use crate::structures::Structure;

/// Arm pulled next by the tracking rule: smallest-index minimiser of `N^k - target^k`.
pub fn track<T: Scalar>(counts: &[u64], target: &[T]) -> usize {
    debug_assert_eq!(counts.len(), target.len());
    let diff: Vec<T> = counts.iter().zip(target).map(|(&n, &w)| T::lit(n as f64) - w).collect();
    argmin(&diff)
}

/// Exploration-size schedule for the gap floor `eps_t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EpsilonSchedule<T> {
    Constant(T),
    /// `n^(-1/a)`.
    Power { a: T },
    /// `min(eps0, c / n)`.
    Harmonic { eps0: T, c: T },
}

impl<T: Scalar> Default for EpsilonSchedule<T> {
    fn default() -> Self {
        EpsilonSchedule::Harmonic { eps0: T::half(), c: T::one() }
    }
}

impl<T: Scalar> EpsilonSchedule<T> {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            EpsilonSchedule::Constant(e) => e > T::zero() && e.is_finite(),
            EpsilonSchedule::Power { a } => a > T::two() && a.is_finite(),
            EpsilonSchedule::Harmonic { eps0, c } => {
                eps0 > T::zero() && c > T::zero() && eps0.is_finite() && c.is_finite()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(BanditError::InvalidArgument(format!("invalid eps schedule {self:?}")))
        }
    }

    /// `eps` after `n` explorations of the current candidate (`n` raised to 1).
    pub fn value(&self, n: u64) -> T {
        let n = T::lit(n.max(1) as f64);
        match *self {
            EpsilonSchedule::Constant(e) => e,
            EpsilonSchedule::Power { a } => n.powf(-a.recip()),
            EpsilonSchedule::Harmonic { eps0, c } => eps0.min(c / n),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AlgorithmKind {
    SpK,
    SpLambda,
    Ossb,
    Ucb,
}

impl AlgorithmKind {
    pub const ALL: [AlgorithmKind; 4] =
        [AlgorithmKind::SpK, AlgorithmKind::SpLambda, AlgorithmKind::Ossb, AlgorithmKind::Ucb];

    pub fn name(self) -> &'static str {
        match self {
            AlgorithmKind::SpK => "spk",
            AlgorithmKind::SpLambda => "splambda",
            AlgorithmKind::Ossb => "ossb",
            AlgorithmKind::Ucb => "ucb",
        }
    }
}

impl fmt::Display for AlgorithmKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AlgorithmKind {
    type Err = BanditError;

    fn from_str(s: &str) -> Result<Self> {
        AlgorithmKind::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| BanditError::Config(format!("unknown algorithm `{s}`")))
    }
}

/// What happened in one round.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RoundKind {
    /// One of the first `K` round-robin pulls.
    Initial,
    Exploit,
    /// Exploration round pulling the candidate itself.
    Forced,
    /// Exploration round pulled by tracking learner proportions.
    Tracked,
    /// OSSB forced exploration of the least-pulled arm.
    LeastPulled,
    /// Index policy choice.
    Index,
}

impl RoundKind {
    pub fn is_exploit(self) -> bool {
        self == RoundKind::Exploit
    }
}

/// Counters shared by every algorithm.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgoState<T> {
    pub counts: Vec<u64>,
    sums: Vec<T>,
    pub means: Vec<T>,
    /// Exploration rounds per candidate best arm.
    pub explorations: Vec<u64>,
    /// Sum of the proportions fed to tracking.
    pub cumulative_proportions: Vec<T>,
    /// Pulls chosen by the tracking rule.
    pub tracked_counts: Vec<u64>,
    /// Rounds completed.
    pub t: u64,
    pub explore_rounds: u64,
    pub exploit_rounds: u64,
}

impl<T: Scalar> AlgoState<T> {
    pub fn new(arms: usize) -> Self {
        AlgoState {
            counts: vec![0; arms],
            sums: vec![T::zero(); arms],
            means: vec![T::zero(); arms],
            explorations: vec![0; arms],
            cumulative_proportions: vec![T::zero(); arms],
            tracked_counts: vec![0; arms],
            t: 0,
            explore_rounds: 0,
            exploit_rounds: 0,
        }
    }

    pub fn arms(&self) -> usize {
        self.counts.len()
    }

    /// Next tracked pull; the tracking rule only sees its own pulls.
    pub(crate) fn track_pull(&mut self) -> usize {
        let a = track(&self.tracked_counts, &self.cumulative_proportions);
        self.tracked_counts[a] += 1;
        a
    }

    pub fn counts_real(&self) -> Vec<T> {
        self.counts.iter().map(|&n| T::lit(n as f64)).collect()
    }

    /// Records a reward; means stay exact running averages of the sums.
    pub fn observe(&mut self, arm: usize, reward: T) {
        self.counts[arm] += 1;
        self.sums[arm] = self.sums[arm] + reward;
        self.means[arm] = self.sums[arm] / T::lit(self.counts[arm] as f64);
        self.t += 1;
    }
}

/// Smallest `i` whose alternative set is at weighted divergence above
/// `threshold` from the empirical means, with weights the pull counts.
///
/// When the empirical means lie in the structure they belong to the
/// alternative of every arm other than their argmax, so only that arm is tried.
pub fn explore_exploit_test<T: Scalar>(
    state: &AlgoState<T>,
    structure: &Structure<T>,
    family: &Family<T>,
    threshold: T,
) -> Result<Option<usize>> {
    let mu = &state.means;
    let n = state.counts_real();
    let top = argmax(mu);
    let top_is_unique = mu.iter().enumerate().all(|(i, &m)| i == top || m < mu[top]);
    let candidates: Vec<usize> = if top_is_unique && structure.membership(mu, T::lit(1e-12)) {
        vec![top]
    } else {
        (0..mu.len()).collect()
    };
    for i in candidates {
        let first = if i == top { argmax_except(mu, i) } else { top };
        match structure.alternative_exceeds(family, mu, &n, i, threshold, first) {
            Ok(true) => return Ok(Some(i)),
            Ok(false) | Err(BanditError::AllCellsInfeasible { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(None)
}

fn argmax_except<T: Scalar>(xs: &[T], skip: usize) -> usize {
    let mut best = if skip == 0 { 1 } else { 0 };
    for (i, &x) in xs.iter().enumerate() {
        if i != skip && x > xs[best] {
            best = i;
        }
    }
    best
}

/// Tunables shared by the algorithms.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgoConfig<T> {
    pub kind: AlgorithmKind,
    pub schedule: EpsilonSchedule<T>,
    pub thresholds: ThresholdConfig<T>,
    pub horizon: u64,
    /// Saddle iterations per OSSB exploration round.
    pub ossb_iterations: usize,
    /// Floor on the plug-in gaps of OSSB.
    pub ossb_gap_floor: T,
}

impl<T: Scalar> AlgoConfig<T> {
    pub fn new(kind: AlgorithmKind, arms: usize, horizon: u64) -> Result<Self> {
        Ok(AlgoConfig {
            kind,
            schedule: EpsilonSchedule::default(),
            thresholds: ThresholdConfig::with_defaults(arms)?,
            horizon,
            ossb_iterations: 50,
            ossb_gap_floor: T::lit(0.01),
        })
    }
}

#[derive(Debug, Clone)]
enum Inner<T> {
    SpK(Vec<Option<HedgeState<T>>>),
    SpLambda(Vec<Option<LambdaLearner<T>>>),
    Ossb(ossb::OssbState<T>),
    Ucb,
}

/// One algorithm instance with its state, bound to a structure and family.
#[derive(Debug, Clone)]
pub struct Agent<T> {
    pub state: AlgoState<T>,
    config: AlgoConfig<T>,
    structure: Structure<T>,
    family: Family<T>,
    inner: Inner<T>,
}

impl<T: Scalar> Agent<T> {
    pub fn new(config: AlgoConfig<T>, structure: Structure<T>, family: Family<T>) -> Result<Self> {
        config.schedule.validate()?;
        let k = structure.arms();
        if config.thresholds.k != k {
            return Err(BanditError::DimensionMismatch { expected: k, got: config.thresholds.k });
        }
        let inner = match config.kind {
            AlgorithmKind::SpK => Inner::SpK(vec![None; k]),
            AlgorithmKind::SpLambda => Inner::SpLambda(vec![None; k]),
            AlgorithmKind::Ossb => Inner::Ossb(ossb::OssbState::new(k, config.horizon)?),
            AlgorithmKind::Ucb => Inner::Ucb,
        };
        Ok(Agent { state: AlgoState::new(k), config, structure, family, inner })
    }

    pub fn kind(&self) -> AlgorithmKind {
        self.config.kind
    }

    pub fn config(&self) -> &AlgoConfig<T> {
        &self.config
    }

    /// Last OSSB plug-in duality gap, if any.
    pub fn plug_in_residual(&self) -> Option<T> {
        match &self.inner {
            Inner::Ossb(o) => o.residual,
            _ => None,
        }
    }

    /// Picks the arm for the next round.
    pub fn choose(&mut self) -> Result<(usize, RoundKind)> {
        let k = self.state.arms();
        if self.state.t < k as u64 {
            return Ok((self.state.t as usize, RoundKind::Initial));
        }
        let Agent { state, config, structure, family, inner } = self;
        let out = match inner {
            Inner::Ucb => (sp::kl_ucb_arm(state, family)?, RoundKind::Index),
            Inner::Ossb(o) => o.choose(state, config, structure, family)?,
            Inner::SpK(learners) => {
                let f = exploit_threshold(state.t, k)?;
                match explore_exploit_test(state, structure, family, f)? {
                    Some(i) => (i, RoundKind::Exploit),
                    None => sp::sp_k_explore(state, config, structure, family, learners)?,
                }
            }
            Inner::SpLambda(learners) => {
                let f = exploit_threshold(state.t, k)?;
                match explore_exploit_test(state, structure, family, f)? {
                    Some(i) => (i, RoundKind::Exploit),
                    None => sp::sp_lambda_explore(state, config, structure, family, learners)?,
                }
            }
        };
        match out.1 {
            RoundKind::Exploit => self.state.exploit_rounds += 1,
            RoundKind::Forced | RoundKind::Tracked | RoundKind::LeastPulled => self.state.explore_rounds += 1,
            _ => {}
        }
        Ok(out)
    }

    pub fn observe(&mut self, arm: usize, reward: T) {
        self.state.observe(arm, reward);
    }

    /// Chooses, samples and records one round.
    pub fn step(&mut self, env: &mut Environment<T>) -> Result<(usize, T, RoundKind)> {
        let (arm, kind) = self.choose()?;
        let reward = env.pull(arm)?;
        self.observe(arm, reward);
        Ok((arm, reward, kind))
    }
}
