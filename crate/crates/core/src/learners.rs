//! Online learners for the two players of the lower-bound game.
//!
//! The arm side uses AdaHedge over the simplex. The instance side runs one
//! Follow-the-Leader learner per cell of the alternative set and aggregates
//! them with AdaHedge.

use crate::error::{BanditError, Result};
use crate::expfamily::Family;
use crate::scalar::{argmin, normalise, Scalar};
use crate::structures::Structure;

/// Per-round vectors are clipped to `[-CLIP, CLIP]` before use.
pub const CLIP: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    MinimiseLoss,
    MaximiseGain,
}

/// AdaHedge: exponential weights with learning rate `ln K / Delta`, where
/// `Delta` is the cumulative mixability gap.
#[derive(Debug, Clone, PartialEq)]
pub struct HedgeState<T> {
    cum_loss: Vec<T>,
    gap: T,
}

impl<T: Scalar> HedgeState<T> {
    pub fn new(experts: usize) -> Result<Self> {
        if experts == 0 {
            return Err(BanditError::InvalidArgument("hedge needs at least one expert".into()));
        }
        Ok(HedgeState { cum_loss: vec![T::zero(); experts], gap: T::zero() })
    }

    pub fn experts(&self) -> usize {
        self.cum_loss.len()
    }

    pub fn cumulative_losses(&self) -> &[T] {
        &self.cum_loss
    }

    pub fn mixability_gap(&self) -> T {
        self.gap
    }

    /// Current learning rate; infinite before any mixability gap has accrued.
    pub fn learning_rate(&self) -> T {
        let ln_k = T::from_usize_lossy(self.experts()).ln();
        if self.gap > T::zero() {
            ln_k / self.gap
        } else {
            T::infinity()
        }
    }

    pub fn weights(&self) -> Vec<T> {
        let lmin = self.cum_loss.iter().fold(T::infinity(), |a, &b| a.min(b));
        let eta = self.learning_rate();
        let mut w: Vec<T> = if eta.is_infinite() {
            self.cum_loss.iter().map(|&l| if l == lmin { T::one() } else { T::zero() }).collect()
        } else {
            self.cum_loss.iter().map(|&l| (-eta * (l - lmin)).exp()).collect()
        };
        normalise(&mut w);
        w
    }

    pub fn update(&mut self, v: &[T], direction: Direction) -> Result<()> {
        if v.len() != self.experts() {
            return Err(BanditError::DimensionMismatch { expected: self.experts(), got: v.len() });
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(BanditError::NonFinite("hedge update vector".into()));
        }
        let clip = T::lit(CLIP);
        let loss: Vec<T> = v
            .iter()
            .map(|&x| {
                let x = x.max(-clip).min(clip);
                match direction {
                    Direction::MinimiseLoss => x,
                    Direction::MaximiseGain => -x,
                }
            })
            .collect();
        let w = self.weights();
        let eta = self.learning_rate();
        let h: T = w.iter().zip(&loss).map(|(&a, &b)| a * b).sum();
        let support_min = w
            .iter()
            .zip(&loss)
            .filter(|(&a, _)| a > T::zero())
            .fold(T::infinity(), |m, (_, &l)| m.min(l));
        let mix = if eta.is_infinite() {
            support_min
        } else {
            let s: T = w
                .iter()
                .zip(&loss)
                .filter(|(&a, _)| a > T::zero())
                .map(|(&a, &l)| a * (-eta * (l - support_min)).exp())
                .sum();
            support_min - s.ln() / eta
        };
        let delta = (h - mix).max(T::zero());
        self.gap = self.gap + delta;
        for (c, l) in self.cum_loss.iter_mut().zip(loss) {
            *c = *c + l;
        }
        Ok(())
    }
}

/// Follow-the-Leader on one cell `{lambda in M : lambda^k >= lambda^j}`.
///
/// The cumulative objective `sum_s sum_i w_s^i d(x_s^i, lambda^i)` equals
/// `sum_i W^i d(S^i / W^i, lambda^i)` up to a constant, so only the totals
/// `W` and `S = sum_s w_s x_s` are stored.
#[derive(Debug, Clone, PartialEq)]
pub struct CellFtl<T> {
    pub j: usize,
    pub k: usize,
    weights: Vec<T>,
    sums: Vec<T>,
    leader: Option<Vec<T>>,
    feasible: bool,
}

impl<T: Scalar> CellFtl<T> {
    pub fn new(arms: usize, j: usize, k: usize) -> Self {
        CellFtl { j, k, weights: vec![T::zero(); arms], sums: vec![T::zero(); arms], leader: None, feasible: true }
    }

    pub fn cumulative_weights(&self) -> &[T] {
        &self.weights
    }

    pub fn is_feasible(&self) -> bool {
        self.feasible
    }

    /// Weighted mean of the snapshots seen so far; `fallback` where no weight accrued.
    pub fn effective_means(&self, fallback: &[T]) -> Vec<T> {
        self.weights
            .iter()
            .zip(&self.sums)
            .zip(fallback)
            .map(|((&w, &s), &f)| if w > T::zero() { s / w } else { f })
            .collect()
    }

    pub fn leader(&self) -> Option<&[T]> {
        self.leader.as_deref()
    }

    fn solve(&mut self, structure: &Structure<T>, family: &Family<T>, fallback: &[T]) -> Result<()> {
        let x = self.effective_means(fallback);
        match structure.alt_min(family, &x, &self.weights, self.j, self.k) {
            Ok(r) => {
                self.leader = Some(r.lambda);
                self.feasible = true;
            }
            Err(BanditError::InfeasibleCell { .. }) => {
                self.leader = None;
                self.feasible = false;
            }
            Err(e) => return Err(e),
        }
        Ok(())
    }

    /// Adds `increment` at the snapshot `mu` and refreshes the leader.
    pub fn update(&mut self, structure: &Structure<T>, family: &Family<T>, mu: &[T], increment: &[T]) -> Result<()> {
        for i in 0..self.weights.len() {
            if increment[i] > T::zero() {
                self.weights[i] = self.weights[i] + increment[i];
                self.sums[i] = self.sums[i] + increment[i] * mu[i];
            }
        }
        self.solve(structure, family, mu)
    }
}

/// A mixture over cell leaders proposed by the instance-side learner.
#[derive(Debug, Clone, PartialEq)]
pub struct Mixture<T> {
    /// Challenger arm of each cell.
    pub cells: Vec<usize>,
    pub weights: Vec<T>,
    pub leaders: Vec<Vec<T>>,
}

impl<T: Scalar> Mixture<T> {
    /// `E_{lambda ~ q} d(x, lambda^arm)`.
    pub fn expected_divergence(&self, family: &Family<T>, arm: usize, x: T) -> T {
        self.weights
            .iter()
            .zip(&self.leaders)
            .filter(|(&w, _)| w > T::zero())
            .map(|(&w, l)| w * family.divergence(x, l[arm]))
            .sum()
    }
}

/// Instance-side learner for candidate best arm `j`: FTL per cell, AdaHedge on top.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaLearner<T> {
    pub j: usize,
    cells: Vec<CellFtl<T>>,
    hedge: HedgeState<T>,
}

impl<T: Scalar> LambdaLearner<T> {
    pub fn new(arms: usize, j: usize) -> Result<Self> {
        if j >= arms {
            return Err(BanditError::InvalidArgument(format!("candidate arm {j} out of range")));
        }
        let cells: Vec<CellFtl<T>> = (0..arms).filter(|&k| k != j).map(|k| CellFtl::new(arms, j, k)).collect();
        if cells.is_empty() {
            return Err(BanditError::AllCellsInfeasible { j });
        }
        let hedge = HedgeState::new(cells.len())?;
        Ok(LambdaLearner { j, cells, hedge })
    }

    pub fn cells(&self) -> &[CellFtl<T>] {
        &self.cells
    }

    pub fn hedge(&self) -> &HedgeState<T> {
        &self.hedge
    }

    /// Current mixture; cells without a leader yet are solved at `mu` with zero weight.
    pub fn propose(&mut self, structure: &Structure<T>, family: &Family<T>, mu: &[T]) -> Result<Mixture<T>> {
        for c in self.cells.iter_mut() {
            if c.leader.is_none() && c.feasible {
                c.solve(structure, family, mu)?;
            }
        }
        let mut weights = self.hedge.weights();
        for (w, c) in weights.iter_mut().zip(&self.cells) {
            if !c.feasible {
                *w = T::zero();
            }
        }
        if weights.iter().all(|&w| w == T::zero()) {
            if self.cells.iter().all(|c| !c.feasible) {
                return Err(BanditError::AllCellsInfeasible { j: self.j });
            }
            for (w, c) in weights.iter_mut().zip(&self.cells) {
                *w = if c.feasible { T::one() } else { T::zero() };
            }
        }
        normalise(&mut weights);
        Ok(Mixture {
            cells: self.cells.iter().map(|c| c.k).collect(),
            weights,
            leaders: self
                .cells
                .iter()
                .map(|c| c.leader.clone().unwrap_or_else(|| mu.to_vec()))
                .collect(),
        })
    }

    /// Charges each cell `sum_i increment_i d(mu_i, leader_i)` at its current
    /// leader, then lets every cell absorb the increment.
    pub fn update(&mut self, structure: &Structure<T>, family: &Family<T>, mu: &[T], increment: &[T]) -> Result<()> {
        if increment.len() != mu.len() {
            return Err(BanditError::DimensionMismatch { expected: mu.len(), got: increment.len() });
        }
        let losses: Vec<T> = self
            .cells
            .iter()
            .map(|c| match &c.leader {
                Some(l) => (0..mu.len())
                    .filter(|&i| increment[i] > T::zero())
                    .map(|i| increment[i] * family.divergence(mu[i], l[i]))
                    .sum(),
                None => T::nan(),
            })
            .collect();
        let worst = losses.iter().copied().filter(|x| x.is_finite()).fold(T::zero(), |a, b| a.max(b));
        let losses: Vec<T> = losses.into_iter().map(|x| if x.is_finite() { x } else { worst }).collect();
        self.hedge.update(&losses, Direction::MinimiseLoss)?;
        for c in self.cells.iter_mut() {
            c.update(structure, family, mu, increment)?;
        }
        Ok(())
    }

    /// Cell with the largest aggregator weight (lowest index on ties).
    pub fn favourite(&self) -> usize {
        let w = self.hedge.weights();
        let neg: Vec<T> = w.iter().map(|&x| -x).collect();
        self.cells[argmin(&neg)].k
    }
}
