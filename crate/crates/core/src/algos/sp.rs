//! Saddle-point algorithms and the kl-UCB baseline.

use super::{AlgoConfig, AlgoState, RoundKind};
use crate::concentration::{confidence_interval, g_threshold};
use crate::error::{BanditError, Result};
use crate::expfamily::Family;
use crate::learners::{Direction, HedgeState, LambdaLearner};
use crate::scalar::{argmax, dot, normalise, Scalar};
use crate::structures::Structure;

/// `max_{xi in [lo, hi]} num(xi) / max(eps, 1{!candidate} (upper_j - xi))`
/// for a convex nonnegative `num`. The ratio is quasi-convex, so the maximum sits
/// at an endpoint or at the kink `xi = upper_j - eps`.
pub fn optimistic_ratio<T: Scalar, F: Fn(T) -> T>(num: F, lo: T, hi: T, upper_j: T, eps: T, candidate: bool) -> T {
    let ratio = |xi: T| {
        let den = if candidate { eps } else { eps.max(upper_j - xi) };
        num(xi) / den
    };
    let kink = (upper_j - eps).max(lo).min(hi);
    ratio(lo).max(ratio(hi)).max(ratio(kink))
}

/// Optimistic payoff ratio of one arm against a single point `lambda`.
pub fn ucb_ratio<T: Scalar>(family: &Family<T>, lo: T, hi: T, lambda: T, upper_j: T, eps: T, candidate: bool) -> T {
    optimistic_ratio(|xi| family.divergence(xi, lambda), lo, hi, upper_j, eps, candidate)
}

/// kl-UCB index arm with exploration rate `ln t + 3 ln ln max(t, 3)`.
pub(super) fn kl_ucb_arm<T: Scalar>(state: &AlgoState<T>, family: &Family<T>) -> Result<usize> {
    let t = T::lit((state.t + 1) as f64);
    let rate = t.ln() + T::lit(3.0) * t.max(T::lit(3.0)).ln().ln();
    let mut idx = Vec::with_capacity(state.arms());
    for (k, &m) in state.means.iter().enumerate() {
        idx.push(family.kl_inverse_upper(m, rate, T::lit(state.counts[k] as f64))?);
    }
    Ok(argmax(&idx))
}

/// Confidence intervals and the gap floor of an exploration round for candidate `j`.
struct Optimism<T> {
    lo: Vec<T>,
    hi: Vec<T>,
    eps: T,
}

impl<T: Scalar> Optimism<T> {
    fn new(state: &AlgoState<T>, config: &AlgoConfig<T>, family: &Family<T>, j: usize) -> Result<Self> {
        let n = state.explorations[j];
        let thr = g_threshold(&config.thresholds, state.t + 1, T::lit(n.max(1) as f64));
        let mut lo = Vec::with_capacity(state.arms());
        let mut hi = Vec::with_capacity(state.arms());
        for (k, &m) in state.means.iter().enumerate() {
            let (a, b) = confidence_interval(family, m, T::lit(state.counts[k] as f64), thr)?;
            lo.push(a);
            hi.push(b);
        }
        Ok(Optimism { lo, hi, eps: config.schedule.value(n) })
    }

    /// `max(eps, upper_j - upper_k)`, equal to `eps` at `j`.
    fn gaps(&self, j: usize) -> Vec<T> {
        self.hi.iter().enumerate().map(|(k, &h)| if k == j { self.eps } else { self.eps.max(self.hi[j] - h) }).collect()
    }

    fn ratio<F: Fn(T) -> T>(&self, num: F, k: usize, j: usize) -> T {
        optimistic_ratio(num, self.lo[k], self.hi[k], self.hi[j], self.eps, k == j)
    }
}

fn non_finite<T: Scalar>(what: &str, state: &AlgoState<T>, j: usize, v: &[T]) -> BanditError {
    BanditError::NonFinite(format!(
        "{what} at round {} (candidate {j}, counts {:?}, means {:?}): {:?}",
        state.t + 1,
        state.counts,
        state.means.iter().map(|m| m.as_f64()).collect::<Vec<_>>(),
        v.iter().map(|m| m.as_f64()).collect::<Vec<_>>()
    ))
}

pub(super) fn sp_k_explore<T: Scalar>(
    state: &mut AlgoState<T>,
    config: &AlgoConfig<T>,
    structure: &Structure<T>,
    family: &Family<T>,
    learners: &mut [Option<HedgeState<T>>],
) -> Result<(usize, RoundKind)> {
    let j = argmax(&state.means);
    let n = state.explorations[j];
    state.explorations[j] += 1;
    if n.is_multiple_of(2) {
        return Ok((j, RoundKind::Forced));
    }
    let opt = Optimism::new(state, config, family, j)?;
    let gaps = opt.gaps(j);
    let hedge = match &mut learners[j] {
        Some(h) => h,
        slot => slot.insert(HedgeState::new(state.arms())?),
    };
    let wt = hedge.weights();
    let mut w: Vec<T> = wt.iter().zip(&gaps).map(|(&a, &g)| a / g).collect();
    normalise(&mut w);
    let (br, _) = structure.best_response_neg(family, &state.means, &w, j)?;
    let cost = dot(&w, &gaps);
    let gain: Vec<T> = (0..state.arms())
        .map(|k| cost * opt.ratio(|xi| family.divergence(xi, br.lambda[k]), k, j))
        .collect();
    if gain.iter().any(|g| !g.is_finite()) {
        return Err(non_finite("arm-side gain", state, j, &gain));
    }
    hedge.update(&gain, Direction::MaximiseGain)?;
    for (c, &x) in state.cumulative_proportions.iter_mut().zip(&w) {
        *c = *c + x;
    }
    Ok((state.track_pull(), RoundKind::Tracked))
}

pub(super) fn sp_lambda_explore<T: Scalar>(
    state: &mut AlgoState<T>,
    config: &AlgoConfig<T>,
    structure: &Structure<T>,
    family: &Family<T>,
    learners: &mut [Option<LambdaLearner<T>>],
) -> Result<(usize, RoundKind)> {
    let j = argmax(&state.means);
    let n = state.explorations[j];
    state.explorations[j] += 1;
    if n.is_multiple_of(2) {
        return Ok((j, RoundKind::Forced));
    }
    let opt = Optimism::new(state, config, family, j)?;
    let learner = match &mut learners[j] {
        Some(l) => l,
        slot => slot.insert(LambdaLearner::new(state.arms(), j)?),
    };
    let q = learner.propose(structure, family, &state.means)?;
    let ucb: Vec<T> = (0..state.arms())
        .map(|k| opt.ratio(|xi| q.expected_divergence(family, k, xi), k, j))
        .collect();
    if ucb.iter().any(|g| !g.is_finite()) {
        return Err(non_finite("instance-side payoff", state, j, &ucb));
    }
    let response = argmax(&ucb);
    state.cumulative_proportions[response] = state.cumulative_proportions[response] + T::one();
    let pull = state.track_pull();
    let mut inc = vec![T::zero(); state.arms()];
    inc[pull] = T::one();
    learner.update(structure, family, &state.means, &inc)?;
    Ok((pull, RoundKind::Tracked))
}
