//! Noise-free lower-bound game.
//!
//! For a bandit instance with best arm `i*` and perturbed gaps
//! `Delta_eps^k = max(Delta^k, eps)`, the value
//!
//! ```text
//! D_eps = max_w inf_{lambda in alt(i*)} sum_k w^k d(mu^k, lambda^k) / sum_k w^k Delta_eps^k
//!       = inf_q max_k E_{lambda ~ q} d(mu^k, lambda^k) / Delta_eps^k
//! ```
//!
//! is the information gained per unit of regret, and `V_eps = 1 / D_eps` is the
//! asymptotic regret rate. The solvers here run one player as a no-regret
//! learner against a best-responding opponent and report certified bounds.

use crate::error::{BanditError, Result};
use crate::expfamily::Family;
use crate::learners::{Direction, HedgeState, LambdaLearner};
use crate::scalar::{argmax, dot, normalise, Scalar};
use crate::structures::{Structure, StructureKind};

/// Minimal margin between the best and second-best mean.
pub const BEST_ARM_MARGIN: f64 = 1e-6;

/// Ground truth of a simulation: means, reward family and structure.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance<T> {
    means: Vec<T>,
    family: Family<T>,
    structure: Structure<T>,
    best: usize,
}

impl<T: Scalar> Instance<T> {
    pub fn new(means: Vec<T>, family: Family<T>, structure: Structure<T>) -> Result<Self> {
        if means.len() != structure.arms() {
            return Err(BanditError::DimensionMismatch { expected: structure.arms(), got: means.len() });
        }
        if means.len() < 2 {
            return Err(BanditError::InvalidArgument("an instance needs at least two arms".into()));
        }
        if let Some(&m) = means.iter().find(|&&m| !family.admits(m)) {
            return Err(BanditError::domain("arm mean", m));
        }
        let best = unique_best(&means)?;
        Ok(Instance { means, family, structure, best })
    }

    pub fn means(&self) -> &[T] {
        &self.means
    }

    pub fn family(&self) -> &Family<T> {
        &self.family
    }

    pub fn structure(&self) -> &Structure<T> {
        &self.structure
    }

    pub fn arms(&self) -> usize {
        self.means.len()
    }

    pub fn best_arm(&self) -> usize {
        self.best
    }

    pub fn gaps(&self) -> Vec<T> {
        let top = self.means[self.best];
        self.means.iter().map(|&m| top - m).collect()
    }

    pub fn perturbed_gaps(&self, eps: T) -> Result<PerturbedGaps<T>> {
        PerturbedGaps::new(&self.means, self.best, eps)
    }

    /// Coefficient of the unstructured bound `sum_{k != i*} Delta^k / d(mu^k, mu^*)`.
    pub fn unconstrained_rate(&self) -> T {
        let top = self.means[self.best];
        (0..self.arms())
            .filter(|&k| k != self.best)
            .map(|k| (top - self.means[k]) / self.family.divergence(self.means[k], top))
            .sum()
    }
}

/// Index of the best arm, rejecting near-ties.
pub fn unique_best<T: Scalar>(means: &[T]) -> Result<usize> {
    let best = argmax(means);
    let runner_up = means
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != best)
        .fold(T::neg_infinity(), |a, (_, &m)| a.max(m));
    if means[best] - runner_up < T::lit(BEST_ARM_MARGIN) {
        return Err(BanditError::InvalidArgument(format!(
            "best arm is not unique: margin {} below {BEST_ARM_MARGIN}",
            means[best] - runner_up
        )));
    }
    Ok(best)
}

/// `Delta_eps^k = max(Delta^k, eps)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbedGaps<T> {
    pub eps: T,
    pub gaps: Vec<T>,
}

impl<T: Scalar> PerturbedGaps<T> {
    pub fn new(means: &[T], best: usize, eps: T) -> Result<Self> {
        if !(eps > T::zero()) || !eps.is_finite() {
            return Err(BanditError::domain("perturbation eps", eps));
        }
        let top = means[best];
        Ok(PerturbedGaps { eps, gaps: means.iter().map(|&m| (top - m).max(eps)).collect() })
    }
}

/// One atom of a dual mixture: a leader of the cell with challenger `cell`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualAtom<T> {
    pub cell: usize,
    pub weight: T,
    pub lambda: Vec<T>,
}

/// Certified bounds on `D_eps` plus the strategies that certify them.
#[derive(Debug, Clone, PartialEq)]
pub struct GameValueResult<T> {
    /// Primal certificate: the value guaranteed by `proportions`.
    pub value_lower: T,
    /// Dual certificate: the value no strategy can beat against `dual`.
    pub value_upper: T,
    /// Pull proportions `w`.
    pub proportions: Vec<T>,
    /// Regret proportions `w~ ∝ w Delta_eps`.
    pub regret_proportions: Vec<T>,
    pub iterations: usize,
    pub dual: Vec<DualAtom<T>>,
}

impl<T: Scalar> GameValueResult<T> {
    /// Midpoint estimate of `D_eps`.
    pub fn value(&self) -> T {
        T::half() * (self.value_lower + self.value_upper)
    }

    /// Estimate of the regret rate `V_eps = 1 / D_eps`.
    pub fn rate(&self) -> T {
        self.value().recip()
    }
}

/// Value certified by pull proportions `w`: `inf_lambda sum w d / sum w Delta`.
pub fn primal_value<T: Scalar>(
    structure: &Structure<T>,
    family: &Family<T>,
    mu: &[T],
    gaps: &[T],
    w: &[T],
    best: usize,
) -> Result<T> {
    let (br, _) = structure.best_response_neg(family, mu, w, best)?;
    let cost = dot(w, gaps);
    Ok(br.value / cost)
}

fn pull_from_regret<T: Scalar>(wt: &[T], gaps: &[T]) -> Vec<T> {
    let mut w: Vec<T> = wt.iter().zip(gaps).map(|(&a, &g)| a / g).collect();
    normalise(&mut w);
    w
}

fn regret_from_pull<T: Scalar>(w: &[T], gaps: &[T]) -> Vec<T> {
    let mut wt: Vec<T> = w.iter().zip(gaps).map(|(&a, &g)| a * g).collect();
    normalise(&mut wt);
    wt
}

/// Arm-side AdaHedge solver, resumable so that callers can warm-start it on
/// slowly changing means.
#[derive(Debug, Clone)]
pub struct KSolver<T> {
    hedge: HedgeState<T>,
}

/// Outcome of a batch of [`KSolver`] iterations.
#[derive(Debug, Clone, PartialEq)]
pub struct KRun<T> {
    pub regret_proportions: Vec<T>,
    pub proportions: Vec<T>,
    /// `max_k` of the averaged payoff against the played instances.
    pub dual_value: T,
    pub dual: Vec<DualAtom<T>>,
}

impl<T: Scalar> KSolver<T> {
    pub fn new(arms: usize) -> Result<Self> {
        Ok(KSolver { hedge: HedgeState::new(arms)? })
    }

    pub fn hedge(&self) -> &HedgeState<T> {
        &self.hedge
    }

    /// Runs `iters` rounds at the given means and gaps; the returned proportions
    /// average this batch only.
    pub fn run(
        &mut self,
        structure: &Structure<T>,
        family: &Family<T>,
        mu: &[T],
        gaps: &[T],
        best: usize,
        iters: usize,
    ) -> Result<KRun<T>> {
        let n = mu.len();
        let mut sum_wt = vec![T::zero(); n];
        let mut payoff = vec![T::zero(); n];
        let mut alpha_sum = T::zero();
        let mut atoms: Vec<Option<(T, Vec<T>)>> = vec![None; n];
        for _ in 0..iters.max(1) {
            let wt = self.hedge.weights();
            let w = pull_from_regret(&wt, gaps);
            let (br, witness) = structure.best_response_neg(family, mu, &w, best)?;
            let cost = dot(&w, gaps);
            let ratio: Vec<T> = (0..n).map(|k| family.divergence(mu[k], br.lambda[k]) / gaps[k]).collect();
            let gain: Vec<T> = ratio.iter().map(|&r| cost * r).collect();
            if gain.iter().any(|g| !g.is_finite()) {
                return Err(BanditError::NonFinite("arm-side gain".into()));
            }
            self.hedge.update(&gain, Direction::MaximiseGain)?;
            for k in 0..n {
                sum_wt[k] = sum_wt[k] + wt[k];
                payoff[k] = payoff[k] + cost * ratio[k];
            }
            alpha_sum = alpha_sum + cost;
            let slot = &mut atoms[witness];
            let acc = slot.as_ref().map_or(T::zero(), |(a, _)| *a);
            *slot = Some((acc + cost, br.lambda));
        }
        normalise(&mut sum_wt);
        let proportions = pull_from_regret(&sum_wt, gaps);
        let dual_value = payoff.iter().fold(T::neg_infinity(), |a, &p| a.max(p / alpha_sum));
        let dual = atoms
            .into_iter()
            .enumerate()
            .filter_map(|(k, a)| a.map(|(wgt, lambda)| DualAtom { cell: k, weight: wgt / alpha_sum, lambda }))
            .collect();
        Ok(KRun { regret_proportions: sum_wt, proportions, dual_value, dual })
    }
}

fn check_budget(n: usize) -> Result<()> {
    if n == 0 {
        return Err(BanditError::InvalidArgument("iteration budget must be positive".into()));
    }
    Ok(())
}

/// Arm player learns with AdaHedge over regret proportions; the instance player
/// best-responds each round.
pub fn solve_k_learner<T: Scalar>(inst: &Instance<T>, eps: T, n: usize) -> Result<GameValueResult<T>> {
    check_budget(n)?;
    let gaps = inst.perturbed_gaps(eps)?.gaps;
    let mut solver = KSolver::new(inst.arms())?;
    let run = solver.run(inst.structure(), inst.family(), inst.means(), &gaps, inst.best_arm(), n)?;
    let lower = primal_value(inst.structure(), inst.family(), inst.means(), &gaps, &run.proportions, inst.best_arm())?;
    Ok(GameValueResult {
        value_lower: lower,
        value_upper: run.dual_value.max(lower),
        proportions: run.proportions,
        regret_proportions: run.regret_proportions,
        iterations: n,
        dual: run.dual,
    })
}

/// Instance player learns (FTL per cell, AdaHedge across cells); the arm player
/// answers with the arm of largest expected divergence per unit gap.
pub fn solve_lambda_learner<T: Scalar>(inst: &Instance<T>, eps: T, n: usize) -> Result<GameValueResult<T>> {
    check_budget(n)?;
    let gaps = inst.perturbed_gaps(eps)?.gaps;
    let (mu, family, structure) = (inst.means(), inst.family(), inst.structure());
    let k = inst.arms();
    let mut learner = LambdaLearner::new(k, inst.best_arm())?;
    let mut counts = vec![T::zero(); k];
    let mut payoff = vec![T::zero(); k];
    let mut alpha_sum = T::zero();
    let mut cell_weight: Vec<T> = vec![T::zero(); k];
    for _ in 0..n {
        let q = learner.propose(structure, family, mu)?;
        let ratio: Vec<T> = (0..k).map(|a| q.expected_divergence(family, a, mu[a]) / gaps[a]).collect();
        if ratio.iter().any(|r| !r.is_finite()) {
            return Err(BanditError::NonFinite("instance-side payoff".into()));
        }
        let kt = argmax(&ratio);
        let alpha = gaps[kt];
        for a in 0..k {
            payoff[a] = payoff[a] + alpha * ratio[a];
        }
        alpha_sum = alpha_sum + alpha;
        for (&cell, &w) in q.cells.iter().zip(&q.weights) {
            cell_weight[cell] = cell_weight[cell] + alpha * w;
        }
        let mut inc = vec![T::zero(); k];
        inc[kt] = T::one();
        learner.update(structure, family, mu, &inc)?;
        counts[kt] = counts[kt] + T::one();
    }
    normalise(&mut counts);
    let lower = primal_value(structure, family, mu, &gaps, &counts, inst.best_arm())?;
    let upper = payoff.iter().fold(T::neg_infinity(), |a, &p| a.max(p / alpha_sum));
    let q = learner.propose(structure, family, mu)?;
    let dual = q
        .cells
        .iter()
        .zip(q.leaders)
        .filter(|(&c, _)| cell_weight[c] > T::zero())
        .map(|(&c, lambda)| DualAtom { cell: c, weight: cell_weight[c] / alpha_sum, lambda })
        .collect();
    Ok(GameValueResult {
        value_lower: lower,
        value_upper: upper.max(lower),
        regret_proportions: regret_from_pull(&counts, &gaps),
        proportions: counts,
        iterations: n,
        dual,
    })
}

/// Fictitious play on a finite game where the minimiser picks a row of
/// `payoffs` and the maximiser picks a column. Stops once the duality gap is
/// at most `rel_tol` times the upper bound. Returns `(lower, upper)`.
pub fn finite_game_value<T: Scalar>(payoffs: &[Vec<T>], rel_tol: T, max_iter: usize) -> Result<(T, T)> {
    let rows = payoffs.len();
    if rows == 0 {
        return Err(BanditError::InvalidArgument("empty strategy set".into()));
    }
    let cols = payoffs[0].len();
    if payoffs.iter().any(|r| r.len() != cols) || cols == 0 {
        return Err(BanditError::InvalidArgument("ragged payoff table".into()));
    }
    let mut row_cum = vec![T::zero(); rows];
    let mut col_cum = vec![T::zero(); cols];
    let mean_row: Vec<T> =
        (0..cols).map(|c| payoffs.iter().map(|r| r[c]).sum::<T>() / T::from_usize_lossy(rows)).collect();
    let mut col = argmax(&mean_row);
    let mut best = (T::neg_infinity(), T::infinity());
    for t in 1..=max_iter.max(1) {
        for (c, r) in row_cum.iter_mut().zip(payoffs) {
            *c = *c + r[col];
        }
        let row = crate::scalar::argmin(&row_cum);
        for (c, &v) in col_cum.iter_mut().zip(&payoffs[row]) {
            *c = *c + v;
        }
        col = argmax(&col_cum);
        let tt = T::from_usize_lossy(t);
        let lower = row_cum[row] / tt;
        let upper = col_cum[col] / tt;
        best = (best.0.max(lower), best.1.min(upper));
        if best.1 - best.0 <= rel_tol * best.1.abs() {
            break;
        }
    }
    Ok(best)
}

/// Largest number of grid points enumerated by [`brute_force_value`].
pub const BRUTE_FORCE_LIMIT: usize = 20_000_000;

/// Fictitious-play value of the game restricted to a grid of each cell.
///
/// Structures closed under clipping into the hull of the means are gridded
/// on that hull (which loses nothing); others use the structure box.
pub fn brute_force_value<T: Scalar>(inst: &Instance<T>, eps: T, step: T) -> Result<(T, T)> {
    if !(step > T::zero()) || !step.is_finite() {
        return Err(BanditError::domain("grid step", step));
    }
    let gaps = inst.perturbed_gaps(eps)?.gaps;
    let (mu, family, structure) = (inst.means(), inst.family(), inst.structure());
    let (lo, hi) = match structure.kind() {
        StructureKind::Sparse { .. } | StructureKind::Linear { .. } => structure.box_for(family, mu),
        _ => (
            mu.iter().fold(T::infinity(), |a, &b| a.min(b)),
            mu.iter().fold(T::neg_infinity(), |a, &b| a.max(b)),
        ),
    };
    let mut axis = Vec::new();
    let mut x = lo;
    while x < hi {
        axis.push(x);
        x = lo + step * T::from_usize_lossy(axis.len());
    }
    axis.push(hi);
    let k = inst.arms();
    let total = (axis.len() as f64).powi(k as i32);
    if total > BRUTE_FORCE_LIMIT as f64 {
        return Err(BanditError::Resource(format!(
            "grid of {total:.3e} points exceeds the limit of {BRUTE_FORCE_LIMIT}"
        )));
    }
    let best = inst.best_arm();
    let mut frontier: Vec<Vec<T>> = Vec::new();
    let mut idx = vec![0usize; k];
    let mut lambda = vec![T::zero(); k];
    loop {
        for a in 0..k {
            lambda[a] = axis[idx[a]];
        }
        let in_alt = (0..k).any(|c| c != best && lambda[c] >= lambda[best]);
        if in_alt && structure.membership(&lambda, T::lit(1e-9)) {
            let v: Vec<T> = (0..k).map(|a| family.divergence(mu[a], lambda[a]) / gaps[a]).collect();
            insert_pareto(&mut frontier, v);
        }
        let mut a = 0;
        loop {
            if a == k {
                return finite_game_value(&frontier, T::lit(1e-3), 100_000)
                    .map_err(|_| BanditError::AllCellsInfeasible { j: best });
            }
            idx[a] += 1;
            if idx[a] < axis.len() {
                break;
            }
            idx[a] = 0;
            a += 1;
        }
    }
}

/// Keeps only coordinatewise-minimal payoff vectors (the minimiser never wants
/// a dominated one).
fn insert_pareto<T: Scalar>(frontier: &mut Vec<Vec<T>>, v: Vec<T>) {
    let dominates = |a: &[T], b: &[T]| a.iter().zip(b).all(|(x, y)| x <= y);
    if frontier.iter().any(|f| dominates(f, &v)) {
        return;
    }
    frontier.retain(|f| !dominates(&v, f));
    frontier.push(v);
}

/// `(eps, D_eps)` table with the diagnostics of the perturbation bound
/// `D - D_eps <= c sqrt(eps)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationReport<T> {
    pub unperturbed: T,
    pub rows: Vec<(T, T)>,
    /// `(D - D_eps) / sqrt(eps)` per row.
    pub ratios: Vec<T>,
    /// `D_eps <= D` on every row (with relative slack `1e-3`).
    pub below_unperturbed: bool,
    /// `D_eps` nonincreasing in `eps`.
    pub monotone: bool,
    /// `max ratio / min ratio`.
    pub ratio_spread: T,
}

/// Midpoint of the intersection of both solvers' certificates.
pub fn certified_value<T: Scalar>(inst: &Instance<T>, eps: T, iters: usize) -> Result<T> {
    let a = solve_k_learner(inst, eps, iters)?;
    let b = solve_lambda_learner(inst, eps, iters)?;
    let lo = a.value_lower.max(b.value_lower);
    let hi = a.value_upper.min(b.value_upper).max(lo);
    Ok(T::half() * (lo + hi))
}

/// Solves the game at each `eps` with both learners (`iters` rounds each).
/// `unperturbed` defaults to the value at `min(eps) / 100`.
pub fn perturbation_check<T: Scalar>(
    inst: &Instance<T>,
    eps_list: &[T],
    iters: usize,
    unperturbed: Option<T>,
) -> Result<PerturbationReport<T>> {
    if eps_list.is_empty() {
        return Err(BanditError::InvalidArgument("empty eps list".into()));
    }
    let d = match unperturbed {
        Some(d) => d,
        None => {
            let e = eps_list.iter().fold(T::infinity(), |a, &b| a.min(b)) / T::lit(100.0);
            certified_value(inst, e, iters)?
        }
    };
    let mut rows = Vec::with_capacity(eps_list.len());
    for &e in eps_list {
        rows.push((e, certified_value(inst, e, iters)?));
    }
    let ratios: Vec<T> = rows.iter().map(|&(e, v)| (d - v) / e.sqrt()).collect();
    let slack = T::lit(1e-3) * d;
    let below = rows.iter().all(|&(_, v)| v <= d + slack);
    let mut sorted = rows.clone();
    sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite eps"));
    let monotone = sorted.windows(2).all(|p| p[1].1 <= p[0].1 + slack);
    let rmax = ratios.iter().fold(T::neg_infinity(), |a, &b| a.max(b));
    let rmin = ratios.iter().fold(T::infinity(), |a, &b| a.min(b));
    Ok(PerturbationReport {
        unperturbed: d,
        rows,
        ratios,
        below_unperturbed: below,
        monotone,
        ratio_spread: rmax / rmin,
    })
}
