//! Plug-in algorithm with forced exploration.

use super::{AlgoConfig, AlgoState, RoundKind};
use crate::error::Result;
use crate::expfamily::Family;
use crate::saddle::{primal_value, KSolver};
use crate::scalar::{argmax, argmin, Scalar};
use crate::structures::Structure;

#[derive(Debug, Clone)]
pub(super) struct OssbState<T> {
    solver: KSolver<T>,
    /// Exploration rounds so far.
    explorations: u64,
    /// Forced exploration rate `0.02 / sqrt(ln T)`.
    rate: T,
    pub(super) residual: Option<T>,
}

impl<T: Scalar> OssbState<T> {
    pub(super) fn new(arms: usize, horizon: u64) -> Result<Self> {
        let lt = T::lit(horizon.max(3) as f64).ln();
        Ok(OssbState { solver: KSolver::new(arms)?, explorations: 0, rate: T::lit(0.02) / lt.sqrt(), residual: None })
    }

    pub(super) fn choose(
        &mut self,
        state: &AlgoState<T>,
        config: &AlgoConfig<T>,
        structure: &Structure<T>,
        family: &Family<T>,
    ) -> Result<(usize, RoundKind)> {
        let mu = &state.means;
        let top = argmax(mu);
        let n = state.counts_real();
        let f = T::lit((state.t + 1) as f64).ln_1p();
        let second = (0..mu.len()).filter(|&k| k != top).fold(top, |b, k| if b == top || mu[k] > mu[b] { k } else { b });
        match structure.alternative_exceeds(family, mu, &n, top, f, second) {
            Ok(true) => return Ok((top, RoundKind::Exploit)),
            Ok(false) | Err(crate::error::BanditError::AllCellsInfeasible { .. }) => {}
            Err(e) => return Err(e),
        }
        self.explorations += 1;
        let least = argmin(&n);
        if n[least] < self.rate * T::lit(self.explorations as f64) {
            return Ok((least, RoundKind::LeastPulled));
        }
        let floor = config.ossb_gap_floor;
        let gaps: Vec<T> = mu.iter().map(|&m| (mu[top] - m).max(floor)).collect();
        let run = self.solver.run(structure, family, mu, &gaps, top, config.ossb_iterations)?;
        let lower = primal_value(structure, family, mu, &gaps, &run.proportions, top)?;
        self.residual = Some(run.dual_value - lower);
        // Most under-sampled arm relative to the plug-in proportions.
        let ratio: Vec<T> = n
            .iter()
            .zip(&run.proportions)
            .map(|(&c, &w)| if w > T::zero() { c / w } else { T::infinity() })
            .collect();
        Ok((argmin(&ratio), RoundKind::Tracked))
    }
}
