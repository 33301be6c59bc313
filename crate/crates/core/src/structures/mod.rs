//! Structure sets `M` and their alternative-minimisation oracles.
//!
//! For a candidate best arm `j` and a challenger `k`, the cell
//! `{lambda in M : lambda^k >= lambda^j}` is searched for the minimiser of
//! `sum_i w^i d(mu^i, lambda^i)`. The alternative set of `j` is the union of
//! its `K - 1` cells. Arm indices are 0-based.

mod categorised;
mod isotonic;
mod linear;
mod lipschitz;
mod sparse;

pub use isotonic::{isotonic_decreasing, isotonic_increasing};

use crate::error::{BanditError, Result};
use crate::expfamily::Family;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub enum StructureKind<T> {
    Unconstrained,
    /// At most `s` arms above `gamma`, all others exactly at `gamma`.
    Sparse { s: usize, gamma: T },
    /// `lambda^i = <arms[i], eta>` for some `eta`.
    Linear { arms: Vec<Vec<T>> },
    /// Nondecreasing up to a peak, nonincreasing after it.
    Unimodal,
    /// `|lambda^i - lambda^{i+1}| <= l`.
    Lipschitz { l: T },
    /// Two categories labelled 0 and 1; every arm of one category is at least
    /// every arm of the other.
    Categorised { categories: Vec<usize> },
}

/// A structure over `K` arms with an optional bounding box for grids.
#[derive(Debug, Clone, PartialEq)]
pub struct Structure<T> {
    kind: StructureKind<T>,
    k: usize,
    bounds: Option<(T, T)>,
}

/// Minimiser and value of one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct AltMin<T> {
    pub lambda: Vec<T>,
    pub value: T,
}

/// Weighted divergence `sum_i w^i d(mu^i, lambda^i)`.
pub fn objective<T: Scalar>(family: &Family<T>, mu: &[T], w: &[T], lambda: &[T]) -> T {
    mu.iter()
        .zip(w)
        .zip(lambda)
        .map(|((&m, &wi), &l)| if wi == T::zero() { T::zero() } else { wi * family.divergence(m, l) })
        .sum()
}

impl<T: Scalar> Structure<T> {
    pub fn new(kind: StructureKind<T>, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(BanditError::InvalidArgument("a structure needs at least one arm".into()));
        }
        match &kind {
            StructureKind::Unconstrained | StructureKind::Unimodal => {}
            StructureKind::Sparse { s, gamma } => {
                if *s == 0 || *s > k {
                    return Err(BanditError::InvalidArgument(format!("sparsity s = {s} must be in 1..={k}")));
                }
                if !gamma.is_finite() {
                    return Err(BanditError::domain("sparse level", *gamma));
                }
            }
            StructureKind::Linear { arms } => {
                if arms.len() != k {
                    return Err(BanditError::DimensionMismatch { expected: k, got: arms.len() });
                }
                let d = arms[0].len();
                if d == 0 || d > k {
                    return Err(BanditError::InvalidArgument(format!("linear dimension {d} must be in 1..={k}")));
                }
                for a in arms {
                    if a.len() != d {
                        return Err(BanditError::DimensionMismatch { expected: d, got: a.len() });
                    }
                    if a.iter().any(|x| !x.is_finite()) {
                        return Err(BanditError::NonFinite("linear arm vector".into()));
                    }
                }
            }
            StructureKind::Lipschitz { l } => {
                if !(*l > T::zero()) || !l.is_finite() {
                    return Err(BanditError::domain("lipschitz constant", *l));
                }
            }
            StructureKind::Categorised { categories } => {
                if categories.len() != k {
                    return Err(BanditError::DimensionMismatch { expected: k, got: categories.len() });
                }
                if let Some(&c) = categories.iter().find(|&&c| c > 1) {
                    return Err(BanditError::InvalidArgument(format!(
                        "categories must be labelled 0 or 1, got {c}"
                    )));
                }
            }
        }
        Ok(Structure { kind, k, bounds: None })
    }

    pub fn unconstrained(k: usize) -> Result<Self> {
        Self::new(StructureKind::Unconstrained, k)
    }

    /// Fixes the bounding box used by grid searches instead of the default rule.
    pub fn with_bounds(mut self, lo: T, hi: T) -> Result<Self> {
        if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(BanditError::InvalidArgument(format!("empty box [{lo}, {hi}]")));
        }
        self.bounds = Some((lo, hi));
        Ok(self)
    }

    pub fn kind(&self) -> &StructureKind<T> {
        &self.kind
    }

    pub fn arms(&self) -> usize {
        self.k
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            StructureKind::Unconstrained => "unconstrained",
            StructureKind::Sparse { .. } => "sparse",
            StructureKind::Linear { .. } => "linear",
            StructureKind::Unimodal => "unimodal",
            StructureKind::Lipschitz { .. } => "lipschitz",
            StructureKind::Categorised { .. } => "categorised",
        }
    }

    /// Bounding box: the configured one, else `[min mu - 5 sigma, max mu + 5 sigma]`
    /// for Gaussian and `[1e-6, 1 - 1e-6]` for Bernoulli.
    pub fn box_for(&self, family: &Family<T>, mu: &[T]) -> (T, T) {
        if let Some(b) = self.bounds {
            return b;
        }
        match family {
            Family::Gaussian { variance } => {
                let s = T::lit(5.0) * variance.sqrt();
                let lo = mu.iter().fold(T::infinity(), |a, &b| a.min(b));
                let hi = mu.iter().fold(T::neg_infinity(), |a, &b| a.max(b));
                (lo - s, hi + s)
            }
            Family::Bernoulli => (T::lit(1e-6), T::one() - T::lit(1e-6)),
        }
    }

    fn validate(&self, family: &Family<T>, mu: &[T], w: &[T], j: usize, k: usize) -> Result<()> {
        if mu.len() != self.k {
            return Err(BanditError::DimensionMismatch { expected: self.k, got: mu.len() });
        }
        if w.len() != self.k {
            return Err(BanditError::DimensionMismatch { expected: self.k, got: w.len() });
        }
        if j >= self.k || k >= self.k || j == k {
            return Err(BanditError::InvalidArgument(format!(
                "cell ({j}, {k}) needs two distinct arms below {}",
                self.k
            )));
        }
        if let Some(&x) = w.iter().find(|&&x| !(x >= T::zero()) || !x.is_finite()) {
            return Err(BanditError::domain("weight", x));
        }
        if let Some(&x) = mu.iter().find(|&&x| !family.admits(x)) {
            return Err(BanditError::domain("mean", x));
        }
        Ok(())
    }

    /// Minimises the weighted divergence over the cell `lambda^k >= lambda^j`.
    pub fn alt_min(&self, family: &Family<T>, mu: &[T], w: &[T], j: usize, k: usize) -> Result<AltMin<T>> {
        self.validate(family, mu, w, j, k)?;
        let lambda = match &self.kind {
            StructureKind::Unconstrained => unconstrained(mu, w, j, k),
            StructureKind::Sparse { s, gamma } => sparse::alt_min(family, mu, w, j, k, *s, *gamma),
            StructureKind::Linear { arms } => linear::alt_min(family, arms, mu, w, j, k)?,
            StructureKind::Unimodal => isotonic::unimodal_alt_min(family, mu, w, j, k),
            StructureKind::Lipschitz { l } => lipschitz::alt_min(family, mu, w, j, k, *l),
            StructureKind::Categorised { categories } => categorised::alt_min(family, categories, mu, w, j, k),
        };
        let value = objective(family, mu, w, &lambda);
        if !value.is_finite() {
            return Err(BanditError::NonFinite(format!("alt-min value for cell ({j}, {k})")));
        }
        Ok(AltMin { lambda, value })
    }

    /// Closest alternative to `mu` in which `j` is not the best arm, with the
    /// challenger arm achieving it. Ties go to the smallest challenger.
    pub fn best_response_neg(&self, family: &Family<T>, mu: &[T], w: &[T], j: usize) -> Result<(AltMin<T>, usize)> {
        let mut best: Option<(AltMin<T>, usize)> = None;
        for k in (0..self.k).filter(|&k| k != j) {
            let r = match self.alt_min(family, mu, w, j, k) {
                Ok(r) => r,
                Err(BanditError::InfeasibleCell { .. }) => continue,
                Err(e) => return Err(e),
            };
            if best.as_ref().is_none_or(|(b, _)| r.value < b.value) {
                best = Some((r, k));
            }
        }
        best.ok_or(BanditError::AllCellsInfeasible { j })
    }

    /// Whether every cell of the alternative set of `j` has value above
    /// `threshold`. Stops at the first cell that does not, starting from `first`.
    pub fn alternative_exceeds(
        &self,
        family: &Family<T>,
        mu: &[T],
        w: &[T],
        j: usize,
        threshold: T,
        first: usize,
    ) -> Result<bool> {
        let order = std::iter::once(first).chain((0..self.k).filter(|&k| k != first));
        let mut any = false;
        for k in order.filter(|&k| k != j && k < self.k) {
            match self.alt_min(family, mu, w, j, k) {
                Ok(r) => {
                    any = true;
                    if r.value <= threshold {
                        return Ok(false);
                    }
                }
                Err(BanditError::InfeasibleCell { .. }) => {}
                Err(e) => return Err(e),
            }
        }
        if any {
            Ok(true)
        } else {
            Err(BanditError::AllCellsInfeasible { j })
        }
    }

    /// Whether `lambda` lies within `tol` of the structure set.
    pub fn membership(&self, lambda: &[T], tol: T) -> bool {
        if lambda.len() != self.k || lambda.iter().any(|x| !x.is_finite()) {
            return false;
        }
        let dist = match &self.kind {
            StructureKind::Unconstrained => T::zero(),
            StructureKind::Sparse { s, gamma } => sparse::distance(lambda, *s, *gamma),
            StructureKind::Linear { arms } => linear::residual(arms, lambda),
            StructureKind::Unimodal => isotonic::unimodal_distance(lambda),
            StructureKind::Lipschitz { l } => lipschitz::distance(lambda, *l),
            StructureKind::Categorised { categories } => categorised::distance(categories, lambda),
        };
        dist <= tol
    }
}

/// Bregman centroid of two arms; the midpoint when both weights vanish.
pub(crate) fn pooled<T: Scalar>(mj: T, wj: T, mk: T, wk: T) -> T {
    let w = wj + wk;
    if w > T::zero() {
        (wj * mj + wk * mk) / w
    } else {
        T::half() * (mj + mk)
    }
}

fn unconstrained<T: Scalar>(mu: &[T], w: &[T], j: usize, k: usize) -> Vec<T> {
    let mut lambda = mu.to_vec();
    if mu[k] < mu[j] {
        let v = pooled(mu[j], w[j], mu[k], w[k]);
        lambda[j] = v;
        lambda[k] = v;
    }
    lambda
}

/// Minimiser over a common level `v` of
/// `sum_fixed w d(m, v) + sum_{upper, m > v} w d(m, v) + sum_{lower, m < v} w d(m, v)`.
///
/// Items are `(m, w)` pairs. `upper` items get clipped down to `v`, `lower`
/// items clipped up to `v`. For both families the derivative in `v` has the
/// sign of `sum_attached w (v - m)`, a continuous nondecreasing piecewise-linear
/// function whose root is found exactly by scanning its breakpoints. The result
/// is clamped to `[lo, hi]`.
pub(crate) fn common_level<T: Scalar>(fixed: &[(T, T)], upper: &[(T, T)], lower: &[(T, T)], lo: T, hi: T) -> T {
    let psi = |v: T| -> T {
        let mut s = T::zero();
        for &(m, w) in fixed {
            s = s + w * (v - m);
        }
        for &(m, w) in upper {
            if m > v {
                s = s + w * (v - m);
            }
        }
        for &(m, w) in lower {
            if m < v {
                s = s + w * (v - m);
            }
        }
        s
    };
    // Attached mass on the open interval containing `v`.
    let moments = |v: T| -> (T, T) {
        let (mut a, mut b) = (T::zero(), T::zero());
        let mut add = |m: T, w: T| {
            a = a + w;
            b = b + w * m;
        };
        fixed.iter().for_each(|&(m, w)| add(m, w));
        upper.iter().filter(|&&(m, _)| m > v).for_each(|&(m, w)| add(m, w));
        lower.iter().filter(|&&(m, _)| m < v).for_each(|&(m, w)| add(m, w));
        (a, b)
    };
    let mut pts: Vec<T> = upper
        .iter()
        .chain(lower)
        .filter(|&&(_, w)| w > T::zero())
        .map(|&(m, _)| m)
        .collect();
    pts.sort_by(|a, b| a.partial_cmp(b).expect("finite breakpoints"));
    pts.dedup();

    let root = match pts.iter().position(|&p| psi(p) >= T::zero()) {
        None => {
            let probe = pts.last().map_or(T::zero(), |&p| p + T::one());
            let (a, b) = moments(probe);
            if a > T::zero() {
                b / a
            } else {
                T::half() * (lo + hi)
            }
        }
        Some(i) => {
            if psi(pts[i]) == T::zero() || i == 0 && {
                let (a, _) = moments(pts[0] - T::one());
                a == T::zero()
            } {
                pts[i]
            } else {
                let probe = if i == 0 { pts[0] - T::one() } else { T::half() * (pts[i - 1] + pts[i]) };
                let (a, b) = moments(probe);
                b / a
            }
        }
    };
    root.max(lo).min(hi)
}

#[cfg(test)]
mod tests;
