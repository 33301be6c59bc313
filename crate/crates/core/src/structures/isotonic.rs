//! Weighted isotonic regression and the unimodal oracle built on it.
//!
//! Divergences of exponential families are Bregman divergences in the mean
//! parameter, so pool-adjacent-violators with weighted means is exact for them.

use super::{common_level, objective};
use crate::expfamily::Family;
use crate::scalar::Scalar;

/// Nondecreasing fit minimising `sum w_i d(y_i, x_i)`.
///
/// Points of zero weight take the value closest to their observation that
/// keeps the fit monotone.
pub fn isotonic_increasing<T: Scalar>(y: &[T], w: &[T]) -> Vec<T> {
    debug_assert_eq!(y.len(), w.len());
    // (weighted sum, weight, number of positive-weight points)
    let mut blocks: Vec<(T, T, usize)> = Vec::with_capacity(y.len());
    for (&yi, &wi) in y.iter().zip(w) {
        if wi <= T::zero() {
            continue;
        }
        blocks.push((wi * yi, wi, 1));
        while blocks.len() > 1 {
            let (s1, w1, _) = blocks[blocks.len() - 1];
            let (s0, w0, _) = blocks[blocks.len() - 2];
            if s0 / w0 > s1 / w1 {
                let (_, _, n1) = blocks.pop().expect("two blocks");
                let last = blocks.last_mut().expect("one block");
                last.0 = s0 + s1;
                last.1 = w0 + w1;
                last.2 += n1;
            } else {
                break;
            }
        }
    }
    let mut fitted = Vec::with_capacity(y.len());
    for &(s, wt, n) in &blocks {
        let m = s / wt;
        fitted.extend(std::iter::repeat_n(m, n));
    }

    let mut next_fit = vec![T::infinity(); y.len()];
    let mut upcoming = T::infinity();
    let mut idx = fitted.len();
    for i in (0..y.len()).rev() {
        next_fit[i] = upcoming;
        if w[i] > T::zero() {
            idx -= 1;
            upcoming = fitted[idx];
        }
    }
    let mut out = Vec::with_capacity(y.len());
    let mut prev = T::neg_infinity();
    let mut it = fitted.into_iter();
    for i in 0..y.len() {
        let v = if w[i] > T::zero() {
            it.next().expect("fit for each weighted point")
        } else {
            y[i].max(prev).min(next_fit[i])
        };
        out.push(v);
        prev = v;
    }
    out
}

/// Nonincreasing counterpart of [`isotonic_increasing`].
pub fn isotonic_decreasing<T: Scalar>(y: &[T], w: &[T]) -> Vec<T> {
    let ry: Vec<T> = y.iter().rev().copied().collect();
    let rw: Vec<T> = w.iter().rev().copied().collect();
    let mut out = isotonic_increasing(&ry, &rw);
    out.reverse();
    out
}

/// Fit along a chain of indices on which the values must be nondecreasing.
/// Positions holding `j` or `k` (and everything between them) are pinned to a
/// common level chosen jointly with the other chain; here we only return the
/// free fit and the pinned span.
struct ChainFit<T> {
    order: Vec<usize>,
    fit: Vec<T>,
    pinned: Option<(usize, usize)>,
}

impl<T: Scalar> ChainFit<T> {
    fn new(order: Vec<usize>, mu: &[T], w: &[T], j: usize, k: usize) -> Self {
        let pos: Vec<usize> = order
            .iter()
            .enumerate()
            .filter(|&(_, &i)| i == j || i == k)
            .map(|(p, _)| p)
            .collect();
        let pinned = pos.first().map(|&a| (a, *pos.last().expect("nonempty")));
        let ys: Vec<T> = order.iter().map(|&i| mu[i]).collect();
        let ws: Vec<T> = order.iter().map(|&i| w[i]).collect();
        let fit = match pinned {
            None => isotonic_increasing(&ys, &ws),
            Some((a, b)) => {
                let mut f = isotonic_increasing(&ys[..a], &ws[..a]);
                f.extend_from_slice(&ys[a..=b]);
                f.extend(isotonic_increasing(&ys[b + 1..], &ws[b + 1..]));
                f
            }
        };
        ChainFit { order, fit, pinned }
    }

    fn collect_items(&self, w: &[T], fixed: &mut Vec<(T, T)>, upper: &mut Vec<(T, T)>, lower: &mut Vec<(T, T)>) {
        let Some((a, b)) = self.pinned else { return };
        for (p, &i) in self.order.iter().enumerate() {
            let item = (self.fit[p], w[i]);
            if p < a {
                upper.push(item);
            } else if p <= b {
                fixed.push(item);
            } else {
                lower.push(item);
            }
        }
    }

    fn write(&self, v: T, lambda: &mut [T]) {
        for (p, &i) in self.order.iter().enumerate() {
            lambda[i] = match self.pinned {
                Some((a, _)) if p < a => self.fit[p].min(v),
                Some((_, b)) if p <= b => v,
                Some(_) => self.fit[p].max(v),
                None => self.fit[p],
            };
        }
    }
}

/// Unimodal cell oracle: union over peak splits `p` of the product of a
/// nondecreasing prefix `[0, p)` and a nonincreasing suffix `[p, K)`.
pub(super) fn unimodal_alt_min<T: Scalar>(family: &Family<T>, mu: &[T], w: &[T], j: usize, k: usize) -> Vec<T> {
    let n = mu.len();
    let lo = mu.iter().fold(T::infinity(), |a, &b| a.min(b));
    let hi = mu.iter().fold(T::neg_infinity(), |a, &b| a.max(b));
    let mut best: Option<(T, Vec<T>)> = None;
    for p in 1..=n {
        let mut free = isotonic_increasing(&mu[..p], &w[..p]);
        free.extend(isotonic_decreasing(&mu[p..], &w[p..]));
        let free_cost = objective(family, mu, w, &free);
        if let Some((b, _)) = &best {
            if free_cost >= *b {
                continue;
            }
        }
        let (cost, lambda) = if free[k] >= free[j] {
            (free_cost, free)
        } else {
            let prefix = ChainFit::new((0..p).collect(), mu, w, j, k);
            let suffix = ChainFit::new((p..n).rev().collect(), mu, w, j, k);
            let (mut fixed, mut upper, mut lower) = (Vec::new(), Vec::new(), Vec::new());
            prefix.collect_items(w, &mut fixed, &mut upper, &mut lower);
            suffix.collect_items(w, &mut fixed, &mut upper, &mut lower);
            let v = common_level(&fixed, &upper, &lower, lo, hi);
            let mut lambda = vec![T::zero(); n];
            prefix.write(v, &mut lambda);
            suffix.write(v, &mut lambda);
            (objective(family, mu, w, &lambda), lambda)
        };
        if best.as_ref().is_none_or(|(b, _)| cost < *b) {
            best = Some((cost, lambda));
        }
    }
    best.expect("at least one peak split").1
}

/// Largest sup-norm repair needed to make `x[lo..hi]` nondecreasing.
fn monotone_gap<T: Scalar>(x: &[T]) -> T {
    let mut run_max = T::neg_infinity();
    let mut gap = T::zero();
    for &v in x {
        run_max = run_max.max(v);
        gap = gap.max(run_max - v);
    }
    gap * T::half()
}

/// Sup-norm distance to the unimodal set.
pub(super) fn unimodal_distance<T: Scalar>(lambda: &[T]) -> T {
    let rev: Vec<T> = lambda.iter().rev().copied().collect();
    let n = lambda.len();
    (1..=n)
        .map(|p| monotone_gap(&lambda[..p]).max(monotone_gap(&rev[..n - p])))
        .fold(T::infinity(), |a, b| a.min(b))
}
