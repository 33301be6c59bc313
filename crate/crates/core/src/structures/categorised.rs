//! Categorised oracle for two categories under strong dominance.
//!
//! For a fixed orientation (which category is on top) and separating level
//! `l`, every top arm is clipped up to `l` and every bottom arm down to it.
//! The cost is convex in `l`, and its minimiser is found exactly.

use super::{common_level, objective, pooled};
use crate::expfamily::Family;
use crate::scalar::Scalar;

pub(super) fn alt_min<T: Scalar>(family: &Family<T>, cat: &[usize], mu: &[T], w: &[T], j: usize, k: usize) -> Vec<T> {
    let lo = mu.iter().fold(T::infinity(), |a, &b| a.min(b));
    let hi = mu.iter().fold(T::neg_infinity(), |a, &b| a.max(b));
    let mut best: Option<(T, Vec<T>)> = None;
    for top in 0..2 {
        let lambda = oriented(mu, w, cat, top, j, k, lo, hi);
        let c = objective(family, mu, w, &lambda);
        if best.as_ref().is_none_or(|(b, _)| c < *b) {
            best = Some((c, lambda));
        }
    }
    best.expect("two orientations").1
}

#[allow(clippy::too_many_arguments)]
fn oriented<T: Scalar>(mu: &[T], w: &[T], cat: &[usize], top: usize, j: usize, k: usize, lo: T, hi: T) -> Vec<T> {
    let n = mu.len();
    let is_top = |i: usize| cat[i] == top;
    let (mut fixed, mut upper, mut lower) = (Vec::new(), Vec::new(), Vec::new());
    // Top arms are attached to the level when below it, bottom arms when above.
    let mut push = |i_top: bool, item: (T, T)| {
        if i_top {
            lower.push(item)
        } else {
            upper.push(item)
        }
    };
    for i in (0..n).filter(|&i| i != j && i != k) {
        push(is_top(i), (mu[i], w[i]));
    }
    #[derive(Clone, Copy)]
    enum Pair {
        Free,
        Forced,
        Pooled(bool),
    }
    let pair = match (is_top(j), is_top(k)) {
        (false, true) => Pair::Free,
        (true, false) => Pair::Forced,
        _ if mu[k] >= mu[j] => Pair::Free,
        (jt, _) => Pair::Pooled(jt),
    };
    let pm = pooled(mu[j], w[j], mu[k], w[k]);
    match pair {
        Pair::Free => {
            push(is_top(j), (mu[j], w[j]));
            push(is_top(k), (mu[k], w[k]));
        }
        Pair::Forced => {
            fixed.push((mu[j], w[j]));
            fixed.push((mu[k], w[k]));
        }
        Pair::Pooled(t) => push(t, (pm, w[j] + w[k])),
    }
    let level = common_level(&fixed, &upper, &lower, lo, hi);
    let clip = |x: T, t: bool| if t { x.max(level) } else { x.min(level) };
    let mut lambda: Vec<T> = (0..n).map(|i| clip(mu[i], is_top(i))).collect();
    match pair {
        Pair::Free => {}
        Pair::Forced => {
            lambda[j] = level;
            lambda[k] = level;
        }
        Pair::Pooled(t) => {
            let v = clip(pm, t);
            lambda[j] = v;
            lambda[k] = v;
        }
    }
    lambda
}

/// Sup-norm distance to the set of vectors where one category dominates the other.
pub(super) fn distance<T: Scalar>(cat: &[usize], lambda: &[T]) -> T {
    let ext = |c: usize| {
        let xs = lambda.iter().zip(cat).filter(|&(_, &ci)| ci == c).map(|(&x, _)| x);
        xs.fold((T::infinity(), T::neg_infinity()), |(a, b), x| (a.min(x), b.max(x)))
    };
    let (min0, max0) = ext(0);
    let (min1, max1) = ext(1);
    let gap = |top_min: T, bottom_max: T| {
        if top_min.is_finite() && bottom_max.is_finite() {
            (bottom_max - top_min).max(T::zero()) * T::half()
        } else {
            T::zero()
        }
    };
    gap(min0, max1).min(gap(min1, max0))
}
