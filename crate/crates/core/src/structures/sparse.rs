//! Sparse oracle: at most `s` arms above `gamma`, the rest exactly at `gamma`.

use super::{objective, pooled};
use crate::expfamily::Family;
use crate::scalar::Scalar;

/// Enumerates the three ways `j` and `k` can sit relative to the support; the
/// remaining support slots go to the arms that lose most by being set to `gamma`.
pub(super) fn alt_min<T: Scalar>(family: &Family<T>, mu: &[T], w: &[T], j: usize, k: usize, s: usize, gamma: T) -> Vec<T> {
    let n = mu.len();
    let lift = |x: T| x.max(gamma);

    // Candidate support members among the other arms, best first.
    let mut others: Vec<(T, usize)> = (0..n)
        .filter(|&i| i != j && i != k && mu[i] > gamma)
        .map(|i| (w[i] * family.divergence(mu[i], gamma), i))
        .collect();
    others.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("finite gains").then(a.1.cmp(&b.1)));

    let build = |pair: (T, T), slots: usize| -> Vec<T> {
        let mut lambda = vec![gamma; n];
        for &(_, i) in others.iter().take(slots) {
            lambda[i] = mu[i];
        }
        lambda[j] = pair.0;
        lambda[k] = pair.1;
        lambda
    };

    let mut candidates = Vec::with_capacity(3);
    // k and j both off the support.
    candidates.push(build((gamma, gamma), s));
    // k on the support, j off it.
    candidates.push(build((gamma, lift(mu[k])), s - 1));
    // both on the support.
    if s >= 2 {
        let (a, b) = (lift(mu[j]), lift(mu[k]));
        let pair = if b >= a {
            (a, b)
        } else {
            let v = lift(pooled(mu[j], w[j], mu[k], w[k]));
            (v, v)
        };
        candidates.push(build(pair, s - 2));
    }

    let mut best: Option<(T, Vec<T>)> = None;
    for lambda in candidates {
        let c = objective(family, mu, w, &lambda);
        if best.as_ref().is_none_or(|(b, _)| c < *b) {
            best = Some((c, lambda));
        }
    }
    best.expect("at least two candidates").1
}

/// Sup-norm distance to the sparse set.
pub(super) fn distance<T: Scalar>(lambda: &[T], s: usize, gamma: T) -> T {
    let below = lambda.iter().fold(T::zero(), |m, &x| m.max(gamma - x));
    let mut above: Vec<T> = lambda.iter().map(|&x| (x - gamma).max(T::zero())).collect();
    above.sort_by(|a, b| b.partial_cmp(a).expect("finite"));
    let excess = above.get(s).copied().unwrap_or(T::zero());
    below.max(excess)
}
