//! Lipschitz oracle: projected Newton on the polytope
//! `{|lambda^i - lambda^{i+1}| <= L, lambda^j <= lambda^k}` intersected with the
//! hull of the observed means. Each step solves a diagonal quadratic program
//! exactly; for Gaussian arms the first step is already optimal.

use super::pooled;
use crate::expfamily::Family;
use crate::linalg::{diag_qp, Halfspace};
use crate::scalar::Scalar;

const MAX_ITER: usize = 100_000;

pub(super) fn alt_min<T: Scalar>(family: &Family<T>, mu: &[T], w: &[T], j: usize, k: usize, l: T) -> Vec<T> {
    let n = mu.len();
    let lo = mu.iter().fold(T::infinity(), |a, &b| a.min(b));
    let hi = mu.iter().fold(T::neg_infinity(), |a, &b| a.max(b));

    // Zero-weight coordinates get a vanishing pull towards their observation so
    // that the minimiser is unique and stays close to it.
    let curvature = T::one() / family.sub_gaussian_variance();
    let wmax = w.iter().fold(T::zero(), |a, &b| a.max(b));
    let tau = if wmax > T::zero() { wmax * curvature * T::lit(1e-9) } else { curvature };
    let f = |x: &[T]| -> T {
        (0..n)
            .map(|i| {
                if w[i] > T::zero() {
                    w[i] * family.divergence(mu[i], x[i])
                } else {
                    T::half() * tau * (x[i] - mu[i]) * (x[i] - mu[i])
                }
            })
            .sum()
    };

    let mut x = vec![pooled(mu[j], w[j], mu[k], w[k]).max(lo).min(hi); n];
    let mut fx = f(&x);
    for _ in 0..MAX_ITER {
        let mut h = vec![T::zero(); n];
        let mut g = vec![T::zero(); n];
        for i in 0..n {
            if w[i] > T::zero() {
                h[i] = (w[i] * family.divergence_dyy(mu[i], x[i])).max(tau);
                g[i] = w[i] * family.divergence_dy(mu[i], x[i]);
            } else {
                h[i] = tau;
                g[i] = tau * (x[i] - mu[i]);
            }
        }
        // Constraints on the step s: C (x + s) <= d.
        let mut cons = Vec::with_capacity(3 * n);
        for i in 0..n.saturating_sub(1) {
            let diff = x[i] - x[i + 1];
            cons.push(Halfspace::new(vec![(i, T::one()), (i + 1, -T::one())], l - diff));
            cons.push(Halfspace::new(vec![(i, -T::one()), (i + 1, T::one())], l + diff));
        }
        cons.push(Halfspace::new(vec![(j, T::one()), (k, -T::one())], x[k] - x[j]));
        for i in 0..n {
            cons.push(Halfspace::new(vec![(i, T::one())], hi - x[i]));
            cons.push(Halfspace::new(vec![(i, -T::one())], x[i] - lo));
        }
        for c in cons.iter_mut() {
            c.rhs = c.rhs.max(T::zero());
        }
        let step = diag_qp(&h, &g, &cons, vec![T::zero(); n]);

        let mut t = T::one();
        let mut accepted = None;
        for _ in 0..60 {
            let cand: Vec<T> = (0..n).map(|i| x[i] + t * step[i]).collect();
            let fc = f(&cand);
            if fc <= fx {
                accepted = Some((cand, fc));
                break;
            }
            t = t * T::half();
        }
        let Some((cand, fc)) = accepted else { break };
        let decrease = fx - fc;
        x = cand;
        fx = fc;
        if decrease <= T::lit(1e-12) * (T::one() + fx.abs()) {
            break;
        }
    }
    if x[k] < x[j] {
        let v = T::half() * (x[k] + x[j]);
        x[k] = v;
        x[j] = v;
    }
    x
}

/// Sup-norm distance to the Lipschitz set.
pub(super) fn distance<T: Scalar>(lambda: &[T], l: T) -> T {
    let n = lambda.len();
    let mut worst = T::zero();
    for a in 0..n {
        for b in a + 1..n {
            let excess = (lambda[a] - lambda[b]).abs() - l * T::from_usize_lossy(b - a);
            worst = worst.max(excess);
        }
    }
    worst * T::half()
}
