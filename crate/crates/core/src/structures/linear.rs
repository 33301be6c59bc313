//! Linear oracle: weighted least squares, re-solved with the order constraint
//! as an equality when the free fit leaves `j` above `k`.

use crate::error::{BanditError, Result};
use crate::expfamily::Family;
use crate::linalg::solve_pivoted;
use crate::scalar::Scalar;

fn predict<T: Scalar>(arms: &[Vec<T>], eta: &[T]) -> Vec<T> {
    arms.iter().map(|a| a.iter().zip(eta).map(|(&x, &e)| x * e).sum()).collect()
}

fn normal_equations<T: Scalar>(arms: &[Vec<T>], y: &[T], w: &[T], extra: usize) -> (Vec<T>, Vec<T>) {
    let d = arms[0].len();
    let n = d + extra;
    let mut h = vec![T::zero(); n * n];
    let mut r = vec![T::zero(); n];
    for ((a, &yi), &wi) in arms.iter().zip(y).zip(w) {
        if wi == T::zero() {
            continue;
        }
        for p in 0..d {
            r[p] = r[p] + wi * yi * a[p];
            for q in 0..d {
                h[p * n + q] = h[p * n + q] + wi * a[p] * a[q];
            }
        }
    }
    (h, r)
}

pub(super) fn alt_min<T: Scalar>(family: &Family<T>, arms: &[Vec<T>], mu: &[T], w: &[T], j: usize, k: usize) -> Result<Vec<T>> {
    if !matches!(family, Family::Gaussian { .. }) {
        return Err(BanditError::InvalidArgument("the linear structure requires a gaussian family".into()));
    }
    let d = arms[0].len();
    let (h, r) = normal_equations(arms, mu, w, 0);
    let eta = solve_pivoted(h, r, d);
    let lambda = predict(arms, &eta);
    if lambda[k] >= lambda[j] {
        return Ok(lambda);
    }
    // Constrained fit on the hyperplane <a_k - a_j, eta> = 0.
    let n = d + 1;
    let (mut h, mut r) = normal_equations(arms, mu, w, 1);
    for p in 0..d {
        let c = arms[k][p] - arms[j][p];
        h[p * n + d] = c;
        h[d * n + p] = c;
    }
    r[d] = T::zero();
    let sol = solve_pivoted(h, r, n);
    let mut lambda = predict(arms, &sol[..d]);
    // The two predictions agree up to rounding; make the cell constraint exact.
    if lambda[k] < lambda[j] {
        let v = T::half() * (lambda[k] + lambda[j]);
        lambda[k] = v;
        lambda[j] = v;
    }
    Ok(lambda)
}

/// Sup-norm residual of the unweighted least-squares fit of `lambda`.
pub(super) fn residual<T: Scalar>(arms: &[Vec<T>], lambda: &[T]) -> T {
    let d = arms[0].len();
    let ones = vec![T::one(); lambda.len()];
    let (h, r) = normal_equations(arms, lambda, &ones, 0);
    let eta = solve_pivoted(h, r, d);
    predict(arms, &eta)
        .iter()
        .zip(lambda)
        .fold(T::zero(), |m, (&p, &l)| m.max((p - l).abs()))
}
