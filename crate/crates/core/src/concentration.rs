//! Concentration thresholds for the explore/exploit test and the confidence
//! intervals used by the optimistic gain estimates.

use crate::error::{BanditError, Result};
use crate::expfamily::Family;
use crate::scalar::Scalar;

/// Solves `y - ln y = x` for `y >= 1`.
///
/// Newton's method started from `x + ln x`; the residual is driven to
/// `1e-12` (or a few ulps of `x` when the scalar type cannot reach that).
pub fn w_bar<T: Scalar>(x: T) -> Result<T> {
    if !(x > T::one()) || !x.is_finite() {
        return Err(BanditError::domain("w_bar argument", x));
    }
    let tol = T::lit(1e-12).max(T::lit(4.0) * T::epsilon() * x);
    let mut y = x + x.ln();
    for _ in 0..100 {
        let r = y - y.ln() - x;
        if r.abs() <= tol {
            break;
        }
        let next = y - r / (T::one() - y.recip());
        // Stay on the y >= 1 branch.
        y = if next > T::one() { next } else { T::half() * (y + T::one()) };
    }
    Ok(y)
}

/// Deviation threshold `beta(t, delta)` for the self-normalised sum
/// `sum_k N^k d(mu_hat^k, mu^k)` over `k` arms.
pub fn beta<T: Scalar>(t: u64, delta: T, k: usize) -> Result<T> {
    if t < 2 {
        return Err(BanditError::domain("beta round index", t as f64));
    }
    if !(delta > T::zero() && delta < T::one()) {
        return Err(BanditError::domain("beta confidence level", delta));
    }
    if k == 0 {
        return Err(BanditError::InvalidArgument("beta needs at least one arm".into()));
    }
    let e = T::one().exp();
    let kk = T::from_usize_lossy(k);
    let two_k = T::two() * kk;
    let tt = T::lit(t as f64);
    let arg = (e / delta).ln() / two_k + T::half() * (T::lit(8.0) * e * kk * tt.ln()).ln();
    if !(arg > T::one()) {
        return Err(BanditError::domain("beta: w_bar argument", arg));
    }
    Ok(two_k * w_bar(arg)?)
}

/// Explore/exploit threshold `f(t) = beta(t, 1 / (t ln t))`, with `t` raised to 3
/// where the confidence rule is undefined.
pub fn exploit_threshold<T: Scalar>(t: u64, k: usize) -> Result<T> {
    let t = t.max(3);
    let tt = T::lit(t as f64);
    beta(t, (tt * tt.ln()).recip(), k)
}

/// Width rule for exploration confidence intervals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CiMode {
    /// `(1 + eta) [ln n + ln(2 K^2 ln^2 t / ln(1 + eta))]`.
    Theory,
    /// `ln max(n, 2)`.
    #[default]
    Experiment,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdConfig<T> {
    pub k: usize,
    pub eta: T,
    pub ci_mode: CiMode,
}

impl<T: Scalar> ThresholdConfig<T> {
    pub fn new(k: usize, eta: T, ci_mode: CiMode) -> Result<Self> {
        if k < 2 {
            return Err(BanditError::InvalidArgument(format!("threshold config needs K >= 2, got {k}")));
        }
        if !(eta > T::zero()) || !eta.is_finite() {
            return Err(BanditError::domain("eta", eta));
        }
        Ok(ThresholdConfig { k, eta, ci_mode })
    }

    pub fn with_defaults(k: usize) -> Result<Self> {
        Self::new(k, T::half(), CiMode::default())
    }
}

/// Exploration threshold `g_t(n)`, floored at zero.
pub fn g_threshold<T: Scalar>(cfg: &ThresholdConfig<T>, t: u64, n: T) -> T {
    let v = match cfg.ci_mode {
        CiMode::Experiment => n.max(T::two()).ln(),
        CiMode::Theory => {
            let lt = T::lit(t.max(2) as f64).ln();
            let kk = T::from_usize_lossy(cfg.k);
            let inner = T::two() * kk * kk * lt * lt / cfg.eta.ln_1p();
            (T::one() + cfg.eta) * (n.ln() + inner.ln())
        }
    };
    if v > T::zero() {
        v
    } else {
        T::zero()
    }
}

/// Interval of means `x` with `count * d(mu_hat, x) <= threshold`.
pub fn confidence_interval<T: Scalar>(family: &Family<T>, mu_hat: T, count: T, threshold: T) -> Result<(T, T)> {
    Ok((
        family.kl_inverse_lower(mu_hat, threshold, count)?,
        family.kl_inverse_upper(mu_hat, threshold, count)?,
    ))
}
