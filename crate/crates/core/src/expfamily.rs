//! One-parameter exponential families used as arm reward models.
//!
//! Arms are parameterised by their mean. The divergence `d(x, y)` is the
//! Kullback-Leibler divergence from the distribution with mean `x` to the one
//! with mean `y`. Both families here are sub-Gaussian, so
//! `d(x, y) >= (x - y)^2 / (2 sigma^2)` with the family's variance proxy.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{BanditError, Result};
use crate::scalar::Scalar;

/// Bernoulli means are clamped into `[EDGE, 1 - EDGE]` before evaluating logs.
pub const BERNOULLI_EDGE: f64 = 1e-12;

/// Reward distribution family shared by all arms of an instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family<T> {
    /// Gaussian with known variance.
    Gaussian { variance: T },
    /// Bernoulli rewards in {0, 1}.
    Bernoulli,
}

impl<T: Scalar> Family<T> {
    pub fn gaussian(variance: T) -> Result<Self> {
        if !(variance > T::zero()) || !variance.is_finite() {
            return Err(BanditError::domain("gaussian variance", variance));
        }
        Ok(Family::Gaussian { variance })
    }

    pub fn bernoulli() -> Self {
        Family::Bernoulli
    }

    /// Variance proxy `sigma^2` (1/4 for Bernoulli).
    pub fn sub_gaussian_variance(&self) -> T {
        match *self {
            Family::Gaussian { variance } => variance,
            Family::Bernoulli => T::lit(0.25),
        }
    }

    /// Closure of the mean parameter space.
    pub fn mean_bounds(&self) -> (T, T) {
        match self {
            Family::Gaussian { .. } => (T::neg_infinity(), T::infinity()),
            Family::Bernoulli => (T::zero(), T::one()),
        }
    }

    /// Whether `x` is an admissible argument for the divergence (closure of the
    /// parameter space; Bernoulli endpoints are clamped when evaluated).
    pub fn admits(&self, x: T) -> bool {
        match self {
            Family::Gaussian { .. } => x.is_finite(),
            Family::Bernoulli => x >= T::zero() && x <= T::one(),
        }
    }

    fn check(&self, what: &'static str, x: T) -> Result<()> {
        if self.admits(x) {
            Ok(())
        } else {
            Err(BanditError::domain(what, x))
        }
    }

    #[inline]
    fn clamp_bernoulli(x: T) -> T {
        let e = T::lit(BERNOULLI_EDGE);
        x.max(e).min(T::one() - e)
    }

    /// Checked divergence `d(x, y)`.
    pub fn kl(&self, x: T, y: T) -> Result<T> {
        self.check("kl first argument", x)?;
        self.check("kl second argument", y)?;
        Ok(self.divergence(x, y))
    }

    /// Divergence `d(x, y)` without domain checks. Bernoulli arguments are
    /// clamped, so out-of-range inputs never produce infinities.
    #[inline]
    pub fn divergence(&self, x: T, y: T) -> T {
        match *self {
            Family::Gaussian { variance } => {
                let d = x - y;
                d * d / (T::two() * variance)
            }
            Family::Bernoulli => {
                if x == y {
                    return T::zero();
                }
                let x = Self::clamp_bernoulli(x);
                let y = Self::clamp_bernoulli(y);
                let v = x * (x / y).ln() + (T::one() - x) * ((T::one() - x) / (T::one() - y)).ln();
                v.max(T::zero())
            }
        }
    }

    /// Partial derivative of `d(x, y)` in `y`.
    #[inline]
    pub fn divergence_dy(&self, x: T, y: T) -> T {
        match *self {
            Family::Gaussian { variance } => (y - x) / variance,
            Family::Bernoulli => {
                let x = Self::clamp_bernoulli(x);
                let y = Self::clamp_bernoulli(y);
                (y - x) / (y * (T::one() - y))
            }
        }
    }

    /// Second partial derivative of `d(x, y)` in `y`.
    #[inline]
    pub fn divergence_dyy(&self, x: T, y: T) -> T {
        match *self {
            Family::Gaussian { variance } => T::one() / variance,
            Family::Bernoulli => {
                let x = Self::clamp_bernoulli(x);
                let y = Self::clamp_bernoulli(y);
                x / (y * y) + (T::one() - x) / ((T::one() - y) * (T::one() - y))
            }
        }
    }

    /// Draws one reward from the arm with the given mean.
    pub fn sample<R: Rng + ?Sized>(&self, mean: T, rng: &mut R) -> Result<T> {
        match *self {
            Family::Gaussian { variance } => {
                if !mean.is_finite() {
                    return Err(BanditError::domain("gaussian mean", mean));
                }
                let z: f64 = rng.sample(StandardNormal);
                Ok(mean + variance.sqrt() * T::lit(z))
            }
            Family::Bernoulli => {
                if !(mean > T::zero() && mean < T::one()) {
                    return Err(BanditError::domain("bernoulli mean", mean));
                }
                let u: f64 = rng.random();
                Ok(if u < mean.as_f64() { T::one() } else { T::zero() })
            }
        }
    }

    /// Largest `x` with `count * d(mu_hat, x) <= threshold`.
    pub fn kl_inverse_upper(&self, mu_hat: T, threshold: T, count: T) -> Result<T> {
        self.kl_inverse(mu_hat, threshold, count, true)
    }

    /// Smallest `x` with `count * d(mu_hat, x) <= threshold`.
    pub fn kl_inverse_lower(&self, mu_hat: T, threshold: T, count: T) -> Result<T> {
        self.kl_inverse(mu_hat, threshold, count, false)
    }

    fn kl_inverse(&self, mu_hat: T, threshold: T, count: T, upper: bool) -> Result<T> {
        self.check("confidence centre", mu_hat)?;
        if !(threshold >= T::zero()) || !threshold.is_finite() {
            return Err(BanditError::domain("confidence threshold", threshold));
        }
        if !(count > T::zero()) || !count.is_finite() {
            return Err(BanditError::domain("pull count", count));
        }
        if threshold == T::zero() {
            return Ok(mu_hat);
        }
        match *self {
            Family::Gaussian { variance } => {
                let radius = (T::two() * variance * threshold / count).sqrt();
                Ok(if upper { mu_hat + radius } else { mu_hat - radius })
            }
            Family::Bernoulli => {
                let level = threshold / count;
                let (edge, mut inside, mut outside) = if upper {
                    (T::one(), mu_hat, T::one())
                } else {
                    (T::zero(), mu_hat, T::zero())
                };
                if self.divergence(mu_hat, edge) <= level {
                    return Ok(edge);
                }
                // Bisect to machine precision; this is well inside the 1e-9 contract.
                for _ in 0..200 {
                    let mid = T::half() * (inside + outside);
                    if mid == inside || mid == outside {
                        break;
                    }
                    if self.divergence(mu_hat, mid) <= level {
                        inside = mid;
                    } else {
                        outside = mid;
                    }
                }
                Ok(inside)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn gauss() -> Family<f64> {
        Family::gaussian(1.0).unwrap()
    }

    #[test]
    fn gaussian_closed_form() {
        assert_abs_diff_eq!(gauss().kl(0.0, 1.0).unwrap(), 0.5, epsilon = 1e-15);
        assert_eq!(gauss().kl(0.3, 0.3).unwrap(), 0.0);
        assert_eq!(Family::<f64>::bernoulli().kl(0.3, 0.3).unwrap(), 0.0);
    }

    #[test]
    fn bernoulli_matches_log_oracle() {
        // 0.5 ln 2 + 0.5 ln(2/3), evaluated term by term.
        let oracle = 0.5 * 2f64.ln() + 0.5 * (2.0f64 / 3.0).ln();
        assert_abs_diff_eq!(oracle, 0.143841036225890, epsilon = 1e-14);
        let v = Family::<f64>::bernoulli().kl(0.5, 0.25).unwrap();
        assert_abs_diff_eq!(v, oracle, epsilon = 1e-14);
    }

    #[test]
    fn bernoulli_rejects_out_of_range_and_clamps_edges() {
        let b = Family::<f64>::bernoulli();
        assert!(matches!(b.kl(1.2, 0.5), Err(BanditError::Domain { .. })));
        assert!(matches!(b.kl(0.5, -0.1), Err(BanditError::Domain { .. })));
        let v = b.kl(0.0, 0.5).unwrap();
        assert!(v.is_finite());
        assert_abs_diff_eq!(v, 2f64.ln(), epsilon = 1e-9);
        assert!(b.kl(0.5, 1.0).unwrap().is_finite());
    }

    #[test]
    fn gaussian_rejects_bad_variance() {
        assert!(Family::gaussian(0.0).is_err());
        assert!(Family::gaussian(-1.0f64).is_err());
    }

    #[test]
    fn sample_support_and_determinism() {
        let b = Family::<f64>::bernoulli();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let x = b.sample(1.0 - 1e-12, &mut rng).unwrap();
            assert!(x == 0.0 || x == 1.0);
        }
        assert!(b.sample(1.0, &mut rng).is_err());
        assert!(gauss().sample(f64::NAN, &mut rng).is_err());

        let draw = |seed| {
            let mut r = ChaCha8Rng::seed_from_u64(seed);
            (0..50).map(|_| gauss().sample(0.0, &mut r).unwrap()).collect::<Vec<_>>()
        };
        assert_eq!(draw(11), draw(11));
        assert_ne!(draw(11), draw(12));
    }

    #[test]
    fn gaussian_sample_mean_within_clt_band() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let n = 100_000;
        let mean: f64 = (0..n).map(|_| gauss().sample(0.0, &mut rng).unwrap()).sum::<f64>() / n as f64;
        // 3 sigma / sqrt(n) ~ 0.0095 < 0.02
        assert!(mean.abs() < 0.02, "mean {mean}");
    }

    #[test]
    fn inverse_closed_forms() {
        assert_abs_diff_eq!(gauss().kl_inverse_upper(0.0, 2.0, 4.0).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(gauss().kl_inverse_lower(0.0, 2.0, 4.0).unwrap(), -1.0, epsilon = 1e-15);
        let b = Family::<f64>::bernoulli();
        assert_eq!(b.kl_inverse_upper(0.3, 0.0, 5.0).unwrap(), 0.3);
        assert_eq!(gauss().kl_inverse_lower(0.7, 0.0, 5.0).unwrap(), 0.7);
    }

    #[test]
    fn bernoulli_inverse_against_bisection_oracle() {
        // Oracle: plain bisection on the closed-form kl, independent of the library path.
        let kl = |x: f64, y: f64| x * (x / y).ln() + (1.0 - x) * ((1.0 - x) / (1.0 - y)).ln();
        let level = 0.1438 * 4.0 / 4.0;
        let (mut lo, mut hi) = (0.5, 1.0 - 1e-15);
        for _ in 0..100 {
            let m = 0.5 * (lo + hi);
            if kl(0.5, m) <= level {
                lo = m
            } else {
                hi = m
            }
        }
        let b = Family::<f64>::bernoulli();
        let up = b.kl_inverse_upper(0.5, 0.1438 * 4.0, 4.0).unwrap();
        let down = b.kl_inverse_lower(0.5, 0.1438 * 4.0, 4.0).unwrap();
        assert_abs_diff_eq!(up, lo, epsilon = 1e-9);
        assert_abs_diff_eq!(up, 0.75, epsilon = 1e-3);
        assert_abs_diff_eq!(down, 1.0 - up, epsilon = 1e-9);
    }

    #[test]
    fn bernoulli_inverse_saturates_at_edge() {
        let b = Family::<f64>::bernoulli();
        assert_eq!(b.kl_inverse_upper(0.9, 100.0, 1.0).unwrap(), 1.0);
        assert_eq!(b.kl_inverse_lower(0.1, 100.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn works_in_single_precision() {
        let g = Family::<f32>::gaussian(1.0).unwrap();
        assert!((g.kl(0.0, 1.0).unwrap() - 0.5).abs() < 1e-7);
        let b = Family::<f32>::bernoulli();
        let up = b.kl_inverse_upper(0.5, 0.5754, 4.0).unwrap();
        assert!((up - 0.75).abs() < 1e-3);
    }

    fn family_strategy() -> impl Strategy<Value = Family<f64>> {
        prop_oneof![
            (0.1f64..4.0).prop_map(|v| Family::gaussian(v).unwrap()),
            Just(Family::Bernoulli),
        ]
    }

    fn point(f: &Family<f64>) -> BoxedStrategy<f64> {
        match f {
            Family::Gaussian { .. } => (-5.0f64..5.0).boxed(),
            Family::Bernoulli => (0.001f64..0.999).boxed(),
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(2000))]

        #[test]
        fn pinsker_type_lower_bound(
            (f, x, y) in family_strategy().prop_flat_map(|f| (Just(f), point(&f), point(&f)))
        ) {
            let s2 = f.sub_gaussian_variance();
            let d = f.kl(x, y).unwrap();
            prop_assert!(d >= 0.0);
            prop_assert!(d >= (x - y).powi(2) / (2.0 * s2) - 1e-12);
        }

        #[test]
        fn convex_in_second_argument(
            (f, x, y) in family_strategy().prop_flat_map(|f| (Just(f), point(&f), point(&f)))
        ) {
            let h = match f { Family::Bernoulli => 1e-3, _ => 1e-2 };
            let (y0, y1, y2) = (y - h, y, y + h);
            prop_assume!(matches!(f, Family::Gaussian { .. }) || (y0 > 0.0 && y2 < 1.0));
            let second = f.divergence(x, y0) - 2.0 * f.divergence(x, y1) + f.divergence(x, y2);
            prop_assert!(second >= -1e-10);
        }

        #[test]
        fn inverse_round_trips(
            (f, mu) in family_strategy().prop_flat_map(|f| (Just(f), point(&f))),
            thr in 0.0f64..5.0,
            count in 1.0f64..500.0,
        ) {
            let up = f.kl_inverse_upper(mu, thr, count).unwrap();
            let lo = f.kl_inverse_lower(mu, thr, count).unwrap();
            prop_assert!(lo <= mu && mu <= up);
            let (a, b) = f.mean_bounds();
            // Either the level is hit, or it is bracketed within 1e-12 in mean space
            // (Bernoulli is too steep near the edges for the former).
            let hits = |x: f64, outward: f64| {
                let g = |y: f64| count * f.kl(mu, y.clamp(a, b)).unwrap() - thr;
                g(x).abs() <= 1e-8 || (g(x - outward * 1e-12) <= 1e-8 && g(x + outward * 1e-12) >= -1e-8)
            };
            if up < b {
                prop_assert!(hits(up, 1.0));
            }
            if lo > a {
                prop_assert!(hits(lo, -1.0));
            }
        }
    }
}
