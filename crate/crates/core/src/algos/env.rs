use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{BanditError, Result};
use crate::expfamily::Family;
use crate::scalar::Scalar;

/// Reward source with its own seeded stream.
#[derive(Debug, Clone)]
pub struct Environment<T> {
    means: Vec<T>,
    family: Family<T>,
    rng: ChaCha8Rng,
}

impl<T: Scalar> Environment<T> {
    pub fn new(means: Vec<T>, family: Family<T>, seed: u64) -> Result<Self> {
        if means.is_empty() {
            return Err(BanditError::InvalidArgument("environment without arms".into()));
        }
        Ok(Environment { means, family, rng: ChaCha8Rng::seed_from_u64(seed) })
    }

    pub fn means(&self) -> &[T] {
        &self.means
    }

    pub fn pull(&mut self, arm: usize) -> Result<T> {
        let m = *self
            .means
            .get(arm)
            .ok_or_else(|| BanditError::InvalidArgument(format!("arm {arm} out of range")))?;
        self.family.sample(m, &mut self.rng)
    }
}
