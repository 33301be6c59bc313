//! Structured stochastic multi-armed bandits.
//!
//! The library computes the asymptotic regret lower bound of a structured
//! bandit as the value of a zero-sum game, and implements bandit algorithms
//! that play that game online (`SpK`, `SpLambda`), alongside the OSSB and
//! kl-UCB baselines and a reproducible experiment harness.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the `*64`
//! aliases below fix the common double-precision case.

pub mod algos;
pub mod concentration;
pub mod error;
pub mod expfamily;
pub mod harness;
pub mod learners;
mod linalg;
pub mod saddle;
pub mod scalar;
pub mod structures;

pub use error::{BanditError, Result};
pub use expfamily::Family;
pub use scalar::Scalar;
pub use structures::{AltMin, Structure, StructureKind};

pub type Family64 = Family<f64>;
pub type Structure64 = Structure<f64>;
