use thiserror::Error;

/// Errors raised by the bandit library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum BanditError {
    #[error("domain error: {what} = {value} is outside the admissible range")]
    Domain { what: &'static str, value: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("cell {{lambda[{k}] >= lambda[{j}]}} of the structure is empty")]
    InfeasibleCell { j: usize, k: usize },

    #[error("alternative set of arm {j} is empty: every cell is infeasible")]
    AllCellsInfeasible { j: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("resource limit: {0}")]
    Resource(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl BanditError {
    pub(crate) fn domain<T: num_traits::ToPrimitive>(what: &'static str, value: T) -> Self {
        BanditError::Domain {
            what,
            value: value.to_f64().unwrap_or(f64::NAN),
        }
    }

    /// True for errors caused by bad user input rather than a failing computation.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            BanditError::Config(_)
                | BanditError::InvalidArgument(_)
                | BanditError::DimensionMismatch { .. }
                | BanditError::Domain { .. }
        )
    }
}

impl From<std::io::Error> for BanditError {
    fn from(e: std::io::Error) -> Self {
        BanditError::Io(e.to_string())
    }
}

pub type Result<T, E = BanditError> = std::result::Result<T, E>;
