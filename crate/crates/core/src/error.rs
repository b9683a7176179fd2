use thiserror::Error;

use crate::partition::Partition;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input: wrong shape, non-Hermitian matrix, bad file contents.
    #[error("validation error: {0}")]
    Validation(String),

    /// Input outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("matrix is not positive semi-definite (min eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("matrix is singular (min |eigenvalue| {min_abs_eigenvalue:e})")]
    Singular { min_abs_eigenvalue: f64 },

    /// A hypothesis of the theorem being exercised does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// The requested computation exceeds the configured enumeration budget.
    #[error("resource limit: {0}")]
    Resource(String),

    /// A randomized partition search ran out of budget. The best partition
    /// seen is returned; existence is still guaranteed by the theory.
    #[error("partition search failed: best max-part value {best_value:.6} exceeds bound {bound:.6}")]
    PartitionSearchFailed {
        best: Partition,
        best_value: f64,
        bound: f64,
    },

    #[error("signing search failed: best lambda_max {best_lambda_max:.6} exceeds bound {bound:.6}")]
    SigningSearchFailed {
        best_signs: Vec<i8>,
        best_lambda_max: f64,
        bound: f64,
    },

    /// A quantity that the theory guarantees was not observed numerically.
    #[error("verification failed: {0}")]
    Verification(String),
}

impl Error {
    /// True for failures caused by budgets or unlucky searches rather than
    /// bad input or violated theory.
    pub fn is_search_or_resource(&self) -> bool {
        matches!(
            self,
            Error::Resource(_) | Error::PartitionSearchFailed { .. } | Error::SigningSearchFailed { .. }
        )
    }
}
