use thiserror::Error;

/// Errors shared by every module in the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument that must be a positive integer was zero.
    #[error("{what} must be positive")]
    ZeroArgument { what: &'static str },

    /// A value required to be prime was not.
    #[error("{value} is not prime")]
    NotPrime { value: u64 },

    /// An argument fell outside the documented domain of an operation.
    #[error("{what} = {value} is outside the supported domain ({requirement})")]
    OutOfDomain {
        what: &'static str,
        value: u64,
        requirement: &'static str,
    },

    /// A half-open window `[lo, hi)` with `lo < 1` or `hi <= lo`.
    #[error("invalid window [{lo}, {hi}): need 1 <= lo < hi")]
    InvalidWindow { lo: u64, hi: u64 },

    /// A window wider than a single sieve segment may hold.
    #[error("window width {width} exceeds the per-call limit {limit}")]
    WindowTooWide { width: u64, limit: u64 },

    /// A numeric parameter failed validation.
    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    /// A checkpoint was produced under a different scan configuration.
    #[error(
        "checkpoint belongs to a different scan configuration \
         (expected digest {expected:#018x}, found {found:#018x})"
    )]
    CheckpointMismatch { expected: u64, found: u64 },

    /// A checkpoint file that does not decode.
    #[error("malformed checkpoint: {0}")]
    CheckpointFormat(String),

    /// Empty prime support for a coprime-gap computation.
    #[error("prime support is empty")]
    EmptySupport,

    /// A prime repeated in a coprime-gap support set.
    #[error("prime support contains {value} twice")]
    DuplicateSupport { value: u64 },

    /// The product of the support primes exceeds the residue-scan budget.
    #[error(
        "support modulus {modulus} exceeds the scan budget {budget} \
         (largest feasible primorial support: M <= {max_feasible_m})"
    )]
    BudgetExceeded {
        modulus: u128,
        budget: u64,
        max_feasible_m: u64,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
