use thiserror::Error;

/// Errors shared by all modules of the crate.
///
/// A failed inequality certificate is *not* an error: operations that test
/// inequalities return their verdict in a report. Errors are reserved for
/// violated preconditions, construction mistakes and solver breakdowns.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("precondition failed: {0}")]
    PreconditionFailed(String),

    #[error("linear solve failed: {0}")]
    SolveFailed(String),

    #[error("iteration stagnated: {0}")]
    Stagnation(String),

    #[error("discretization failure: {0}")]
    DiscretizationFailure(String),

    #[error("unknown counterexample: {0}")]
    UnknownCounterexample(String),
}

pub type Result<T> = std::result::Result<T, Error>;
