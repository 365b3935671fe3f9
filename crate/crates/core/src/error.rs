use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid lower parameter: {0}")]
    InvalidLowerParameter(String),

    #[error("series did not converge within {terms} terms")]
    NoConvergence { terms: usize },

    #[error("argument |x| = {0} exceeds the series evaluation envelope (50)")]
    ArgumentTooLarge(f64),

    #[error("non-terminating 1F1 requires floating mode")]
    RequiresFloatingMode,

    #[error("term z^{k}·u_n^({d}) is irreducible for this basis")]
    Irreducible { k: usize, d: usize },

    #[error("irreducible residual: {0}")]
    IrreducibleResidual(String),

    #[error("division by zero at n = {n}: {what}")]
    DivisionByZero { n: i64, what: String },

    #[error("family inapplicable: {0}")]
    FamilyInapplicable(String),

    #[error("resonant index n = {0}: leading recurrence coefficient vanishes")]
    ResonantIndex(i64),

    #[error("slow convergence: tail estimate {tail:e} above tolerance after {terms} terms")]
    SlowConvergence { tail: f64, terms: usize },

    #[error("domain error: {0}")]
    DomainError(String),

    #[error("evaluation point z = {0} coincides with the apparent singularity q/α")]
    ApparentSingularity(String),

    #[error("termination condition violated: {0}")]
    ConditionViolated(String),

    #[error("finite sum not terminated: {0}")]
    NotTerminated(String),

    #[error("root finding stalled after {iterations} iterations")]
    RootFindingStalled { iterations: usize },

    #[error("integration step underflow at z = {0}")]
    StepUnderflow(String),

    #[error("integration path passes too close to a singular point: {0}")]
    PathViolation(String),

    #[error("verification failed: {0}")]
    VerificationFailed(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::FamilyInapplicable(_)
            | Error::ConditionViolated(_)
            | Error::IrreducibleResidual(_)
            | Error::Irreducible { .. }
            | Error::InvalidLowerParameter(_)
            | Error::InvalidInput(_)
            | Error::RequiresFloatingMode => 2,
            Error::ResonantIndex(_) | Error::DivisionByZero { .. } => 3,
            Error::NoConvergence { .. }
            | Error::SlowConvergence { .. }
            | Error::RootFindingStalled { .. }
            | Error::StepUnderflow(_) => 4,
            Error::DomainError(_)
            | Error::ApparentSingularity(_)
            | Error::ArgumentTooLarge(_)
            | Error::PathViolation(_) => 5,
            Error::NotTerminated(_) | Error::VerificationFailed(_) => 6,
        }
    }
}
