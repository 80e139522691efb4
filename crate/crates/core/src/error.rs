use thiserror::Error;

/// Errors raised anywhere in the engine.
///
/// Variants are grouped by the exit code the command-line front end maps
/// them to: input errors, precision/depth exhaustion, and internal
/// consistency failures.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error at `{token}`: {message}")]
    Parse { token: String, message: String },
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("modulus {0} is reducible over the prime field")]
    ReducibleModulus(String),
    #[error("invalid ring descriptor: {0}")]
    InvalidRing(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("exponent {0} lies outside the exponent lattice")]
    LatticeViolation(String),
    #[error("negative exponent in a ring without Laurent monomials")]
    NegativeExponent,
    #[error("perfection depth exhausted: {0}")]
    DepthExhausted(String),
    #[error("no p-th root: {0}")]
    NoRoot(String),
    #[error("element is not a unit: {0}")]
    NotAUnit(String),
    #[error("operand mismatch: {0}")]
    Mismatch(String),
    #[error("structural polynomial recursion did not divide exactly at level {level}")]
    IntegralityViolation { level: usize },
    #[error("level {level} exceeds the configured maximum {max}")]
    LevelTooLarge { level: usize, max: usize },
    #[error("term budget exceeded: {terms} terms (budget {budget})")]
    TermBudgetExceeded { terms: u128, budget: usize },
    #[error("ghost vector is not in the image of the ghost map at index {0}")]
    NotInGhostImage(usize),
    #[error("not divisible: {0}")]
    NotDivisible(String),
    #[error("assignment does not respect the relation {0}")]
    RelationViolated(String),
    #[error("polynomial is not Eisenstein: {0}")]
    NotEisenstein(String),
    #[error("sequence is not compatible under the p-th power map at index {0}")]
    IncompatibleSequence(usize),
    #[error("derivative is not a unit: {0}")]
    DerivativeNotUnit(String),
    #[error("Newton iteration stalled: {0}")]
    NoConvergence(String),
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn parse(token: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            token: token.into(),
            message: message.into(),
        }
    }

    /// True for failures caused by running out of perfection depth,
    /// precision, or a size budget rather than by bad input.
    pub fn is_exhaustion(&self) -> bool {
        matches!(
            self,
            Error::DepthExhausted(_)
                | Error::NoRoot(_)
                | Error::TermBudgetExceeded { .. }
                | Error::BudgetExceeded(_)
                | Error::LevelTooLarge { .. }
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
