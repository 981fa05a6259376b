use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("jet division by a quantity with constant term {0:.3e}")]
    DivisionByZeroJet(f64),
    #[error("quadrature did not converge (estimated error {0:.3e})")]
    NoConvergence(f64),
    #[error("Laurent fit inconsistent: radius-halving discrepancy {0:.3e}")]
    InconsistentFit(f64),
    #[error("unsupported branch point configuration: {0}")]
    UnsupportedConfiguration(String),
    #[error("A-period matrix is ill-conditioned (condition number {0:.3e})")]
    SingularPeriods(f64),
    #[error("integration path passes within {0:.3e} of a branch point")]
    PathThroughBranchPoint(f64),
    #[error("cache hash mismatch: stored {stored}, expected {expected}")]
    HashMismatch { stored: String, expected: String },
    #[error("cache file not found: {0}")]
    NotFound(String),
    #[error("theta vanishes unexpectedly (|theta| = {0:.3e})")]
    ThetaZero(f64),
    #[error("Den vanishes (|Den| = {value:.3e}); coincident l at indices {indices:?}")]
    DenZero { value: f64, indices: Vec<usize> },
    #[error("constraint violated: residual {0:.3e}")]
    ConstraintViolated(f64),
    #[error("degenerate moment constraints: kernel dimension {0}")]
    DegenerateConstraints(usize),
    #[error("interpolation basis ill-conditioned (condition number {0:.3e})")]
    IllConditionedBasis(f64),
    #[error("Mobius map sends l_{0} to infinity")]
    PoleHit(usize),
    #[error("jet order {have} too low, need {need}")]
    JetOrderTooLow { have: usize, need: usize },
    #[error("l_{0} is zero")]
    ZeroEll(usize),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("io: {0}")]
    Io(String),
}

impl Error {
    /// True for failures of the numerics, as opposed to bad input.
    pub fn is_numeric(&self) -> bool {
        !matches!(
            self,
            Error::Invalid(_) | Error::Io(_) | Error::UnsupportedConfiguration(_) | Error::HashMismatch { .. } | Error::NotFound(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
