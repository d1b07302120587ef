use thiserror::Error;

/// Errors produced by the distribution toolkit and the solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("support mismatch: {0}")]
    SupportMismatch(String),

    #[error("infeasible transfer plan: {0}")]
    InfeasibleTransfer(String),

    #[error("virtual value undefined: zero mass at support index {0}")]
    ZeroMass(usize),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("index error: {0}")]
    Index(String),

    #[error("malformed linear program: {0}")]
    MalformedProgram(String),

    #[error("mechanism is not incentive compatible / individually rational: {0}")]
    NotTruthful(String),

    #[error("distribution is not regular; use the irregular solver")]
    Irregular,

    #[error("instance too large for exhaustive search: {0}")]
    TooLarge(String),

    #[error("duality certificate mismatch: primal {primal}, dual {dual}")]
    CertificateMismatch { primal: f64, dual: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("solver failure: {0}")]
    Solver(String),
}

pub type Result<T> = std::result::Result<T, Error>;
