use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("chain length must be even and at least 2, got {0}")]
    InvalidSize(usize),

    #[error("invalid coupling: {0}")]
    InvalidCoupling(String),

    #[error("probability {0} outside [0, 1]")]
    ProbabilityOutOfRange(f64),

    #[error("(zeta = {zeta}, x = {x}) lies outside the support zeta^2 + x^2 >= 1")]
    OutOfSupport { zeta: f64, x: f64 },

    #[error("cos Φ = {0} outside [-1, 1] beyond rounding tolerance")]
    AngleDomain(f64),

    #[error("finite-difference stencil around x = {x} crosses the critical point {critical}")]
    StencilCrossesCritical { x: f64, critical: f64 },

    #[error("quadrature did not reach tolerance {tol:e} within {subdivisions} subdivisions (estimated error {estimate:e})")]
    QuadratureNotConverged {
        tol: f64,
        estimate: f64,
        subdivisions: usize,
    },

    #[error("eigensolver did not converge: residual {residual:e} after {iterations} iterations")]
    EigensolverNotConverged { residual: f64, iterations: usize },

    #[error("state vector has length {got}, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("state is not in the {0} fermion-parity sector")]
    WrongSector(&'static str),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("oracle disagreement: {0}")]
    OracleDisagreement(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code used by the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_)
            | Error::InvalidSize(_)
            | Error::InvalidCoupling(_)
            | Error::Json(_)
            | Error::Io(_) => 2,
            Error::OracleDisagreement(_) => 4,
            _ => 3,
        }
    }
}
