use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("integrator step size underflow at t = {t:.6e} s (h = {h:.3e})")]
    StepUnderflow { t: f64, h: f64 },

    #[error("state invariant violated: {0}")]
    InvariantViolation(String),

    #[error("fit did not converge after {0} iterations")]
    NoConvergence(usize),

    #[error("no minima found in rocking curve")]
    NoModes,

    #[error("out of modeled scope: {0}")]
    OutOfScope(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("missing data: {0}")]
    MissingData(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the CLI. 0 is success; validation, convergence
    /// and invariant failures get distinct codes.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Invalid(_) | Error::Config(_) | Error::MissingData(_)
            | Error::GridMismatch(_) | Error::OutOfScope(_) => 2,
            Error::NoConvergence(_) | Error::NoModes => 3,
            Error::StepUnderflow { .. } | Error::InvariantViolation(_) => 4,
            Error::Io(_) => 1,
        }
    }
}
