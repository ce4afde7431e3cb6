use thiserror::Error;

/// Errors raised by the laboratory.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid range: {0}")]
    InvalidRange(String),

    #[error("integration diverged at s = {s}")]
    IntegrationDiverged { s: f64 },

    #[error("only {found} zeros found before the ceiling s = {ceiling}")]
    ZerosExhausted { found: usize, ceiling: f64 },

    #[error("tail correction is {fraction:.3e} of the integral; enlarge the tabulation radius")]
    TailTooFat { fraction: f64 },

    #[error("argument {0} lies outside the tabulated profile")]
    OutOfTable(f64),

    #[error("requested sigma = {sigma} lies outside the psi window [{lo}, {hi}]")]
    OutOfWindow { sigma: f64, lo: f64, hi: f64 },

    #[error("field violates an invariant: {0}")]
    InvalidField(String),

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("no transition between outcomes in the amplitude range")]
    NoTransitionInRange,

    #[error("the solution never left the epsilon-neighbourhood before t_final")]
    NoExit,

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
