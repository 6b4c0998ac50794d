use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("time {t} lies outside the schedule domain [{start}, {end}]")]
    OutOfDomain { t: f64, start: f64, end: f64 },

    #[error("missing schedule symbol `{0}`")]
    MissingSymbol(String),

    #[error("invalid subspace layout: {0}")]
    Layout(String),

    #[error("singular drive at t = {t}: {reason}")]
    Singular { t: f64, reason: String },

    #[error("schedule `{0}` must be constant for the synthesized passages to exist")]
    NonConstant(String),

    #[error("index out of range: {0}")]
    OutOfRange(String),

    #[error("Hamiltonian is not Hermitian at t = {t} (relative deviation {deviation:e})")]
    NonHermitian { t: f64, deviation: f64 },

    #[error("Lindblad step too coarse: trace drift {drift:e} at t = {t}; increase the step count")]
    TraceDrift { t: f64, drift: f64 },

    #[error("grid mismatch: {0}")]
    Grid(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("diagnostic threshold exceeded: {0}")]
    Diagnostic(String),
}
