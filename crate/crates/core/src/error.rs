use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid size {0} is not a power of two >= 8")]
    InvalidGrid(usize),

    #[error("non-finite sample at index {0}")]
    NonFinite(usize),

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("degenerate shape: {0}")]
    DegenerateShape(String),

    #[error("arclength inversion did not converge for target s = {target}")]
    ArclengthInversion { target: f64 },

    #[error("target {0:?} coincides with a source node")]
    CoincidentTarget([f64; 2]),

    #[error("gmres did not converge: residual {residual:e} after {iterations} iterations")]
    NotConverged { iterations: usize, residual: f64, best: Vec<f64> },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid scenario: {0}")]
    Validation(String),

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}
