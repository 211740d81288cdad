use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid test case: {0}")]
    InvalidTestCase(String),

    #[error("invalid signal: {0}")]
    InvalidSignal(String),

    #[error("degenerate spectrum: {0}")]
    DegenerateSpectrum(&'static str),

    #[error("frequency {0} Hz is not a relevant component of the reference")]
    NotARelevantComponent(f64),

    #[error("invalid block parameters: {0}")]
    InvalidBlock(String),

    #[error("non-finite block input")]
    NonFiniteInput,

    #[error("invalid plant specification: {0}")]
    InvalidPlant(String),

    #[error("simulation diverged at step {step}")]
    Diverged { step: usize },

    #[error("invalid required input: {0}")]
    InvalidInput(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),
}
