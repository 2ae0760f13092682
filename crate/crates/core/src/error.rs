use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("point index {index} out of range for a domain of {size} points")]
    IndexOutOfRange { index: usize, size: usize },

    #[error("domain size mismatch: expected {expected}, found {found}")]
    DomainMismatch { expected: usize, found: usize },

    #[error("invalid metric: {0}")]
    InvalidMetric(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("class {0} has no mass, its conditional risk is undefined")]
    EmptyClass(u8),

    #[error("invalid probability: {0}")]
    InvalidProbability(String),

    #[error("invalid mixture: {0}")]
    InvalidMixture(String),

    #[error("invalid noise kernel: {0}")]
    InvalidKernel(String),

    #[error("invalid binomial parameters: k = {k}, t = {t} (need 0 <= t < k)")]
    InvalidBinomial { k: u32, t: u32 },

    #[error("invalid game: {0}")]
    InvalidGame(String),

    #[error("{what} exceeds the cap of {cap} (got {got})")]
    CapExceeded { what: &'static str, cap: usize, got: usize },

    #[error("iterative solver did not reach gap {tolerance} within {iterations} iterations (gap {gap})")]
    NoConvergence { tolerance: f64, iterations: usize, gap: f64 },

    #[error("family is not closed under union and intersection")]
    NotClosed,

    #[error("infeasible constraint set")]
    Infeasible,

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("invalid range space: {0}")]
    InvalidRangeSpace(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
