use std::path::PathBuf;

use thiserror::Error;

/// Errors from operator algebra, state preparation and I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit count mismatch: {left} vs {right}")]
    QubitMismatch { left: usize, right: usize },

    #[error("unsupported qubit count {0} (must be 1..=64)")]
    QubitCount(usize),

    #[error("operator power {0} outside 1..=4")]
    PowerOutOfRange(usize),

    #[error("unbound parameter `{0}`")]
    UnboundParameter(String),

    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("invalid site pair ({i}, {j}) for {n_sites} sites")]
    InvalidSite { i: usize, j: usize, n_sites: usize },

    #[error("dimension budget exceeded: {n_qubits} qubits (max {max})")]
    DimensionTooLarge { n_qubits: usize, max: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("state is not normalized (norm {0})")]
    NotNormalized(f64),

    #[error("probability {0} outside [0, 1]")]
    InvalidProbability(f64),

    #[error("fidelity target {0} outside (0, 1]")]
    InvalidFidelity(f64),

    #[error("fidelity target {target} not reached for theta <= {theta_max}")]
    FidelityUnreachable { target: f64, theta_max: f64 },

    #[error("expectation table has no entry for {0}")]
    MissingExpectation(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Output { path: PathBuf, message: String },

    #[error(transparent)]
    Estimate(#[from] EstimateError),
}

/// Failure of the fourth-order Lanczos estimate at a particular point.
///
/// These are per-point conditions: sweeps record them in the output row and continue.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EstimateError {
    #[error("negative radicand 3c3^2-2c2c4 = {radicand:e}")]
    NegativeRadicand { radicand: f64 },

    #[error("singular denominator c3^2-c2c4 = {denominator:e}")]
    SingularDenominator { denominator: f64 },

    #[error("non-finite moments")]
    NonFinite,

    #[error("at {sign}eps: {source}")]
    AtShift {
        sign: char,
        #[source]
        source: Box<EstimateError>,
    },
}

impl EstimateError {
    /// Short machine-readable tag for output status columns.
    pub fn code(&self) -> &'static str {
        match self {
            EstimateError::NegativeRadicand { .. } => "negative_radicand",
            EstimateError::SingularDenominator { .. } => "singular_denominator",
            EstimateError::NonFinite => "non_finite",
            EstimateError::AtShift { source, .. } => source.code(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
