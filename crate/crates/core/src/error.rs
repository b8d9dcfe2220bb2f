use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("edge {index} ({tail}, {head}) is a self-loop")]
    SelfLoop { index: usize, tail: usize, head: usize },

    #[error("edge {index} has non-positive or non-finite conductance {conductance}")]
    BadConductance { index: usize, conductance: f64 },

    #[error("vertex {vertex} is out of range for a graph with {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("{path}:{line}: {message}")]
    Parse { path: PathBuf, line: usize, message: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("graph is disconnected")]
    Disconnected,

    #[error("matrix is not a valid Laplacian: {0}")]
    NotLaplacian(String),

    #[error("eliminated block is singular")]
    Singular,

    #[error("power iteration did not converge after {iterations} iterations (last estimate {estimate})")]
    NotConverged { estimate: f64, iterations: usize },

    #[error("operation requires an unweighted graph (all conductances equal to 1)")]
    Weighted,

    #[error(
        "dense transfer impedance needs {m}x{m} storage, above the cap of {cap} edges; \
         use streaming mode instead"
    )]
    DenseCapExceeded { m: usize, cap: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// True for failures of the numerical machinery, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Disconnected | Error::NotLaplacian(_) | Error::Singular | Error::NotConverged { .. }
        )
    }
}
