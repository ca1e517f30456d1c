use thiserror::Error;

/// Errors raised by the numerical kernel and the modules built on it.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{op}: dimension mismatch ({}x{} vs {}x{})", .left.0, .left.1, .right.0, .right.1)]
    Dimension {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("{op}: expected a square matrix, got {rows}x{cols}")]
    NotSquare {
        op: &'static str,
        rows: usize,
        cols: usize,
    },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("invalid shape: {0}")]
    Shape(String),

    /// A documented precondition was violated by the caller.
    #[error("contract violated: {0}")]
    Contract(String),

    #[error("{op} did not converge after {iterations} iterations (residual {residual:e})")]
    Convergence {
        op: &'static str,
        iterations: usize,
        residual: f64,
    },

    /// An internal numerical invariant failed; indicates a bug rather than bad input.
    #[error("internal assertion failed: {0}")]
    Assertion(String),

    #[error("structural error: {0}")]
    Structural(String),

    #[error("restart {restart}: {source}")]
    Restart {
        restart: usize,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
