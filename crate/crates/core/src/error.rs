use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the function.
    #[error("domain error: {0}")]
    Domain(String),

    /// Density evaluated on the boundary of its support, where it is unbounded or undefined.
    #[error("boundary error: {0}")]
    Boundary(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("quadrature failed on [{lower}, {upper}]: estimated relative error {error:.3e} after {panels} panels")]
    Quadrature {
        lower: f64,
        upper: f64,
        error: f64,
        panels: usize,
    },

    #[error("degenerate probability: {0}")]
    Degenerate(String),

    #[error("triangle kind mismatch: expected {expected}, found {found}")]
    KindMismatch {
        expected: &'static str,
        found: &'static str,
    },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("division by zero: {0}")]
    DivisionByZero(String),

    #[error("sampler error: {0}")]
    Sampler(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    /// True for errors raised by the numerical layers (quadrature, sampling,
    /// degenerate probabilities) as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Quadrature { .. } | Error::Degenerate(_) | Error::Sampler(_)
        )
    }
}
