use std::fmt;

use thiserror::Error;

/// Errors raised by the numerical and exact routines of this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{a} has no inverse modulo {c}")]
    NoInverse { a: i64, c: i64 },

    #[error("pole at {location}")]
    Pole { location: PoleLocation },

    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),

    #[error("contour truncation error {bound:.3e} exceeds tolerance; try T >= {suggested_t:.3e}")]
    Truncation { bound: f64, suggested_t: f64 },

    #[error("contour error: {0}")]
    Contour(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("insufficient cutoff: have {have}, need about {required} ({what})")]
    InsufficientCutoff {
        have: usize,
        required: usize,
        what: String,
    },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("ill-conditioned point: {0}")]
    IllConditioned(String),

    #[error("modularity check failed: residual {residual:.3e} > {tol:.3e}")]
    NotModular { residual: f64, tol: f64 },

    #[error("io: {0}")]
    Io(String),
}

/// Where a pole was hit, as real and imaginary parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoleLocation {
    pub re: f64,
    pub im: f64,
}

impl fmt::Display for PoleLocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im == 0.0 {
            write!(f, "{}", self.re)
        } else {
            write!(f, "{}{:+}i", self.re, self.im)
        }
    }
}

impl Error {
    pub(crate) fn pole(re: f64, im: f64) -> Self {
        Error::Pole {
            location: PoleLocation { re, im },
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
