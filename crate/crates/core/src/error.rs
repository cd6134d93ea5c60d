use thiserror::Error;

/// Errors raised anywhere in the library.
///
/// The CLI maps [`Error::Predicate`] to exit code 2 and [`Error::Budget`] to
/// exit code 3.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A weight hypothesis required by the operation does not hold.
    #[error("weight predicate `{predicate}` fails: {detail}")]
    Predicate { predicate: &'static str, detail: String },

    /// A configured work budget was exhausted before the computation finished.
    #[error("{what} budget of {limit} exhausted (reached {reached})")]
    Budget {
        what: &'static str,
        limit: u64,
        reached: u64,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("scalar kind mismatch: {left} vs {right}")]
    ScalarKindMismatch {
        left: &'static str,
        right: &'static str,
    },

    /// An exact computation was requested but the weight only evaluates
    /// approximately.
    #[error("weight `{0}` is not exactly evaluable; convert the vector to float first")]
    Inexact(String),

    /// The lacunary series does not define an element of the space.
    #[error("series diverges: {0}")]
    Divergent(String),

    #[error("Gram system ill-conditioned (condition estimate {condition:e})")]
    IllConditioned { condition: f64 },

    /// A runtime certificate that should hold by construction was violated.
    #[error("certificate violated: {0}")]
    Certificate(String),

    #[error("safe window is empty: {0}")]
    EmptyWindow(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
