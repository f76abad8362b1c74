use alloc::boxed::Box;
use alloc::string::String;

use crate::qp::QpSolution;

pub type Result<T> = core::result::Result<T, Error>;

/// Everything that can go wrong while fitting a model or evaluating a bound.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("length mismatch for {what}: expected {expected}, found {found}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("sites {first} and {second} coincide (distance {distance:e})")]
    DuplicateSites { first: usize, second: usize, distance: f64 },

    #[error(
        "numerically singular Gram matrix: pivot {pivot} is {value:e}; \
         thin the dataset to increase the separation distance"
    )]
    SingularGram { pivot: usize, value: f64 },

    #[error("ill-conditioned evaluation: {what} radicand {radicand:e} below -{threshold:e}")]
    Conditioning {
        what: &'static str,
        radicand: f64,
        threshold: f64,
    },

    #[error("norm bound violated: radicand {radicand:e} is negative; Γ is too small for the data")]
    NormBoundViolated { radicand: f64 },

    #[error(
        "{solver} did not converge after {} iterations (residual {:e})",
        solution.iterations,
        solution.residual
    )]
    NotConverged {
        solver: &'static str,
        solution: Box<QpSolution>,
    },

    #[error("empty confinement interval at query {index}: [{lower}, {upper}]")]
    EmptyIntersection { index: usize, lower: f64, upper: f64 },

    #[error("model kind {found} cannot be used for the {expected} bound")]
    WrongModelKind {
        expected: &'static str,
        found: &'static str,
    },
}
