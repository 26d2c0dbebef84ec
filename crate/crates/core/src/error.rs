use thiserror::Error;

use crate::lattice::Side;

/// Errors raised by the laboratory.
///
/// Variants split into validation failures (bad input, violated
/// precondition) and numerical failures (non-convergence, degenerate
/// statistics); the harness maps them to different exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("non-finite sample at flat index {index}")]
    NonFinite { index: usize },
    #[error("aliasing guard violated: support reaches {support:.6} but the guard is {guard:.6}")]
    Aliasing { support: f64, guard: f64 },
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("expected a {expected:?}-side field")]
    WrongSide { expected: Side },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("term budget exceeded: {terms} separable terms (budget {budget}), truncation bound {truncation_bound:e}")]
    TermBudget {
        terms: usize,
        budget: usize,
        truncation_bound: f64,
    },
    #[error("quadrature did not converge: {0}")]
    Convergence(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("record store error: {0}")]
    Store(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures caused by the numerics rather than by the input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Convergence(_) | Error::Numerical(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
