use thiserror::Error;

use crate::lp::Status;

/// Errors produced across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("infeasible center layout: {k} mutually equidistant centers need dimension >= {}, got {d}", .k - 1)]
    InfeasibleLayout { k: usize, d: usize },

    #[error("invalid linear program: {0}")]
    InvalidProgram(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("solver reported {0:?} on a program that should be feasible and bounded")]
    SolverStatus(Status),

    #[error("enumeration guard: C({n}, {k}) = {count} exceeds the limit {limit}")]
    EnumerationGuard {
        n: usize,
        k: usize,
        count: u128,
        limit: u128,
    },

    #[error("invalid clustering: {0}")]
    InvalidClustering(String),

    #[error("alpha = {alpha} outside the admissible range (0, {max}]")]
    AlphaOutOfRange { alpha: f64, max: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
