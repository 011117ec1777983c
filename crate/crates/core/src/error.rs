use std::path::PathBuf;

use thiserror::Error;

use crate::model::{AssignmentError, InstanceError, Violation};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid instance: {}", join(.0))]
    InvalidInstance(Vec<InstanceError>),

    #[error("invalid assignment: {0}")]
    InvalidAssignment(#[from] AssignmentError),

    #[error("uniform module requires equal works (task {task} has work {work}, expected {expected})")]
    NonUniformWorks { task: usize, work: f64, expected: f64 },

    /// The instance admits no schedule within the speed cap.
    #[error("infeasible: {reason}")]
    Infeasible {
        reason: String,
        /// Processors (0-based) that form the bottleneck, when known.
        processors: Vec<usize>,
    },

    #[error("solution violates capacity constraints: {}", join(.0))]
    CapacityViolated(Vec<Violation>),

    #[error(
        "relaxation did not converge after {moves} moves \
         (stationarity residual {residual:e}, relative gap {gap:e})"
    )]
    NonConvergence { moves: u64, residual: f64, gap: f64 },

    #[error("oracle budget exceeded: {states} assignments > budget {budget}; use fdr for instances this large")]
    BudgetExceeded { states: u128, budget: u64 },

    #[error("internal inconsistency: {0}")]
    Internal(String),

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

    #[error("{}", .0)]
    Parse(#[from] crate::harness::io::ParseError),

    #[error("invalid parameters: {0}")]
    Params(String),
}

impl Error {
    /// True for errors that mean "no feasible schedule" rather than misuse or I/O.
    pub fn is_infeasibility(&self) -> bool {
        matches!(self, Error::Infeasible { .. } | Error::CapacityViolated(_))
    }
}

fn join<T: std::fmt::Display>(items: &[T]) -> String {
    items
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}
