use thiserror::Error;

use crate::graph::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// The graph failed structural or thermodynamic validation.
    #[error("invalid graph: {}", summarize(.0))]
    InvalidGraph(Vec<Violation>),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// An enumeration would materialize more objects than the configured cap.
    #[error("{what} enumeration exceeded the cap of {cap}; use the determinant path instead")]
    CapExceeded { what: &'static str, cap: usize },

    #[error("vertex {0} is not in the graph")]
    NoSuchVertex(usize),

    #[error("not a circuit graph: {0}")]
    NotACircuit(String),

    #[error("blocked cycle: edge {edge} has a zero rate, the affinity diverges")]
    BlockedCycle { edge: usize },

    #[error("not a useful circuit: {0}")]
    NotUseful(String),

    #[error(
        "kernel of the transition matrix is not one-dimensional (disconnected or degenerate graph)"
    )]
    DegenerateKernel,

    #[error("matrix of size {size} exceeds the dense solver limit of {limit}")]
    TooLarge { size: usize, limit: usize },

    #[error("{0} did not converge")]
    NonConvergence(String),

    #[error("division by zero in {0}")]
    Singular(&'static str),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("parse error in {path}: {message}")]
    Parse { path: String, message: String },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn summarize(v: &[Violation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
