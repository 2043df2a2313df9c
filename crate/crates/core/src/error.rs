use thiserror::Error;

use crate::model::{NodeId, Violation};

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid network: {}", join_violations(.0))]
    InvalidNetwork(Vec<Violation>),

    #[error("node {node} out of range for a network with {node_count} nodes")]
    NodeOutOfRange { node: usize, node_count: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// `-(A - M)` is not Hurwitz, so no finite gain exists.
    #[error("network is not stable (spectral radius {spectral_radius})")]
    Unstable { spectral_radius: f64 },

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("more than {cap} simple cycles; raise the cycle cap to enumerate them all")]
    CycleBudgetExceeded { cap: usize },

    #[error("certificate is not valid for this network")]
    InvalidCertificate,

    #[error("A - M is not strictly diagonally dominant in row {node}")]
    NotDiagonallyDominant { node: NodeId },

    #[error("state became non-finite at t = {time}")]
    NonFiniteState { time: f64 },

    #[error("linear solve failed: {0}")]
    SolveFailed(String),

    #[error("step {index}: {source}")]
    Step {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short machine-readable tag, used in JSON error bodies.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidNetwork(_) => "invalid_network",
            Error::NodeOutOfRange { .. } => "node_out_of_range",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::Unstable { .. } => "unstable",
            Error::PreconditionViolated(_) => "precondition_violated",
            Error::CycleBudgetExceeded { .. } => "cycle_budget_exceeded",
            Error::InvalidCertificate => "invalid_certificate",
            Error::NotDiagonallyDominant { .. } => "not_diagonally_dominant",
            Error::NonFiniteState { .. } => "non_finite_state",
            Error::SolveFailed(_) => "solve_failed",
            Error::Step { source, .. } => source.kind(),
            Error::InvalidArgument(_) => "invalid_argument",
            Error::Format(_) => "format",
            Error::Io(_) => "io",
        }
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::PreconditionViolated(msg.into())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}
