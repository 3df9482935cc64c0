use thiserror::Error;

use crate::equilibria::EquilibriumReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown node `{0}`")]
    UnknownNode(String),

    #[error("unknown edge `{0}`")]
    UnknownEdge(String),

    #[error("duplicate edge id `{0}`")]
    DuplicateEdge(String),

    #[error("duplicate node id `{0}`")]
    DuplicateNode(String),

    #[error("user `{user}`: path `{path}` is invalid: {reason}")]
    InvalidPath {
        user: String,
        path: String,
        reason: String,
    },

    #[error("user `{user}`: rate must be positive and finite, got {rate}")]
    NonPositiveRate { user: String, rate: f64 },

    #[error("user `{0}` has no paths")]
    NoPaths(String),

    #[error("edge `{edge}`: invalid latency: {reason}")]
    InvalidLatency { edge: String, reason: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid flow: {0}")]
    InvalidFlow(String),

    #[error("edge `{edge}`: load {load} is infeasible (capacity {capacity})")]
    InfeasibleLoad {
        edge: String,
        load: f64,
        capacity: f64,
    },

    #[error("reference flow is not strictly interior (coordinate {index} = {value})")]
    NotInterior { index: usize, value: f64 },

    #[error("flow is not a Wardrop equilibrium: {0}")]
    NotWardrop(String),

    #[error("equilibrium is neither strict nor interior ({0})")]
    Unclassifiable(String),

    #[error("support of the reference flow is not contained in the support of the state")]
    SupportViolation,

    #[error("no feasible starting assignment: every candidate saturates an M/M/1 edge")]
    NoFeasibleStart,

    #[error("solver did not converge after {iterations} iterations (relative gap {gap:e})")]
    NotConverged {
        iterations: usize,
        gap: f64,
        best: Box<EquilibriumReport>,
    },

    #[error("marginal latency of edge `{0}` is not non-decreasing on the feasible range")]
    MarginalNotMonotone(String),

    #[error("network is reducible (red(Q) = {0})")]
    Reducible(usize),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("value out of range: {0}")]
    OutOfRange(String),

    #[error("unknown example `{name}`; available: {available}")]
    UnknownExample { name: String, available: String },

    #[error("invalid configuration:\n{}", .0.join("\n"))]
    Config(Vec<String>),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::UnknownNode(_)
            | Error::UnknownEdge(_)
            | Error::DuplicateEdge(_)
            | Error::DuplicateNode(_)
            | Error::InvalidPath { .. }
            | Error::NonPositiveRate { .. }
            | Error::NoPaths(_)
            | Error::InvalidLatency { .. }
            | Error::DimensionMismatch { .. }
            | Error::InvalidFlow(_)
            | Error::UnknownExample { .. }
            | Error::Config(_)
            | Error::Json(_)
            | Error::OutOfRange(_) => 2,
            _ => 3,
        }
    }

    /// Short machine-readable identifier.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::UnknownNode(_) => "unknown_node",
            Error::UnknownEdge(_) => "unknown_edge",
            Error::DuplicateEdge(_) => "duplicate_edge",
            Error::DuplicateNode(_) => "duplicate_node",
            Error::InvalidPath { .. } => "invalid_path",
            Error::NonPositiveRate { .. } => "nonpositive_rate",
            Error::NoPaths(_) => "no_paths",
            Error::InvalidLatency { .. } => "invalid_latency",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::InvalidFlow(_) => "invalid_flow",
            Error::InfeasibleLoad { .. } => "infeasible_load",
            Error::NotInterior { .. } => "not_interior",
            Error::NotWardrop(_) => "not_wardrop",
            Error::Unclassifiable(_) => "unclassifiable",
            Error::SupportViolation => "support_violation",
            Error::NoFeasibleStart => "no_feasible_start",
            Error::NotConverged { .. } => "not_converged",
            Error::MarginalNotMonotone(_) => "marginal_not_monotone",
            Error::Reducible(_) => "reducible",
            Error::Precondition(_) => "precondition",
            Error::OutOfRange(_) => "out_of_range",
            Error::UnknownExample { .. } => "unknown_example",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}
