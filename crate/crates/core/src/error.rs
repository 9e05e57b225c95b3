//! Error type shared by every module of the solver.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error in {path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("non-conforming mesh: {0}")]
    NonConforming(String),

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("unsupported polynomial order k={k} for {context}")]
    UnsupportedOrder { k: usize, context: String },

    #[error("degenerate subcell: {0}")]
    DegenerateSubcell(String),

    #[error("subcell faces do not match across a shared edge: {0}")]
    NonMatchingSubfaces(String),

    #[error("projection matrix is singular: {0}")]
    SingularProjection(String),

    #[error("interior subcell adjacency graph is disconnected: {0}")]
    DisconnectedGraph(String),

    #[error("ill-conditioned system: {0}")]
    IllConditioned(String),

    #[error("invalid node set: {0}")]
    InvalidNodes(String),

    #[error("non-physical state: {0}")]
    NonPhysicalState(String),

    #[error("subcell compatibility identity violated: {0}")]
    CompatibilityViolated(String),

    #[error("subcell correction failed to converge: {0}")]
    CorrectionDiverged(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Run(Box<RunError>),
}

/// Attaches run-loop context (time, step, RK stage) to an error bubbling out of a stage.
#[derive(Debug, Error)]
#[error("at t={t:.6e}, step {step}, stage {stage}: {source}")]
pub struct RunError {
    pub t: f64,
    pub step: usize,
    pub stage: usize,
    #[source]
    pub source: Error,
}

pub type Result<T> = std::result::Result<T, Error>;
