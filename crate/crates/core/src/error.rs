use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("singular stationary system at rho = {rho}")]
    SingularSystem { rho: f64 },
    #[error("enumeration budget exceeded for {what}: {size} > {limit}")]
    BudgetExceeded { what: &'static str, size: usize, limit: usize },
    #[error("marginal atom {index} has zero mass")]
    DegenerateMarginal { index: usize },
    #[error("no assignment for vertex {0}")]
    MissingAssignment(usize),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("negative weight at line {line}")]
    NegativeWeight { line: usize },
    #[error("self-loop on vertex {vertex} at line {line}")]
    SelfLoop { line: usize, vertex: usize },
    #[error("solver stopped after {iterations} iterations with constraint violation {violation:e}")]
    NonConvergence { iterations: usize, violation: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("target objective {target} exceeds current objective {current}")]
    TargetAbove { target: f64, current: f64 },
    #[error("empty interval intersection")]
    EmptyIntersection,
    #[error("box subdivision exceeded depth {0}")]
    DepthExceeded(usize),
    #[error("{stage}: {source}")]
    Stage { stage: &'static str, source: Box<Error> },
}

impl Error {
    /// Tags an error with the pipeline stage that raised it.
    pub fn at(stage: &'static str) -> impl FnOnce(Error) -> Error {
        move |e| Error::Stage { stage, source: Box::new(e) }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
