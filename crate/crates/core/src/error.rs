use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mesh parameters: {0}")]
    MeshParameters(String),

    #[error("mesh invariant violated: {0}")]
    MeshInvariant(String),

    #[error("geometry: {0}")]
    Geometry(String),

    #[error("unsupported quadrature request: {0}")]
    Quadrature(String),

    #[error("finite element space: {0}")]
    Space(String),

    #[error("extension operator: {0}")]
    Extension(String),

    #[error("unknown problem `{0}`")]
    UnknownProblem(String),

    #[error("assembly: {0}")]
    Assembly(String),

    #[error("singular system: zero pivot in block `{block}` (row {row})")]
    Singular { block: String, row: usize },

    #[error("iterative solver did not converge after {iterations} iterations (relative residual {residual:.3e})")]
    NotConverged { iterations: usize, residual: f64, history: Vec<f64> },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("rate fit needs at least {needed} levels, got {got}")]
    TooFewLevels { needed: usize, got: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by bad user input rather than numerical failure.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::MeshParameters(_)
                | Error::Config(_)
                | Error::UnknownProblem(_)
                | Error::Parse(_)
                | Error::Json(_)
                | Error::TooFewLevels { .. }
        )
    }
}
