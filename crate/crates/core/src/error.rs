use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid polytope: {0}")]
    InvalidPolytope(String),

    #[error("face {face}: {reason}")]
    InvalidFace { face: usize, reason: String },

    #[error("facet {facet}: degenerate span")]
    DegenerateFacet { facet: usize },

    #[error("monomial set is not downward closed: {0}")]
    NotDownwardClosed(String),

    #[error("degree regression: table holds degree {from}, requested {to}")]
    DegreeRegression { from: usize, to: usize },

    #[error("simplex {index} has non-positive volume {volume:e}")]
    NegativeSimplex { index: usize, volume: f64 },

    #[error("non-finite integrand value at point {index}")]
    NonFinite { index: usize },

    #[error("degenerate bounding box: zero extent along axis {axis}")]
    DegenerateBox { axis: usize },

    #[error("unsupported polynomial degree {0}")]
    UnsupportedDegree(usize),

    #[error("mesh error: {0}")]
    Mesh(String),

    #[error("singular diagonal block for element {element}")]
    SingularBlock { element: usize },

    #[error(
        "iterative solver did not converge in {iterations} iterations (residual {residual:e})"
    )]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    ThreadPool(#[from] rayon::ThreadPoolBuildError),
}

pub type Result<T> = std::result::Result<T, Error>;
