use thiserror::Error;

/// Errors raised by the walkernel library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite value at {0}")]
    NonFinite(String),

    #[error("matrix is singular to working precision (pivot {pivot} at column {column})")]
    Singular { column: usize, pivot: f64 },

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("Stein operator is singular: 1 - s_i t_j = {0:e}")]
    SingularStein(f64),

    #[error(
        "iteration diverged after {iterations} steps; the decay must satisfy \
         lambda < 1/xi_max (lambda = {lambda}, xi_max estimate = {xi_max:.6})"
    )]
    Diverged {
        iterations: usize,
        lambda: f64,
        xi_max: f64,
    },

    #[error(
        "spectral condition violated: lambda * xi_max = {product:.6} >= 1 \
         (lambda = {lambda}, xi_max = {xi_max:.6}); choose a smaller lambda"
    )]
    SpectralCondition {
        lambda: f64,
        xi_max: f64,
        product: f64,
    },

    #[error("vertex {0} is isolated (degree 0)")]
    IsolatedVertex(usize),

    #[error("operation requires an undirected graph")]
    Directed,

    #[error("graph has no discrete edge labels")]
    Unlabeled,

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("kernel evaluation failed for pair ({i}, {j}): {source}")]
    Pair {
        i: usize,
        j: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
