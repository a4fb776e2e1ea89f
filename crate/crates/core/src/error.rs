use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("point {coords:?} lies outside the domain of `{manifold}`")]
    Domain { manifold: String, coords: Vec<f64> },

    #[error("metric of `{manifold}` is not positive definite at {coords:?} (eigenvalues {min_eigenvalue:e} .. {max_eigenvalue:e})")]
    DegenerateMetric {
        manifold: String,
        coords: Vec<f64>,
        min_eigenvalue: f64,
        max_eigenvalue: f64,
    },

    #[error("parse error at line {line}, column {column}: expected {}, found {found}", expected.join(" or "))]
    Parse {
        line: usize,
        column: usize,
        expected: Vec<String>,
        found: String,
    },

    #[error("arity error: {0}")]
    Arity(String),

    #[error("unknown symbol `{name}` at line {line}, column {column}")]
    UnknownSymbol {
        name: String,
        line: usize,
        column: usize,
    },

    #[error("differential has rank {rank}, expected {expected} at {coords:?}")]
    Rank {
        rank: usize,
        expected: usize,
        coords: Vec<f64>,
    },

    #[error("could not build an orthonormal frame at {coords:?}")]
    FrameDegenerate { coords: Vec<f64> },

    #[error("{kind} requires dimension at least {required}, got {dim}")]
    Dimension {
        kind: String,
        dim: usize,
        required: usize,
    },

    #[error("unsupported identity case: {0}")]
    UnsupportedCase(String),

    #[error("unknown example `{0}`")]
    UnknownExample(String),

    #[error("submersion is not in adapted coordinates: {0}")]
    NotAdapted(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
