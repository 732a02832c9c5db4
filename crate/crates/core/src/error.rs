use thiserror::Error;

/// Errors raised anywhere in the geometry → assembly → spectrum pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration or resolution. `path` is a JSON pointer when the
    /// error comes from a config document, otherwise a short field name.
    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("degenerate chart {chart} at (u, v) = ({u}, {v}): EG - F^2 = {det:e}")]
    DegenerateChart { chart: usize, u: f64, v: f64, det: f64 },

    #[error("non-finite value in {context} at node {node}")]
    Numerical { context: &'static str, node: usize },

    #[error("inversion center lies on the surface (distance {distance:e})")]
    SingularInversion { distance: f64 },

    #[error("Gauss-Bonnet estimate {value} is {distance:e} away from an integer; grid too coarse")]
    Topology { value: f64, distance: f64 },

    #[error("{0}")]
    Domain(String),

    #[error("plasmonic map has a pole at lambda = 1/2 (got {0})")]
    Pole(f64),

    #[error("grid error: {0}")]
    Grid(String),

    #[error("-S is not positive definite (smallest eigenvalue {min_eig:e})")]
    NotPositiveDefinite { min_eig: f64 },

    #[error("linear algebra failure: {0}")]
    LinearAlgebra(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config { path: path.into(), message: message.into() }
    }

    /// Process exit code for the CLI. `2` is reserved for usage errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::Json(_) => 3,
            Error::NotPositiveDefinite { .. } => 4,
            Error::Numerical { .. } | Error::LinearAlgebra(_) | Error::Topology { .. } => 5,
            Error::DegenerateChart { .. } | Error::SingularInversion { .. } | Error::Grid(_) => 6,
            Error::Domain(_) | Error::Pole(_) => 7,
            Error::Io(_) => 8,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
