use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter {value} outside [{lo}, {hi}]")]
    ParameterOutOfRange { value: f64, lo: f64, hi: f64 },

    #[error("basis index {index} out of range (space has {count} functions)")]
    IndexOutOfRange { index: usize, count: usize },

    #[error("invalid knot vector: {0}")]
    InvalidKnots(String),

    #[error("two-scale system is singular for parent knots {parent:?} with {children} children")]
    SingularTwoScale { parent: Vec<f64>, children: usize },

    #[error("hierarchy inconsistency: {0}")]
    Hierarchy(String),

    #[error("point ({0}, {1}) lies outside the background domain")]
    PointOutsideDomain(f64, f64),

    #[error("geometry: {0}")]
    Geometry(String),

    #[error("assembly: {0}")]
    Assembly(String),

    #[error("linear solve failed: {0}")]
    Solve(String),

    #[error("config: {0}")]
    Config(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
