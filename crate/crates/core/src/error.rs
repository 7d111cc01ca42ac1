use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("storm {storm_id}: header on line {header_line} declares {declared} data lines, found {found}")]
    Truncated {
        storm_id: String,
        header_line: usize,
        declared: usize,
        found: usize,
    },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("storm {storm_id} has {available} records, window needs {required}")]
    TooShort {
        storm_id: String,
        available: usize,
        required: usize,
    },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("t = {t} lies outside the basis domain [{lo}, {hi}]")]
    Domain { t: f64, lo: f64, hi: f64 },

    #[error("singular system: {0}")]
    Singular(String),

    #[error("basis mismatch: {0}")]
    BasisMismatch(String),

    #[error("grid cell (k_lat={k_lat}, k_lon={k_lon}) failed on repetition {repetition}: {source}")]
    Cell {
        k_lat: usize,
        k_lon: usize,
        repetition: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures of the numerical core rather than of the input.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::Singular(_) | Error::Domain { .. } | Error::BasisMismatch(_) => true,
            Error::Cell { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}
