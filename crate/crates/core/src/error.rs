use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// Attaches `path` to a bare I/O error.
    pub fn at_path(self, path: &std::path::Path) -> Self {
        match self {
            Error::Io(source) => Error::File { path: path.to_path_buf(), source },
            other => other,
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate rotation axis: angular velocity vector has zero norm")]
    DegenerateAxis,
    #[error("rotation center coincides with the {0}")]
    CollocatedStation(&'static str),
    #[error("undefined rotation phase: both stations lie on the rotation axis")]
    UndefinedRotationPhase,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("unsupported modulation: {0}")]
    UnsupportedModulation(String),
    #[error("index out of range: {what} = {index}, limit {limit}")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        limit: usize,
    },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: String, got: String },
    #[error("range must be positive, got {0}")]
    NonPositiveRange(f64),
    #[error("profile does not cover band: {0:.6e} Hz outside [{1:.6e}, {2:.6e}] Hz")]
    ProfileCoverage(f64, f64, f64),
    #[error("zero transmit symbol at subcarrier {n}, symbol {m}")]
    ZeroSymbol { n: usize, m: usize },
    #[error("metrics unavailable: {0}")]
    MetricsUnavailable(String),
    #[error("zero variance input")]
    ZeroVariance,
    #[error("file format: {0}")]
    Format(String),
    #[error("scenario: {0}")]
    Scenario(String),
    #[error("{}: {source}", path.display())]
    File {
        path: std::path::PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
