use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

/// Error type shared by all modules of the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("point ({x}, {y}) outside the grid domain")]
    OutOfDomain { x: f64, y: f64 },

    #[error("region not contained in the grid domain: {0}")]
    RegionOutOfDomain(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("invalid coefficient set: {0}")]
    InvalidCoefficients(String),

    #[error("operator is not elliptic: measured ellipticity constant {eta}")]
    NonElliptic { eta: f64 },

    #[error("linear solve failed: relative residual {residual} exceeds {tolerance}")]
    SolverFailure { residual: f64, tolerance: f64 },

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm})")]
    EigensolverFailure { sweeps: usize, off_norm: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("degenerate frequency profile: H({radius}) = {value}")]
    DegenerateProfile { radius: f64, value: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed file {path}: {reason}")]
    Parse { path: PathBuf, reason: String },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
