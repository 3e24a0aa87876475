use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SrmError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("sample generation aborted: acceptance rate {rate:.3e} after {attempts} draws is below floor {floor:.1e}")]
    AcceptanceFloor { rate: f64, attempts: u64, floor: f64 },

    #[error("estimation error: {0}")]
    Estimation(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("calibration error: {0}")]
    Calibration(String),

    #[error("estimated density {value:.3e} at {at} is below floor {floor:.1e}")]
    SingularDensity { value: f64, at: f64, floor: f64 },

    #[error("degenerate risk set at {0}")]
    DegenerateRiskSet(f64),

    #[error("bootstrap refused: {dropped} of {total} replicates failed")]
    BootstrapFailures { dropped: usize, total: usize },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for SrmError {
    fn from(e: std::io::Error) -> Self {
        SrmError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, SrmError>;
