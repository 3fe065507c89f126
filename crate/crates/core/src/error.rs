use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid value for `{field}`: {reason}")]
    InvalidField { field: String, reason: String },

    #[error("config line {line}: {reason}")]
    ConfigSyntax { line: usize, reason: String },

    #[error("unknown config key `{0}`")]
    UnknownKey(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("occupancy sum did not converge: {0}")]
    NonConvergence(String),

    #[error("enumeration bound exceeded: R^m = {r}^{m} > 10^7")]
    EnumerationTooLarge { r: u32, m: u32 },

    #[error("cannot merge statistics from different parameter points")]
    FingerprintMismatch,

    #[error("unknown metric `{name}`; valid metrics: {valid}")]
    UnknownMetric { name: String, valid: String },

    #[error("malformed CSV: {0}")]
    Csv(String),

    #[error("thread pool: {0}")]
    ThreadPool(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(field: &str, reason: impl Into<String>) -> Error {
    Error::InvalidField {
        field: field.to_string(),
        reason: reason.into(),
    }
}
