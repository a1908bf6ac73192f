use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },
    #[error("numerical failure: {0}")]
    NonConvergence(boundedmac::Error),
    #[error(transparent)]
    Model(boundedmac::Error),
    #[error("cannot access {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("manifest: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status: 2 for configuration problems, 3 when a numerical
    /// routine fails to converge, 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Syntax { .. } | CliError::Config { .. } => 2,
            CliError::NonConvergence(_) => 3,
            _ => 1,
        }
    }
}

impl From<boundedmac::Error> for CliError {
    fn from(e: boundedmac::Error) -> Self {
        use boundedmac::Error as E;
        match e {
            E::NonConvergence { .. } => CliError::NonConvergence(e),
            E::InvalidParameter { name, reason } => CliError::config(name, reason),
            E::UnsupportedKind { .. } | E::Precondition(_) | E::NotNormalizable(_) => {
                CliError::config("experiment", e.to_string())
            }
            E::OutOfRange { .. } => CliError::Model(e),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
