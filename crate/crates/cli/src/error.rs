use thiserror::Error;
use tvspec_core::SpectraError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error at {field}: {message}")]
    Config { field: String, message: String },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] SpectraError),
}

impl CliError {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> CliError {
        CliError::Config { field: field.into(), message: message.into() }
    }
}
