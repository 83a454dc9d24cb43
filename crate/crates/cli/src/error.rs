use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid config: `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("cannot parse config {path}: {message}")]
    Parse { path: String, message: String },

    #[error("usage error: {0}")]
    Usage(String),

    #[error("numerical failure in {context}: {source}")]
    Numerical {
        context: &'static str,
        #[source]
        source: platemem::Error,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot write {path}: {message}")]
    Output { path: String, message: String },
}

impl CliError {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    /// Maps a core error raised while running `context`. Input errors keep
    /// exit code 2, everything else is a numerical failure.
    pub fn core(context: &'static str, e: platemem::Error) -> Self {
        match e {
            platemem::Error::Parameter { field, message } => CliError::config(field, message),
            e if e.is_input_error() => CliError::Usage(format!("{context}: {e}")),
            source => CliError::Numerical { context, source },
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } | CliError::Parse { .. } | CliError::Usage(_) => 2,
            CliError::Numerical { .. } => 3,
            CliError::Io { .. } | CliError::Output { .. } => 1,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
