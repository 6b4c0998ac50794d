use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {message}")]
    Config { path: String, message: String },
    #[error("invalid configuration: {0}")]
    Validation(String),
    #[error("diagnostic failure: {0}")]
    Diagnostic(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(passage_core::Error),
}

impl CliError {
    /// Wraps a core error raised while building a plan.
    pub fn invalid(e: passage_core::Error) -> Self {
        Self::Validation(e.to_string())
    }

    /// 2 for anything wrong with the input, 1 for failures while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config { .. } | Self::Validation(_) => 2,
            Self::Diagnostic(_) | Self::Io { .. } | Self::Core(_) => 1,
        }
    }
}

impl From<passage_core::Error> for CliError {
    fn from(e: passage_core::Error) -> Self {
        use passage_core::Error as E;
        match e {
            E::NonHermitian { .. } | E::TraceDrift { .. } | E::Diagnostic(_) => Self::Core(e),
            other => Self::Validation(other.to_string()),
        }
    }
}
