use cdl_core::CdlError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {msg}")]
    Format { path: String, msg: String },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] CdlError),
}

impl Error {
    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        Error::Io { path: path.display().to_string(), source }
    }

    pub(crate) fn format(path: &std::path::Path, msg: impl Into<String>) -> Self {
        Error::Format { path: path.display().to_string(), msg: msg.into() }
    }

    /// Short machine-readable category.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::Format { .. } => "format",
            Error::Usage(_) => "usage",
            Error::Core(CdlError::Dimension(_)) => "dimension",
            Error::Core(CdlError::Parameter(_)) => "parameter",
            Error::Core(CdlError::Numerical(_)) | Error::Core(CdlError::Diverged { .. }) => "numerical",
            Error::Core(CdlError::Solver(_)) => "solver",
        }
    }

    /// Process exit code: 2 usage, 3 input/output, 4 numerical.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) | Error::Core(CdlError::Parameter(_)) => 2,
            Error::Io { .. } | Error::Format { .. } | Error::Core(CdlError::Dimension(_)) => 3,
            Error::Core(_) => 4,
        }
    }
}
