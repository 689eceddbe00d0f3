use std::fmt;
use std::path::PathBuf;

#[derive(Debug)]
pub enum CliError {
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    /// Malformed input; `line` is 1-based.
    Parse {
        path: PathBuf,
        line: Option<usize>,
        message: String,
    },
    Config(String),
    Solver(smoothprox_core::Error),
}

impl CliError {
    pub(crate) fn parse(
        path: &std::path::Path,
        line: Option<usize>,
        message: impl Into<String>,
    ) -> Self {
        CliError::Parse {
            path: path.to_path_buf(),
            line,
            message: message.into(),
        }
    }

    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
            CliError::Parse {
                path,
                line: Some(line),
                message,
            } => write!(f, "{}:{line}: {message}", path.display()),
            CliError::Parse {
                path,
                line: None,
                message,
            } => write!(f, "{}: {message}", path.display()),
            CliError::Config(m) => f.write_str(m),
            CliError::Solver(e) => write!(f, "solver: {e}"),
        }
    }
}

impl std::error::Error for CliError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            CliError::Io { source, .. } => Some(source),
            CliError::Solver(e) => Some(e),
            _ => None,
        }
    }
}

impl From<smoothprox_core::Error> for CliError {
    fn from(e: smoothprox_core::Error) -> Self {
        CliError::Solver(e)
    }
}
