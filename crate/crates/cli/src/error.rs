use std::path::PathBuf;

use tenfill_core::SolverReport;

/// Problems with a DTEN1 or PGM file.
#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("not a DTEN1 file (bad magic)")]
    BadMagic,
    #[error("unsupported DTEN1 version {0}")]
    UnsupportedVersion(u8),
    #[error("unknown element type tag {0}")]
    UnknownType(u8),
    #[error("expected a {expected} file, found {found}")]
    WrongType {
        expected: &'static str,
        found: &'static str,
    },
    #[error("file truncated: needed {needed} bytes, found {found}")]
    Truncated { needed: usize, found: usize },
    #[error("{0} trailing bytes after payload")]
    TrailingBytes(usize),
    #[error("invalid header: {0}")]
    Header(String),
    #[error("image: {0}")]
    Image(String),
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Argument(String),
    #[error("{path}: {source}")]
    Format {
        path: PathBuf,
        #[source]
        source: FormatError,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("solver diverged at iteration {iteration}: {what}")]
    Divergence {
        iteration: usize,
        what: String,
        report: Box<SolverReport>,
    },
}

impl CliError {
    /// 2 argument, 3 format or file access, 4 divergence.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Argument(_) => 2,
            CliError::Format { .. } | CliError::Io { .. } => 3,
            CliError::Divergence { .. } => 4,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, source: FormatError) -> Self {
        CliError::Format {
            path: path.into(),
            source,
        }
    }
}

impl From<tenfill_core::Error> for CliError {
    fn from(e: tenfill_core::Error) -> Self {
        match e {
            tenfill_core::Error::Divergence {
                iteration,
                what,
                report,
            } => CliError::Divergence {
                iteration,
                what,
                report,
            },
            other => CliError::Argument(other.to_string()),
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
