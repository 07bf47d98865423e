use std::io;
use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the laboratory.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the domain an operation is defined on.
    #[error("domain error: {0}")]
    Domain(String),

    /// The offset set covers every residue class modulo `prime`.
    #[error("inadmissible constellation {offsets:?}: every residue mod {prime} is occupied")]
    Inadmissible { offsets: Vec<u64>, prime: u64 },

    /// A run configuration failed validation.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// An exact identity or cross-check that must hold did not.
    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("i/o error at {}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("csv error at {}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
