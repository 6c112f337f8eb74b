use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the watermarking library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument or input violated a precondition.
    #[error("domain error: {0}")]
    Domain(String),

    /// A coordinate fell outside the valid latitude/longitude ranges.
    #[error("coordinate out of range: lat {lat}, lon {lon}")]
    Range { lat: f64, lon: f64 },

    /// A record in an input file could not be parsed.
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: u64,
        msg: String,
    },

    /// An attacked trajectory moved further than the modification threshold.
    #[error("modification threshold exceeded: distance {distance:.3} m > sigma {sigma} m")]
    ConstraintViolation { distance: f64, sigma: f64 },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization error: {0}")]
    Format(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
