use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the uplink pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("placement infeasible: {kind} {index} not placed after {attempts} draws")]
    PlacementInfeasible {
        kind: &'static str,
        index: usize,
        attempts: usize,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("numerical instability: outage evaluated to {value} before clamping")]
    NumericalInstability { value: f64 },

    #[error("mobile {0} is not admitted")]
    NotAdmitted(usize),

    #[error("rate grid is empty")]
    EmptyGrid,

    #[error("config error: {0}")]
    Config(String),

    #[error("trial {trial}: {source}")]
    Trial {
        trial: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    /// The innermost error, unwrapping trial context.
    pub fn root(&self) -> &Error {
        match self {
            Error::Trial { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
