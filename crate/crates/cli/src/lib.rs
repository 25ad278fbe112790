//! Command-line front end for the stable-bayes library: JSON experiment
//! configuration, the canonical deconvolution experiment, CSV artifact
//! emission, and a checksummed run manifest.

pub mod config;
pub mod deconv;
pub mod experiments;
pub mod output;

use stable_bayes::Error;

/// Run failures classified by exit code: configuration parse errors exit
/// 2, validation failures exit 3, numerical failures exit 4, and I/O
/// failures exit 1.
#[derive(Debug)]
pub enum CliError {
    Parse(String),
    Validation(String),
    Numerical(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Parse(_) => 2,
            CliError::Validation(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Parse(msg) => write!(f, "config parse error: {msg}"),
            CliError::Validation(msg) => write!(f, "validation failure: {msg}"),
            CliError::Numerical(msg) => write!(f, "numerical failure: {msg}"),
            CliError::Io(msg) => write!(f, "i/o failure: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::ParameterDomain(_)
            | Error::Shape(_)
            | Error::Hypothesis(_)
            | Error::Unsupported(_)
            | Error::EmptyInput(_)
            | Error::DivergingMoment { .. } => CliError::Validation(e.to_string()),
            Error::Factorization(_)
            | Error::DegenerateWeights { .. }
            | Error::RadiusExceeded { .. }
            | Error::IterationLimit { .. }
            | Error::ReferenceMismatch => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
