use std::path::Path;

use thiserror::Error;

pub type CliResult<T> = Result<T, CliError>;

/// Failure classes with a stable exit code each.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Fit(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Fit(_) => 2,
            CliError::Io(_) => 3,
        }
    }

    pub fn io(path: &Path, err: impl std::fmt::Display) -> Self {
        CliError::Io(format!("{}: {err}", path.display()))
    }

    /// Same class, message prefixed with `context`.
    pub fn context(self, context: impl std::fmt::Display) -> Self {
        match self {
            CliError::Validation(m) => CliError::Validation(format!("{context}: {m}")),
            CliError::Fit(m) => CliError::Fit(format!("{context}: {m}")),
            CliError::Io(m) => CliError::Io(format!("{context}: {m}")),
        }
    }
}

impl From<fluxkit::Error> for CliError {
    fn from(err: fluxkit::Error) -> Self {
        use fluxkit::Error as E;
        let msg = err.to_string();
        match err {
            E::NoResonance(_)
            | E::Bifurcated(_)
            | E::TooFewPoints(_)
            | E::FitAborted(_)
            | E::BranchAmbiguity { .. }
            | E::Truncation(_) => CliError::Fit(msg),
            E::ParameterDomain(_)
            | E::ContractViolation(_)
            | E::IndexOutOfRange { .. }
            | E::Preprocessing(_)
            | E::InvalidProblem(_)
            | E::EmptyChannels => CliError::Validation(msg),
        }
    }
}
