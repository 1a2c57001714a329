//! Error classification for the process exit contract.
//!
//! Every failure is folded into one of three classes so scripts can branch
//! on the exit code alone:
//!
//! | class      | exit code | meaning                                           |
//! |------------|-----------|---------------------------------------------------|
//! | validation | 1         | bad flags, malformed or inconsistent input data   |
//! | numerical  | 2         | a computation degenerated (no convergence, zero   |
//! |            |           | variance, regularization needed, …)               |
//! | I/O        | 3         | a file could not be read or written               |
//!
//! Usage errors from argument parsing are also validation errors; `main`
//! remaps them to exit code 1.

use std::fmt;
use std::path::Path;

use mdwm_core::classifiers::ClassifierError;
use mdwm_core::datasets::DatasetError;
use mdwm_core::features::FeatureError;
use mdwm_core::spd::ManifoldError;
use mdwm_core::{EvalError, StatsError};

/// A failed run, classified for the exit code and carrying the message
/// printed to stderr.
#[derive(Debug)]
pub enum CliError {
    /// Rejected flags, conflicting configuration, or malformed input data.
    Validation(String),
    /// A computation on valid input degenerated.
    Numerical(String),
    /// A file could not be read or written.
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Numerical(_) => 2,
            CliError::Io(_) => 3,
        }
    }

    /// Wrap an I/O error with the path it concerns.
    pub fn io_at(path: &Path, err: std::io::Error) -> Self {
        CliError::Io(format!("{}: {err}", path.display()))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(msg) => write!(f, "invalid input: {msg}"),
            CliError::Numerical(msg) => write!(f, "numerical failure: {msg}"),
            CliError::Io(msg) => write!(f, "I/O failure: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::Io(err.to_string())
    }
}

/// Manifold computations fail only on degenerate numerics: construction
/// rejects (not positive definite, non-finite) surface through data that
/// passed structural validation, and the remaining variants are
/// convergence or conditioning failures.
impl From<ManifoldError> for CliError {
    fn from(err: ManifoldError) -> Self {
        CliError::Numerical(err.to_string())
    }
}

impl From<FeatureError> for CliError {
    fn from(err: FeatureError) -> Self {
        match err {
            FeatureError::RegularizationNeeded { .. } => CliError::Numerical(err.to_string()),
            FeatureError::Manifold(inner) => inner.into(),
            _ => CliError::Validation(err.to_string()),
        }
    }
}

impl From<ClassifierError> for CliError {
    fn from(err: ClassifierError) -> Self {
        match err {
            ClassifierError::Manifold(inner) => inner.into(),
            ClassifierError::Io(inner) => inner.into(),
            _ => CliError::Validation(err.to_string()),
        }
    }
}

impl From<DatasetError> for CliError {
    fn from(err: DatasetError) -> Self {
        match err {
            DatasetError::Io { path, source } => {
                CliError::Io(format!("{}: {source}", path.display()))
            }
            DatasetError::Manifold(inner) => inner.into(),
            DatasetError::Feature(inner) => inner.into(),
            _ => CliError::Validation(err.to_string()),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(err: EvalError) -> Self {
        match err {
            // Keep the failing cell in the message but classify by the root cause.
            EvalError::CellFailed { cell, source } => match CliError::from(*source) {
                CliError::Validation(msg) => CliError::Validation(format!("{cell}: {msg}")),
                CliError::Numerical(msg) => CliError::Numerical(format!("{cell}: {msg}")),
                CliError::Io(msg) => CliError::Io(format!("{cell}: {msg}")),
            },
            EvalError::Io(inner) => inner.into(),
            EvalError::Feature(inner) => inner.into(),
            EvalError::Classifier(inner) => inner.into(),
            _ => CliError::Validation(err.to_string()),
        }
    }
}

impl From<StatsError> for CliError {
    fn from(err: StatsError) -> Self {
        match err {
            StatsError::DatasetFailed { dataset, source } => match CliError::from(*source) {
                CliError::Validation(msg) => {
                    CliError::Validation(format!("dataset {dataset:?}: {msg}"))
                }
                CliError::Numerical(msg) => {
                    CliError::Numerical(format!("dataset {dataset:?}: {msg}"))
                }
                CliError::Io(msg) => CliError::Io(format!("dataset {dataset:?}: {msg}")),
            },
            StatsError::ZeroVariance
            | StatsError::AllDifferencesZero
            | StatsError::TooFewNonzeroDifferences { .. }
            | StatsError::NonFiniteDifference { .. }
            | StatsError::PValueOutOfRange { .. } => CliError::Numerical(err.to_string()),
            _ => CliError::Validation(err.to_string()),
        }
    }
}
