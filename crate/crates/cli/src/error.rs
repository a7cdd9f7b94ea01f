use std::fmt;
use std::io;

use sfdsim::scenario::ScenarioError;
use sfdsim::{ModelError, SimError, TrajectoryError};

#[derive(Debug)]
pub enum CliError {
    Io { path: String, source: io::Error },
    /// Diagnostics have already been printed.
    Reported,
    Invalid(String),
    NonFinite(String),
    NoFeasiblePolicy,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => 1,
            CliError::Reported | CliError::Invalid(_) => 2,
            CliError::NonFinite(_) => 3,
            CliError::NoFeasiblePolicy => 4,
        }
    }

    pub fn io(path: &str) -> impl FnOnce(io::Error) -> CliError + '_ {
        move |source| CliError::Io {
            path: path.to_string(),
            source,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Io { path, source } => write!(f, "{path}: {source}"),
            CliError::Reported => f.write_str("aborted after errors"),
            CliError::Invalid(m) | CliError::NonFinite(m) => f.write_str(m),
            CliError::NoFeasiblePolicy => {
                f.write_str("no policy in the grid keeps sludge within the storage limit")
            }
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::NonFiniteResult { .. } => CliError::NonFinite(e.to_string()),
            other => CliError::Invalid(other.to_string()),
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Invalid(e.to_string())
    }
}

impl From<TrajectoryError> for CliError {
    fn from(e: TrajectoryError) -> Self {
        CliError::Invalid(e.to_string())
    }
}

impl From<ScenarioError> for CliError {
    fn from(e: ScenarioError) -> Self {
        match e {
            ScenarioError::Sim(s) => s.into(),
            ScenarioError::NoFeasiblePolicy => CliError::NoFeasiblePolicy,
            other => CliError::Invalid(other.to_string()),
        }
    }
}
