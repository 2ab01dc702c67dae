use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("zero or negative cross-section {area:e} m^2 where a positive area is required")]
    ZeroArea { area: f64 },

    #[error("positivity lost in cell {cell} at t = {time:e} s (A = {area:e}, Q = {discharge:e})")]
    Positivity {
        cell: usize,
        time: f64,
        area: f64,
        discharge: f64,
    },

    #[error("degenerate time step: maximum wave speed is {0:e}")]
    DegenerateTimestep(f64),

    #[error("{what} did not converge after {iterations} iterations")]
    NoConvergence { what: &'static str, iterations: usize },

    #[error("no snapshot at t = {0} s")]
    MissingSnapshot(f64),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("config parse error at line {line}: {message}")]
    ConfigParse { line: usize, message: String },

    #[error("config value `{key}`: {message}")]
    ConfigValue { key: String, message: String },

    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

impl Error {
    pub(crate) fn io(path: &std::path::Path, err: impl std::fmt::Display) -> Self {
        Error::Io {
            path: path.display().to_string(),
            message: err.to_string(),
        }
    }

    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::ConfigValue {
            key: key.into(),
            message: message.into(),
        }
    }
}
