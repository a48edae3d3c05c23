use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("density fell to {value:e} (floor {floor:e}) in cell {cell} at t = {t}")]
    Positivity {
        cell: usize,
        t: f64,
        value: f64,
        floor: f64,
    },

    #[error("non-finite state in cell {cell} at t = {t}")]
    NonFinite { cell: usize, t: f64 },

    #[error("vacuum contract violated in cell {cell}: m = {m:e} on rho = 0")]
    VacuumContract { cell: usize, m: f64 },

    #[error("input contract violated: {0}")]
    InputContract(String),

    #[error("wall-clock budget of {budget_s} s exceeded at t = {t}")]
    Budget { budget_s: f64, t: f64 },

    #[error("step limit of {steps} reached at t = {t}")]
    StepLimit { steps: usize, t: f64 },

    #[error("empty window overlap: {0}")]
    EmptyWindow(String),

    #[error("malformed input at row {row}: {message}")]
    Parse { row: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    /// True for errors raised while validating inputs, before any computation ran.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Config { .. } | Error::Parse { .. } | Error::Json(_) | Error::InputContract(_)
        )
    }
}
