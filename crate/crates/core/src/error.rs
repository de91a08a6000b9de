use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid variable `{id}`: {reason}")]
    InvalidVariable { id: String, reason: String },

    #[error("duplicate variable `{0}`")]
    DuplicateVariable(String),

    #[error("cpt for `{child}` names unknown parent `{parent}`")]
    UnknownParent { child: String, parent: String },

    #[error("variable `{0}` has no cpt")]
    MissingCpt(String),

    #[error("cpt for unknown or already-covered variable `{0}`")]
    UnexpectedCpt(String),

    #[error("bad row in cpt for `{child}` (row {row}): {reason}")]
    BadRow {
        child: String,
        row: usize,
        reason: String,
    },

    #[error("parent relation has a cycle through `{0}`")]
    CycleDetected(String),

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("unknown state `{state}` for variable `{variable}`")]
    UnknownState { variable: String, state: String },

    #[error("assignment does not cover variable `{0}`")]
    IncompleteAssignment(String),

    #[error("evidence has zero probability")]
    ZeroEvidenceProbability,

    #[error("variable `{0}` is not binary with states [true, false]")]
    NonBinaryVariable(String),

    #[error("missing required column `{0}`")]
    BadHeader(String),

    #[error("row {row}, column `{column}`: cannot map `{value}`")]
    BadToken {
        row: usize,
        column: String,
        value: String,
    },

    #[error("csv: {0}")]
    Csv(String),

    #[error("variable `{0}` has no record-field mapping")]
    UnmappedVariable(String),

    #[error("alpha must be finite and >= 0, got {0}")]
    InvalidAlpha(f64),

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("model json: {0}")]
    ModelJson(String),
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Csv(e.to_string())
    }
}
