use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("join-incompatible relations: column domain `{left}` does not match row domain `{right}`")]
    JoinIncompatible { left: String, right: String },

    #[error("unknown label `{label}` in domain `{domain}`")]
    UnknownLabel { domain: String, label: String },

    #[error("duplicate label `{label}` in domain `{domain}`")]
    DuplicateLabel { domain: String, label: String },

    #[error("domain `{domain}` has {labels} labels but {values} numeric values")]
    ValueCountMismatch {
        domain: String,
        labels: usize,
        values: usize,
    },

    #[error("edge ({row}, {col}) is out of bounds for a {rows}x{cols} relation")]
    EdgeOutOfBounds {
        row: usize,
        col: usize,
        rows: usize,
        cols: usize,
    },

    #[error("a chain needs at least one relation")]
    EmptyChain,

    #[error("randomization point {point} is invalid for a chain of {len} relations")]
    InvalidPoint { point: String, len: usize },

    #[error("statistic `{name}` is undefined: {reason}")]
    UndefinedStatistic { name: String, reason: String },

    #[error("statistic `{0}` is not registered")]
    UnknownStatistic(String),

    #[error("statistic `{statistic}` is missing parameter `{param}`")]
    MissingParameter { statistic: String, param: String },

    #[error("statistic `{statistic}` requires {required} semantics but the chain uses {actual}")]
    SemanticsMismatch {
        statistic: String,
        required: String,
        actual: String,
    },

    #[error("domain `{0}` carries no numeric values")]
    MissingNumericValues(String),

    #[error("the null distribution is empty")]
    EmptyNullSet,

    #[error("invalid value for `{field}`: {reason}")]
    InvalidConfig { field: String, reason: String },

    #[error("enumeration exceeds the limit of {limit} members")]
    EnumerationLimit { limit: usize },

    #[error("{}:{line}: {reason}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("at randomization point {point}: {source}")]
    AtPoint {
        point: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidConfig {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn undefined(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::UndefinedStatistic {
            name: name.into(),
            reason: reason.into(),
        }
    }

    /// True for errors that mark a single sample as undefined rather than
    /// aborting a run.
    pub fn is_undefined_statistic(&self) -> bool {
        match self {
            Error::UndefinedStatistic { .. } => true,
            Error::AtPoint { source, .. } => source.is_undefined_statistic(),
            _ => false,
        }
    }
}
