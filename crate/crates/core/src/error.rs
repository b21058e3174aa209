use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("group weights sum to {sum}, expected 1 (offending group {group})")]
    WeightSum { sum: f64, group: usize },

    #[error("group {group}: {field} must be positive and finite, got {value}")]
    NonPositive {
        group: usize,
        field: &'static str,
        value: f64,
    },

    #[error("budget {budget} is below 2 x {groups} groups")]
    BudgetTooSmall { budget: u64, groups: usize },

    #[error("design problem has no groups")]
    NoGroups,

    #[error("length mismatch: {what} has {got} entries, expected {expected}")]
    LengthMismatch {
        what: &'static str,
        got: usize,
        expected: usize,
    },

    #[error("group {group}: count {count} is odd, treatment and control cannot be balanced")]
    OddCount { group: usize, count: u64 },

    #[error("allocation uses {total} persons, budget is {budget}")]
    OverBudget { total: u64, budget: u64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("cannot read `{}`: {source}", path.display())]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot write `{}`: {source}", path.display())]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
