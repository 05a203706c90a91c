use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what} is out of its domain (got {value})")]
    Domain { what: &'static str, value: f64 },

    #[error("need at least {needed} observations, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("{n} observations cannot be split into {m} equal groups")]
    Partition { n: usize, m: usize },

    #[error("the m-case interval needs grouped statistics")]
    MissingGroups,

    #[error("correlation matrix is invalid: {0}")]
    Correlation(&'static str),

    #[error("correlation matrix is not positive semidefinite (pivot {index} = {pivot:e})")]
    NotPsd { index: usize, pivot: f64 },

    #[error("invalid simulation config: {0}")]
    Config(&'static str),
}

pub(crate) fn domain(what: &'static str, value: f64) -> Error {
    Error::Domain { what, value }
}
