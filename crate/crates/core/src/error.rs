use thiserror::Error;

use crate::data::LabeledExample;

/// Errors raised by the learners, oracles, and generators.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A point identifier falls outside the instance space a hypothesis or
    /// class is defined on, or a point payload is malformed.
    #[error("domain mismatch: {0}")]
    DomainMismatch(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The request exceeds a documented desk-scale cap.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// An independent set of the conflict graph could not be fit jointly.
    /// Carries the unrealizable pair when one exists; `None` means the class
    /// is not 2-refutable on this dataset.
    #[error("refutability violation on vertices {vertices:?}: witness {witness:?}")]
    RefutabilityViolation {
        vertices: Vec<usize>,
        witness: Option<(LabeledExample, LabeledExample)>,
    },

    #[error("distributions do not share a marginal: {0}")]
    MarginalMismatch(String),

    #[error("internal invariant broken: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn capacity(msg: impl Into<String>) -> Self {
        Error::Capacity(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::DomainMismatch(msg.into())
    }
}
