use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("negative belief {value} at question {question}, option {option}")]
    NegativeBelief {
        question: usize,
        option: usize,
        value: f64,
    },

    #[error("beliefs for question {question} sum to {sum}, expected 1")]
    RowSumOutOfTolerance { question: usize, sum: f64 },

    #[error("dimension mismatch for {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("empty selection on question {question} is not an action under the approval mechanism")]
    EmptySelectionInMech1Context { question: usize },

    #[error("evaluation outside the payment domain: {0}")]
    DomainError(String),

    #[error("product offset {offset} exceeds g(-s_max) = {limit}")]
    InvalidOffset { offset: f64, limit: f64 },

    #[error("utility is not strictly increasing and invertible on the payment range: {0}")]
    NonInvertibleUtility(String),

    #[error("instance too large to enumerate: {count} terms exceeds the limit of {limit}")]
    InstanceTooLarge { count: f64, limit: f64 },

    #[error("degenerate belief: {0}")]
    DegenerateBelief(String),
}
