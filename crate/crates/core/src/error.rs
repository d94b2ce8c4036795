use alloc::string::String;

use crate::model::Name;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("variable `{name}` must have cardinality >= 1")]
    ZeroCardinality { name: Name },

    #[error("variable `{name}`: {reason}")]
    InvalidLabels { name: Name, reason: String },

    #[error("variable `{0}` appears twice in a scope")]
    DuplicateVariable(Name),

    #[error("variable `{name}` has cardinality {left} in one factor and {right} in another")]
    CardinalityMismatch { name: Name, left: usize, right: usize },

    #[error("table has {actual} entries, scope requires {expected}")]
    TableLength { expected: usize, actual: usize },

    #[error("variable `{0}` is not in the factor scope")]
    NotInScope(Name),

    #[error("value {value} is out of range for `{name}` (cardinality {cardinality})")]
    ValueOutOfRange { name: Name, value: usize, cardinality: usize },

    #[error("division of nonzero {numerator} by zero")]
    DivisionByZero { numerator: f64 },

    #[error("duplicate node `{0}`")]
    DuplicateNode(Name),

    #[error("unknown node `{0}`")]
    UnknownNode(Name),

    #[error("node `{node}`: {reason}")]
    MalformedNode { node: Name, reason: String },

    #[error("diagram is not valid: {0}")]
    InvalidDiagram(String),

    #[error("diagram has no decision nodes")]
    NoDecision,

    #[error("`{0}` is not the tail decision node")]
    NotTailDecision(Name),

    #[error("expected a Bayesian network, but `{0}` is not a random node")]
    NotBayesNet(Name),

    #[error("expected a value network, but `{0}` is a decision node")]
    DecisionPresent(Name),

    #[error("`{0}` is both queried and observed")]
    QueryEvidenceOverlap(Name),

    #[error("elimination order is invalid: {0}")]
    InvalidOrder(String),

    #[error("scope mismatch: {0}")]
    ScopeMismatch(String),

    #[error("method requires a single value node (found {found})")]
    RequiresSingleValueNode { found: usize },

    #[error("{what} ({size}) exceeds the configured cap ({cap})")]
    CapExceeded { what: &'static str, size: u128, cap: u128 },

    #[error("policy has no rule for decision `{0}`")]
    MissingRule(Name),
}
