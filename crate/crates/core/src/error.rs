use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("h evaluated to a non-positive value {value} at t = {at}")]
    NonPositiveValue { at: f64, value: f64 },

    #[error("degenerate weights: {0}")]
    DegenerateWeights(String),

    #[error("length mismatch: {weights} weights for {points} points")]
    LengthMismatch { weights: usize, points: usize },

    #[error("syntax error at offset {offset}: expected {}", expected.join(" | "))]
    Syntax {
        offset: usize,
        expected: Vec<String>,
    },

    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdentifier { name: String, offset: usize },

    #[error("evaluation error: {0}")]
    Eval(String),

    #[error("f is not positive: f({at}) = {value}")]
    PositivityFailure { at: f64, value: f64 },

    #[error("hypothesis failure: {0}")]
    HypothesisFailure(String),

    #[error("range mismatch: {0}")]
    RangeMismatch(String),

    #[error("invalid argument: {0}")]
    Spec(String),
}

pub type Result<T> = std::result::Result<T, Error>;
