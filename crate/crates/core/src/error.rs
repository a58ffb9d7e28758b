use thiserror::Error;

use crate::rewrite::Trace;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("position {position} is not valid in {term}")]
    InvalidPosition { position: String, term: String },

    #[error("rewrite fuel exhausted after {} steps", .partial.steps.len())]
    FuelExhausted { partial: Box<Trace> },

    #[error("{line}:{column}: {source}")]
    At {
        line: usize,
        column: usize,
        source: Box<Error>,
    },

    #[error("{line}:{column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("symbol {symbol} has arity {expected} but is used with {found} arguments")]
    ArityMismatch {
        symbol: String,
        expected: usize,
        found: usize,
    },

    #[error("undeclared symbol {0}")]
    UndeclaredSymbol(String),

    #[error("rule {rule}: {message}")]
    VariableViolation { rule: String, message: String },

    #[error("no rule labelled {0}")]
    UnknownRule(String),

    #[error("rule {label} does not apply at {position} in {term}")]
    StepMismatch {
        label: String,
        position: String,
        term: String,
    },

    #[error("duplicate rule label {0}")]
    DuplicateLabel(String),

    #[error("signature has {0} symbols; precedence search covers at most 8, supply a precedence")]
    SignatureTooLarge(usize),

    #[error("invalid precedence: {0}")]
    InvalidPrecedence(String),

    #[error("invalid machine: {0}")]
    InvalidMachine(String),

    #[error("run did not halt in the final state")]
    RunNotHalted,
}
