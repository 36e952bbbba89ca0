use thiserror::Error;

use crate::term::Position;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("arity error at byte {offset}: `{symbol}` expects {expected} argument(s), got {found}")]
    Arity { offset: usize, symbol: String, expected: usize, found: usize },

    #[error("invalid position {0}")]
    InvalidPosition(Position),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("not evaluable to a number: {0}")]
    NonEvaluable(String),

    #[error("rewrite budget of {0} steps exhausted")]
    BudgetExhausted(usize),

    #[error("external solver unavailable: {0}")]
    SolverUnavailable(String),

    #[error("case explosion: {vars} variables exceed the limit of {limit}")]
    CaseExplosion { vars: usize, limit: usize },

    #[error("rule file line {line}: {message}")]
    RuleFile { line: usize, message: String },

    #[error("{0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
