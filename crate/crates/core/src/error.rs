use thiserror::Error;

use crate::model::Violation;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("distance undefined: target attributes differ ({0} vs {1})")]
    MismatchedTarget(usize, usize),

    #[error("distance undefined: stored vector has no asserted premise attribute")]
    UndefinedDistance,

    #[error("target attribute is not asserted")]
    TargetUnasserted,

    #[error("vector does not conform to the schema: {}", join_violations(.0))]
    SchemaMismatch(Vec<Violation>),

    #[error("invalid schema: {0}")]
    InvalidSchema(String),

    #[error("dropping attribute {attr} would leave a premise covering every vector")]
    WouldCoverEverything { attr: usize },

    #[error("attribute {attr} was asserted in the input and cannot be reasserted")]
    NonMonotonicAssertion { attr: usize },

    #[error("forward chaining ran {iterations} iterations, bound is {bound}")]
    IterationBound { iterations: usize, bound: usize },

    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("row {row}, column {column}: {message}")]
    Domain {
        row: usize,
        column: usize,
        message: String,
    },

    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("unsupported clause at line {line}: {reason}")]
    UnsupportedClause { line: usize, reason: String },

    #[error("predicate `{0}` is used with inconsistent arity")]
    InconsistentArity(String),

    #[error("unknown rule `{0}`")]
    UnknownRule(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, column: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            column,
            message: message.into(),
        }
    }
}

fn join_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
