use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PddlError {
    #[error("parse error at {line}:{column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error(transparent)]
    Semantic(#[from] SemanticError),
}

impl PddlError {
    pub(crate) fn parse(line: usize, column: usize, message: impl Into<String>) -> Self {
        PddlError::Parse { line, column, message: message.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemanticError {
    #[error("undeclared type `{0}`")]
    UndeclaredType(String),
    #[error("undeclared predicate `{0}`")]
    UndeclaredPredicate(String),
    #[error("predicate `{predicate}` expects {expected} arguments, got {found}")]
    ArityMismatch { predicate: String, expected: usize, found: usize },
    #[error("variable `{variable}` is not a parameter of action `{action}`")]
    UnboundVariable { action: String, variable: String },
    #[error("unknown object `{0}`")]
    UnknownObject(String),
    #[error("unsupported requirement `{0}`")]
    UnsupportedRequirement(String),
    #[error("duplicate {kind} `{name}`")]
    Duplicate { kind: &'static str, name: String },
    #[error("`{object}` has type `{found}` but `{expected}` is required by `{predicate}`")]
    TypeMismatch { predicate: String, object: String, expected: String, found: String },
    #[error("type hierarchy contains a cycle through `{0}`")]
    CyclicTypes(String),
    #[error("problem is for domain `{found}`, expected `{expected}`")]
    DomainMismatch { expected: String, found: String },
    #[error("action `{action}` both adds and deletes {atom}")]
    AddDelConflict { action: String, atom: String },
    #[error("syntax of action `{action}`: {message}")]
    BadSyntax { action: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GoalParseError {
    #[error("no goal expression found")]
    NoExpression,
    #[error("malformed goal: {0}")]
    Malformed(String),
    #[error("unknown predicate `{0}`")]
    UnknownPredicate(String),
    #[error("unknown object `{0}`")]
    UnknownObject(String),
    #[error("predicate `{predicate}` expects {expected} arguments, got {found}")]
    Arity { predicate: String, expected: usize, found: usize },
}
