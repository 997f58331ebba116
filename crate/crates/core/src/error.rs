use std::fmt;

use thiserror::Error;

use crate::io::Diagnostic;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid signature: {0}")]
    Signature(String),

    #[error("malformed context: {0}")]
    MalformedContext(String),

    #[error("malformed world: {0}")]
    MalformedWorld(String),

    #[error("invalid Bayesian network: {}", join(.0))]
    InvalidBayesNet(Vec<String>),

    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("conditioning context has probability zero")]
    UndefinedConditioning,

    #[error("{}", join(.0))]
    Parse(Vec<Diagnostic>),

    #[error("resource limit exceeded: {0}")]
    ResourceLimit(ResourceLimit),
}

/// Which saturation budget was exhausted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResourceLimit {
    RuleApplications { abox: usize, limit: usize },
    Aboxes { limit: usize },
}

impl fmt::Display for ResourceLimit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ResourceLimit::RuleApplications { abox, limit } => {
                write!(f, "more than {limit} rule applications on ABox {abox}")
            }
            ResourceLimit::Aboxes { limit } => write!(f, "more than {limit} ABoxes"),
        }
    }
}

fn join<T: fmt::Display>(items: &[T]) -> String {
    items
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}
