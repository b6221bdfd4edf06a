use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch in {context}: left has dim {left}, right has dim {right}")]
    DimensionMismatch {
        context: &'static str,
        left: usize,
        right: usize,
    },

    #[error("{context} requires order {requirement}, got order {order}")]
    Order {
        context: &'static str,
        requirement: &'static str,
        order: usize,
    },

    #[error("tensor shape invalid: {0}")]
    Shape(String),

    #[error("tensor of order {order} and dim {dim} has {elements} elements, above the cap of {cap}")]
    TooLarge {
        order: usize,
        dim: usize,
        elements: u128,
        cap: usize,
    },

    #[error("non-finite entry at flat offset {offset}")]
    NonFinite { offset: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("matrix is singular: pivot {pivot:e} in column {column} is at or below threshold {threshold:e}")]
    SingularMatrix {
        column: usize,
        pivot: f64,
        threshold: f64,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn mismatch(context: &'static str, left: usize, right: usize) -> Self {
        Error::DimensionMismatch {
            context,
            left,
            right,
        }
    }
}
