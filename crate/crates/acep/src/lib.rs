//! Stallings-automata toolkit for finitely generated subgroups of free
//! groups: folded subgroup graphs, fiber products and conjugate
//! intersections, the four-case ACEP classifier, S-witness detection,
//! the `|·|_H` word metric with its explicit constants, and
//! machine-checkable certificates for membership and non-membership in
//! normal closures.

pub mod analysis;
pub mod closure;
pub mod fiber;
pub mod graph;
pub mod metric;
pub mod sdetect;
pub mod word;

use thiserror::Error;

/// Crate-wide error type. Pure group-theoretic operations are total or
/// return `Option`; errors mark bad inputs and violated preconditions.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid alphabet: {0}")]
    BadAlphabet(String),
    #[error("symbol {symbol:?} at position {position} is not in the alphabet")]
    UnknownSymbol { symbol: char, position: usize },
    #[error("invalid subgroup spec: {0}")]
    InvalidSpec(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("precondition violated: {0}")]
    Precondition(String),
}
