//! Error type shared by every module of the crate.

use thiserror::Error;

/// Errors reported by graph parsing, chain construction, couplings, the LP
/// layer and the exact oracles.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A line of an edge-list or parameter document could not be parsed.
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A vertex index is not below the vertex count.
    #[error("line {line}: vertex {vertex} out of range for n = {n}")]
    VertexOutOfRange { line: usize, vertex: usize, n: usize },

    /// An edge joins a vertex to itself.
    #[error("line {line}: self-loop at vertex {vertex}")]
    SelfLoop { line: usize, vertex: usize },

    /// A coloring entry is not below the number of colors.
    #[error("color {color} at vertex {vertex} is not below k = {k}")]
    ColorOutOfRange { vertex: usize, color: usize, k: usize },

    /// Two objects that must share a vertex set have different sizes.
    #[error("size mismatch: expected {expected}, found {found}")]
    SizeMismatch { expected: usize, found: usize },

    /// Flip parameters violate p0 = 0, p1 = 1 or monotonicity.
    #[error("invalid flip parameters: {0}")]
    InvalidParams(String),

    /// Two colorings are not at Hamming distance one.
    #[error("colorings are not neighboring: Hamming distance is {0}")]
    NotNeighboring(usize),

    /// A coloring does not respect its list assignment.
    #[error("vertex {vertex} has color {color} outside its list")]
    NotListColoring { vertex: usize, color: usize },

    /// An exact computation would exceed the configured state cap.
    #[error("state space of size {states} exceeds the cap {cap}")]
    StateCapExceeded { states: u128, cap: u128 },

    /// A parameter is outside the domain of an operation.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An internal invariant failed. This indicates a bug.
    #[error("invariant violated: {0}")]
    Invariant(String),
}

/// Result alias used across the crate.
pub type Result<T> = std::result::Result<T, Error>;
