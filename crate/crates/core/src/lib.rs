//! Flip dynamics for proper colorings.
//!
//! The crate covers Kempe components and the flip chain, the greedy one-step
//! coupling of two neighboring colorings, the contraction linear programs
//! that select flip parameters, exact small-instance oracles for the
//! weighted metric, and experiment drivers.

pub mod chains;
pub mod config;
pub mod coupling;
pub mod error;
pub mod graph;
pub mod harness;
pub mod lp;
pub mod metrics;
pub mod params;
pub mod scalar;
pub mod simplex;

pub use error::{Error, Result};
pub use graph::{Color, Coloring, Graph, KempeComponent, ListAssignment, Vertex};
pub use params::{FlipParams, Preset};
pub use scalar::Rational;
