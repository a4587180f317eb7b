//! Satellite beam placement as a QUBO, with an LP-guided presolve that
//! shrinks the problem before it reaches an annealer.

pub mod baseline;
pub mod error;
pub mod geometry;
pub mod graph;
pub mod harness;
pub mod presolve;
pub mod qubo;
pub mod sampler;

pub use error::{Error, Result};
