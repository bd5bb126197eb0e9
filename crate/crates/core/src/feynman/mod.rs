//! Stationary-phase expansion engine: graph enumeration, phase models,
//! graph-sum evaluation, and an independent Wick-contraction oracle.

pub mod enumerate;
pub mod expand;
pub mod graph;
pub mod phase;
pub mod wick;

pub use enumerate::{enumerate_attached, enumerate_graphs};
pub use expand::{amplitude, expand, expand_with};
pub use graph::FeynmanGraph;
pub use phase::{ExternalFn, PhaseError, PhaseModel};
pub use wick::wick_expand;
