//! Scalar linear index codes over the reals by rank minimization.
//!
//! The crate turns a side-information graph into a partially specified
//! matrix ([`rankmin::PatternMatrix`]) and searches for low-rank completions
//! with alternating projections and related heuristics. Completed matrices
//! become working index codes in [`codec`]; [`netcode`] reuses the machinery
//! to build linear network codes through the network-to-index-coding
//! reduction, and [`bench`] runs paired experiments across graph families.

pub mod bench;
pub mod cli;
pub mod codec;
pub mod coloring;
pub mod error;
pub mod graph;
pub mod netcode;
pub mod rankmin;
pub mod rng;

pub use error::{Error, Result};
pub use graph::{GraphKind, SideInfoGraph};
pub use rankmin::{PatternMatrix, SolverConfig, SolverOutcome, Variant};
pub use rng::RngSeed;
