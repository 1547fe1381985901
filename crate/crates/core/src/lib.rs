//! Completion and packing of arc-disjoint arborescences and branchings
//! under cardinality bounds on their root sets.
//!
//! The crate has three layers:
//!
//! * [`digraph`], [`state`] and [`setfam`] hold the combinatorial objects;
//! * [`oracles`] decides every feasibility condition exactly and returns
//!   checkable certificates, while [`bruteforce`] answers the same
//!   questions by direct search without using any of those conditions;
//! * [`augment`], [`pack`], [`decompose`] and [`bipartite`] construct
//!   solutions step by step, validating each step with the oracles.
//!
//! All enumeration is exponential and meant for small instances.

pub mod augment;
pub mod bipartite;
pub mod bits;
pub mod bruteforce;
pub mod corpus;
pub mod decompose;
pub mod digraph;
pub mod error;
pub mod oracles;
pub mod pack;
pub mod setfam;
pub mod state;

pub use bits::{ArcSet, Subset};
pub use digraph::{Arborescence, Branching, Digraph, RootedInstance};
pub use error::{Error, Result};
pub use state::ForestState;
