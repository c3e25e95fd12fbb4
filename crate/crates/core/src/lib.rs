//! Subspace skyline queries over relations with categorical attributes.
//!
//! The crate is organised around a handful of building blocks:
//!
//! - [`model`]: relations, subspace queries, dominance and the mixed-radix score.
//! - [`tree`]: the dominance tree, a k-ary trie holding a candidate skyline set.
//! - [`index`]: per-attribute descending sorted lists with counted access.
//! - [`algos`]: ST-S, ST-P, TOP-DOWN, TA-SKY and the projection baseline.
//! - [`cost`]: analytical cost models and the simulators that check them.
//! - [`datagen`]: Zipfian generation, discretization and CSV I/O.

pub mod algos;
pub mod cost;
pub mod datagen;
mod error;
pub mod index;
pub mod model;
pub mod tree;

pub use error::{Error, Result};
pub use index::{SortedIndex, TiePolicy};
pub use model::{
    brute_force_skyline, dominates, AttributeDomain, ProjectedTuple, Query, Relation, Scorer,
    TupleId, Value,
};
pub use tree::DominanceTree;
