//! Kernelization, exact oracles and certified lower bounds for the t-state
//! maximum parsimony distance between unrooted phylogenetic trees.
//!
//! The crate is organised bottom-up:
//!
//! - [`treecore`]: trees, restriction, quartets, cherries, chains, TBR moves;
//! - [`io`]: Newick, character tables and certificate documents;
//! - [`fitch`]: small parsimony scoring and extensions;
//! - [`exact`]: exhaustive oracles for `d_MP^t`, agreement forests and `d_TBR`;
//! - [`kernelize`]: cherry and chain reduction to a fixed point;
//! - [`bounds`]: leg-disjoint quartet selection, witness characters and
//!   lower-bound certificates.

pub mod bounds;
pub mod error;
pub mod exact;
pub mod fitch;
pub mod generate;
pub mod io;
pub mod kernelize;
pub mod partition;
pub mod treecore;

pub use error::{Error, Result};
