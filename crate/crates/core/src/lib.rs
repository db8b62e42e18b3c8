//! Query-efficient sorting of partially ordered sets when comparisons are
//! restricted to the edges of a query graph.
//!
//! The crate provides the ground-truth poset machinery ([`poset`]), a metered
//! comparison oracle ([`oracle`]), seeded instance generators ([`instance`]),
//! the generic partition-to-linear-extension framework ([`framework`]), the
//! three model-specific partition/sorting algorithms ([`er`], [`bipartite`],
//! [`gpsc`]), the weighted total-order sorter ([`weighted`]), and the
//! benchmark harness behind the `gpsort` binary ([`bench`]).

pub mod bench;
pub mod bipartite;
pub mod er;
mod error;
pub mod framework;
pub mod gpsc;
pub mod instance;
mod matching;
pub mod oracle;
pub mod poset;
pub mod solve;
pub mod weighted;

mod bitset;

pub use error::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
