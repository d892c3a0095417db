//! Divide-and-conquer community detection.
//!
//! Two stitching estimators sit on top of any base clustering algorithm:
//!
//! * [`pace`] averages the co-membership indicators of many local clusterings into
//!   an estimate of the global clustering matrix `C = Z Zᵀ`, and recovers labels
//!   from it.
//! * [`gale`] walks a spanning tree of the overlap graph between subgraphs, aligning
//!   each local labeling to the running estimate with a greedy confusion-matrix
//!   match, then averages per-node votes.
//!
//! Subgraphs come from [`sampling`]; base algorithms implement
//! [`cluster::BaseClusterer`]. The crate is `no_std` (with `alloc`); the `std`
//! feature adds wall-clock diagnostics and `parallel` clusters subgraphs on rayon.
#![no_std]

extern crate alloc;
#[cfg(feature = "std")]
extern crate std;

pub mod cluster;
mod error;
pub mod gale;
pub mod graph;
pub mod linalg;
pub mod membership;
pub mod pace;
mod par;
pub mod rng;
pub mod sampling;
mod timing;

pub use error::{Error, Result};
pub use graph::{Graph, LabeledGraph, SbmParams, SubgraphSample};
pub use membership::{ConfusionMatrix, MembershipMatrix, Permutation, SoftMembership};
