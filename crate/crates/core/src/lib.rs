//! Useful proof-of-work consensus in which mining pools race to find small
//! dominating sets on isomorphic copies of a utility-supplied graph.
//!
//! The crate is `no_std` with `alloc`. Everything here is a pure function of
//! its inputs: time enters through [`clock::Clock`], parallelism through
//! [`exec::Executor`], and instance storage through
//! [`protocol::InstanceStore`]. The `scalowork` crate supplies the std-backed
//! implementations, file formats and the CLI.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod chain;
pub mod clock;
pub mod codec;
pub mod committee;
pub mod crypto;
pub mod exec;
pub mod graph;
pub mod mds;
pub mod pool;
pub mod protocol;
pub mod scheduler;
pub mod sim;

pub use crypto::{Digest, PublicKey, Signature};
pub use graph::{Graph, GraphProperties, VertexPermutation};
pub use mds::{CardinalityBound, DominatingSet};
