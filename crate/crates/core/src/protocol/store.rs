//! Where signed instances live, keyed by `H(P_G)` and index `j`.

use alloc::collections::BTreeMap;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::crypto::{Digest, KeyPair, Signature};
use crate::graph::{make_instance_pool, Graph, GraphError, VertexPermutation};

pub trait InstanceStore {
    fn fetch(&self, descriptor_hash: &Digest, j: u64) -> Option<(Arc<Graph>, Signature)>;
}

impl<S: InstanceStore + ?Sized> InstanceStore for &S {
    fn fetch(&self, descriptor_hash: &Digest, j: u64) -> Option<(Arc<Graph>, Signature)> {
        (**self).fetch(descriptor_hash, j)
    }
}

#[derive(Debug, Default, Clone)]
pub struct MemoryStore {
    items: BTreeMap<(Digest, u64), (Arc<Graph>, Signature)>,
}

impl MemoryStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, descriptor_hash: Digest, j: u64, graph: Arc<Graph>, sig: Signature) {
        self.items.insert((descriptor_hash, j), (graph, sig));
    }

    pub fn remove(&mut self, descriptor_hash: &Digest, j: u64) {
        self.items.remove(&(*descriptor_hash, j));
    }

    /// Drops every instance of a finished epoch.
    pub fn retire(&mut self, descriptor_hash: &Digest) {
        self.items.retain(|(d, _), _| d != descriptor_hash);
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

impl InstanceStore for MemoryStore {
    fn fetch(&self, descriptor_hash: &Digest, j: u64) -> Option<(Arc<Graph>, Signature)> {
        self.items.get(&(*descriptor_hash, j)).cloned()
    }
}

/// What the utility signs for instance `j`: `H(P_G) ‖ j ‖ H(G_j)`.
pub fn instance_message(descriptor_hash: &Digest, j: u64, graph_digest: &Digest) -> [u8; 72] {
    let mut msg = [0u8; 72];
    msg[..32].copy_from_slice(&descriptor_hash.0);
    msg[32..40].copy_from_slice(&j.to_be_bytes());
    msg[40..].copy_from_slice(&graph_digest.0);
    msg
}

/// Generates `z` isomorphs of `g`, signs each with the utility key and
/// returns them with their signatures. The relabelings stay with the
/// utility so it can map solutions back onto `g`.
pub fn publish_instances(
    g: &Graph,
    descriptor_hash: &Digest,
    z: u64,
    utility: &KeyPair,
    seed: u64,
) -> Result<Vec<(Arc<Graph>, Signature, VertexPermutation)>, GraphError> {
    let pool = make_instance_pool(g, z as usize, seed)?;
    Ok(pool
        .into_iter()
        .enumerate()
        .map(|(j, (h, perm))| {
            let sig = utility.sign(&instance_message(descriptor_hash, j as u64, &h.digest()));
            (Arc::new(h), sig, perm)
        })
        .collect())
}
