//! A directory of signed instances plus the epoch records a verifier needs.
//!
//! Layout under the root:
//! - `<descriptor-hash>/<j>.graph` and `<j>.sig` (hex) per instance
//! - `epochs.txt`: one `instance-id start-ms pk-hex,pk-hex,...` per line
//! - `chain.log`: the chain the next block builds on

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use scalowork_core::crypto::{Digest, PublicKey, Signature};
use scalowork_core::graph::Graph;
use scalowork_core::protocol::{EpochInfo, InstanceStore};

use crate::io::{read_graph, write_graph, IoError};

pub const EPOCHS_FILE: &str = "epochs.txt";
pub const CHAIN_FILE: &str = "chain.log";

#[derive(Debug, Clone)]
pub struct DirStore {
    root: PathBuf,
}

impl DirStore {
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, IoError> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(|source| IoError::Io { path: root.clone(), source })?;
        Ok(Self { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn instance_paths(&self, h: &Digest, j: u64) -> (PathBuf, PathBuf) {
        let dir = self.root.join(h.to_hex());
        (dir.join(format!("{j}.graph")), dir.join(format!("{j}.sig")))
    }

    pub fn publish(&self, h: &Digest, j: u64, g: &Graph, sig: &Signature) -> Result<(), IoError> {
        let (graph_path, sig_path) = self.instance_paths(h, j);
        let dir = graph_path.parent().expect("joined path");
        fs::create_dir_all(dir).map_err(|source| IoError::Io { path: dir.to_path_buf(), source })?;
        write_graph(&graph_path, g, false)?;
        fs::write(&sig_path, sig.to_hex()).map_err(|source| IoError::Io { path: sig_path, source })
    }

    pub fn epochs_path(&self) -> PathBuf {
        self.root.join(EPOCHS_FILE)
    }

    pub fn chain_path(&self) -> PathBuf {
        self.root.join(CHAIN_FILE)
    }
}

impl InstanceStore for DirStore {
    /// Missing or unreadable files count as unavailable.
    fn fetch(&self, h: &Digest, j: u64) -> Option<(Arc<Graph>, Signature)> {
        let (graph_path, sig_path) = self.instance_paths(h, j);
        let g = read_graph(&graph_path, false).ok()?;
        let sig = Signature::from_hex(fs::read_to_string(sig_path).ok()?.trim()).ok()?;
        Some((Arc::new(g), sig))
    }
}

pub fn render_epochs(epochs: &BTreeMap<u64, EpochInfo>) -> String {
    epochs
        .iter()
        .map(|(id, e)| {
            let keys: Vec<String> = e.committee.iter().map(PublicKey::to_hex).collect();
            format!("{id} {} {}\n", e.start_ms, keys.join(","))
        })
        .collect()
}

pub fn parse_epochs(text: &str, origin: &Path) -> Result<BTreeMap<u64, EpochInfo>, IoError> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let bad = |what: &str| IoError::Parse { path: origin.to_path_buf(), line: i + 1, what: what.to_string() };
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.is_empty() || f[0].starts_with('#') {
            continue;
        }
        if f.len() != 3 {
            return Err(bad("expected id, start and committee"));
        }
        let id = f[0].parse().map_err(|_| bad("instance id"))?;
        let start_ms = f[1].parse().map_err(|_| bad("start time"))?;
        let committee = f[2].split(',').map(PublicKey::from_hex).collect::<Result<_, _>>().map_err(|_| bad("public key"))?;
        out.insert(id, EpochInfo { start_ms, committee });
    }
    Ok(out)
}

pub fn read_epochs(path: &Path) -> Result<BTreeMap<u64, EpochInfo>, IoError> {
    let text = fs::read_to_string(path).map_err(|source| IoError::Io { path: path.to_path_buf(), source })?;
    parse_epochs(&text, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use scalowork_core::crypto::KeyPair;
    use scalowork_core::graph::cycle;

    #[test]
    fn publish_then_fetch() {
        let dir = tempfile::tempdir().unwrap();
        let store = DirStore::open(dir.path().join("s")).unwrap();
        let h = scalowork_core::crypto::hash(b"d");
        let sig = KeyPair::from_seed(b"u").sign(b"m");
        store.publish(&h, 3, &cycle(5), &sig).unwrap();
        let (g, s) = store.fetch(&h, 3).unwrap();
        assert_eq!((&*g, &s), (&cycle(5), &sig));
        assert!(store.fetch(&h, 2).is_none());
        fs::write(store.instance_paths(&h, 3).1, "zz").unwrap();
        assert!(store.fetch(&h, 3).is_none());
    }

    #[test]
    fn epochs_round_trip() {
        let pk = |s: &[u8]| KeyPair::from_seed(s).public().clone();
        let mut epochs = BTreeMap::new();
        epochs.insert(4, EpochInfo { start_ms: 10, committee: vec![pk(b"a"), pk(b"b")] });
        epochs.insert(9, EpochInfo { start_ms: 0, committee: vec![pk(b"c")] });
        let text = render_epochs(&epochs);
        assert_eq!(parse_epochs(&text, Path::new("e")).unwrap(), epochs);
        assert!(parse_epochs("1 2\n", Path::new("e")).is_err());
        assert!(parse_epochs("1 2 nothex\n", Path::new("e")).is_err());
    }
}
