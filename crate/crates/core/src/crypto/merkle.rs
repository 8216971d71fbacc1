use alloc::vec::Vec;

use super::{hash, hash_concat, CryptoError, Digest};

/// Merkle root over `leaves`, each hashed once to form the bottom level.
///
/// A single leaf is its own root; levels with an odd node count pair the last
/// node with itself.
pub fn merkle_root<T: AsRef<[u8]>>(leaves: &[T]) -> Result<Digest, CryptoError> {
    if leaves.is_empty() {
        return Err(CryptoError::EmptyTree);
    }
    let mut level: Vec<Digest> = leaves.iter().map(|l| hash(l.as_ref())).collect();
    while level.len() > 1 {
        level = level
            .chunks(2)
            .map(|pair| {
                let left = &pair[0];
                let right = pair.get(1).unwrap_or(left);
                hash_concat(&[&left.0, &right.0])
            })
            .collect();
    }
    Ok(level[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn singleton_passes_leaf_digest_through() {
        assert_eq!(merkle_root(&[b"t"]).unwrap(), hash(b"t"));
    }

    #[test]
    fn two_equal_leaves() {
        let leaf = hash(b"t");
        assert_eq!(merkle_root(&[b"t", b"t"]).unwrap(), hash_concat(&[&leaf.0, &leaf.0]));
    }

    #[test]
    fn odd_level_duplicates_last() {
        let (a, b, c) = (hash(b"a"), hash(b"b"), hash(b"c"));
        let ab = hash_concat(&[&a.0, &b.0]);
        let cc = hash_concat(&[&c.0, &c.0]);
        let expected = hash_concat(&[&ab.0, &cc.0]);
        assert_eq!(merkle_root(&[b"a", b"b", b"c"]).unwrap(), expected);
    }

    #[test]
    fn order_and_bytes_matter() {
        let base = vec![b"alpha".to_vec(), b"beta".to_vec(), b"gamma".to_vec()];
        let root = merkle_root(&base).unwrap();
        let mut swapped = base.clone();
        swapped.swap(0, 1);
        assert_ne!(root, merkle_root(&swapped).unwrap());
        for i in 0..base.len() {
            for j in 0..base[i].len() {
                let mut t = base.clone();
                t[i][j] ^= 1;
                assert_ne!(root, merkle_root(&t).unwrap());
            }
        }
    }

    #[test]
    fn empty_is_error() {
        let none: [&[u8]; 0] = [];
        assert_eq!(merkle_root(&none), Err(CryptoError::EmptyTree));
    }
}
