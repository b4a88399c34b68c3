use super::HashSigError;
use crate::hash::HashFunction;
use crate::wire::{self, Reader, WireError};

/// Where a sibling sits relative to the running node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MerkleTree {
    leaves: Vec<Vec<u8>>,
    levels: Vec<Vec<Vec<u8>>>,
}

impl MerkleTree {
    pub fn leaves(&self) -> &[Vec<u8>] {
        &self.leaves
    }

    /// Level 0 holds the hashed leaves; the last level holds only the root.
    pub fn levels(&self) -> &[Vec<Vec<u8>>] {
        &self.levels
    }

    pub fn root(&self) -> &[u8] {
        &self.levels.last().expect("tree has at least one level")[0]
    }

    pub fn height(&self) -> usize {
        self.levels.len() - 1
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MerkleProof {
    pub leaf_index: usize,
    pub siblings: Vec<(Vec<u8>, Side)>,
}

impl MerkleProof {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        self.write(&mut buf);
        buf
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, HashSigError> {
        let mut r = Reader::new(bytes);
        let proof = Self::read(&mut r)?;
        r.finish()?;
        Ok(proof)
    }

    pub(crate) fn write(&self, buf: &mut Vec<u8>) {
        wire::put_u64(buf, self.leaf_index as u64);
        wire::put_u32(buf, self.siblings.len() as u32);
        for (node, side) in &self.siblings {
            buf.push(match side {
                Side::Left => 0,
                Side::Right => 1,
            });
            wire::put_bytes(buf, node);
        }
    }

    pub(crate) fn read(r: &mut Reader<'_>) -> Result<Self, HashSigError> {
        let leaf_index = usize::try_from(r.u64()?)
            .map_err(|_| WireError::Invalid("leaf index too large".into()))?;
        let count = r.u32()? as usize;
        if count > 64 {
            return Err(WireError::LengthOverflow(count).into());
        }
        let mut siblings = Vec::with_capacity(count);
        for _ in 0..count {
            let side = match r.take(1)?[0] {
                0 => Side::Left,
                1 => Side::Right,
                b => return Err(WireError::Invalid(format!("side flag {b}")).into()),
            };
            siblings.push((r.bytes()?.to_vec(), side));
        }
        Ok(MerkleProof {
            leaf_index,
            siblings,
        })
    }
}

pub fn merkle_build(leaves: &[Vec<u8>], h: &dyn HashFunction) -> Result<MerkleTree, HashSigError> {
    if !leaves.len().is_power_of_two() {
        return Err(HashSigError::NotPowerOfTwo(leaves.len()));
    }
    let mut levels = vec![leaves.iter().map(|l| h.hash(l)).collect::<Vec<_>>()];
    while levels.last().unwrap().len() > 1 {
        let next = levels
            .last()
            .unwrap()
            .chunks(2)
            .map(|pair| h.hash_parts(&[&pair[0], &pair[1]]))
            .collect();
        levels.push(next);
    }
    Ok(MerkleTree {
        leaves: leaves.to_vec(),
        levels,
    })
}

pub fn merkle_prove(tree: &MerkleTree, index: usize) -> Result<MerkleProof, HashSigError> {
    let len = tree.leaves.len();
    if index >= len {
        return Err(HashSigError::IndexOutOfRange { index, len });
    }
    let mut pos = index;
    let siblings = tree.levels[..tree.height()]
        .iter()
        .map(|level| {
            let sibling = if pos % 2 == 0 {
                (level[pos + 1].clone(), Side::Right)
            } else {
                (level[pos - 1].clone(), Side::Left)
            };
            pos /= 2;
            sibling
        })
        .collect();
    Ok(MerkleProof {
        leaf_index: index,
        siblings,
    })
}

/// Recomputes the root from `leaf` along the proof path. The side flags must
/// agree with the bits of `leaf_index`, so a proof cannot be replayed for
/// another position.
pub fn merkle_verify(root: &[u8], leaf: &[u8], proof: &MerkleProof, h: &dyn HashFunction) -> bool {
    if proof.siblings.len() >= usize::BITS as usize || proof.leaf_index >> proof.siblings.len() != 0
    {
        return false;
    }
    let mut node = h.hash(leaf);
    for (level, (sibling, side)) in proof.siblings.iter().enumerate() {
        let expected = if (proof.leaf_index >> level) & 1 == 0 {
            Side::Right
        } else {
            Side::Left
        };
        if *side != expected {
            return false;
        }
        node = match side {
            Side::Right => h.hash_parts(&[&node, sibling]),
            Side::Left => h.hash_parts(&[sibling, &node]),
        };
    }
    node == root
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hash::MixHash;

    fn leaves(n: usize) -> Vec<Vec<u8>> {
        (0..n).map(|i| format!("leaf-{i}").into_bytes()).collect()
    }

    fn concat(a: &[u8], b: &[u8]) -> Vec<u8> {
        [a, b].concat()
    }

    #[test]
    fn small_roots_by_hand() {
        let h = MixHash::default();
        let one = merkle_build(&leaves(1), &h).unwrap();
        assert_eq!(one.root(), h.hash(b"leaf-0").as_slice());
        assert_eq!(one.height(), 0);

        let l = leaves(4);
        let two = merkle_build(&l[..2], &h).unwrap();
        assert_eq!(two.root(), h.hash(&concat(&h.hash(&l[0]), &h.hash(&l[1]))).as_slice());

        let four = merkle_build(&l, &h).unwrap();
        let left = h.hash(&concat(&h.hash(&l[0]), &h.hash(&l[1])));
        let right = h.hash(&concat(&h.hash(&l[2]), &h.hash(&l[3])));
        assert_eq!(four.root(), h.hash(&concat(&left, &right)).as_slice());
    }

    #[test]
    fn rejects_non_power_of_two() {
        let h = MixHash::default();
        for n in [0, 3, 5, 6, 12] {
            assert!(matches!(merkle_build(&leaves(n), &h), Err(HashSigError::NotPowerOfTwo(_))));
        }
    }

    #[test]
    fn proofs_verify_and_have_log_length() {
        let h = MixHash::new(16);
        for k in 0..=10 {
            let n = 1usize << k;
            let l = leaves(n);
            let tree = merkle_build(&l, &h).unwrap();
            let step = (n / 8).max(1);
            for i in (0..n).step_by(step) {
                let proof = merkle_prove(&tree, i).unwrap();
                assert_eq!(proof.siblings.len(), k);
                assert!(merkle_verify(tree.root(), &l[i], &proof, &h));
            }
        }
    }

    #[test]
    fn wrong_leaf_or_index_fails() {
        let h = MixHash::default();
        let l = leaves(4);
        let tree = merkle_build(&l, &h).unwrap();
        let proof = merkle_prove(&tree, 1).unwrap();
        assert!(!merkle_verify(tree.root(), &l[2], &proof, &h));
        let other = merkle_prove(&tree, 2).unwrap();
        assert!(!merkle_verify(tree.root(), &l[1], &other, &h));
        let mut moved = proof.clone();
        moved.leaf_index = 0;
        assert!(!merkle_verify(tree.root(), &l[1], &moved, &h));
        assert!(matches!(
            merkle_prove(&tree, 4),
            Err(HashSigError::IndexOutOfRange { index: 4, len: 4 })
        ));
    }

    #[test]
    fn proof_serialization() {
        let h = MixHash::default();
        let tree = merkle_build(&leaves(8), &h).unwrap();
        let proof = merkle_prove(&tree, 5).unwrap();
        assert_eq!(MerkleProof::from_bytes(&proof.to_bytes()).unwrap(), proof);
    }
}
