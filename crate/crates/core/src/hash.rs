//! Pluggable hash functions.
//!
//! Every scheme in the crate takes a `&dyn HashFunction`, so the concrete
//! construction can be swapped without touching the schemes. The default,
//! [`MixHash`], is a keyed sponge over a 512-bit ARX permutation built from
//! 64-bit add/rotate/xor mixing. It has no external dependencies and is
//! deterministic across platforms. It is *not* a vetted cryptographic hash.

use std::fmt;

/// A deterministic function from arbitrary bytes to a fixed-length digest.
pub trait HashFunction: Send + Sync {
    fn name(&self) -> &str;

    /// Digest length in bytes; constant for the lifetime of the value.
    fn output_len(&self) -> usize;

    fn hash(&self, data: &[u8]) -> Vec<u8>;

    /// Hash of the plain concatenation of `parts`.
    fn hash_parts(&self, parts: &[&[u8]]) -> Vec<u8> {
        let total = parts.iter().map(|p| p.len()).sum();
        let mut buf = Vec::with_capacity(total);
        for p in parts {
            buf.extend_from_slice(p);
        }
        self.hash(&buf)
    }
}

impl fmt::Debug for dyn HashFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HashFunction({})", self.name())
    }
}

const LANES: usize = 8;
const RATE_LANES: usize = 4;
const RATE_BYTES: usize = RATE_LANES * 8;
const ROUNDS: usize = 16;

// Threefish-512 rotation schedule.
const ROTATIONS: [[u32; 4]; 8] = [
    [46, 36, 19, 37],
    [33, 27, 14, 42],
    [17, 49, 36, 39],
    [44, 9, 54, 56],
    [39, 30, 34, 24],
    [13, 50, 10, 17],
    [25, 29, 39, 43],
    [8, 35, 56, 22],
];

// Threefish-512 word permutation.
const LANE_ORDER: [usize; LANES] = [2, 1, 4, 7, 6, 5, 0, 3];

const fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

const fn round_constants() -> [u64; ROUNDS] {
    let mut rc = [0u64; ROUNDS];
    let mut i = 0;
    while i < ROUNDS {
        rc[i] = splitmix(i as u64 + 1);
        i += 1;
    }
    rc
}

const ROUND_CONSTANTS: [u64; ROUNDS] = round_constants();

fn permute(state: &mut [u64; LANES]) {
    for (round, rc) in ROUND_CONSTANTS.iter().enumerate() {
        let rot = &ROTATIONS[round % 8];
        for pair in 0..4 {
            let (a, b) = (2 * pair, 2 * pair + 1);
            state[a] = state[a].wrapping_add(state[b]);
            state[b] = state[b].rotate_left(rot[pair]) ^ state[a];
        }
        let prev = *state;
        for (dst, &src) in LANE_ORDER.iter().enumerate() {
            state[dst] = prev[src];
        }
        state[0] ^= rc;
    }
}

/// Keyed sponge hash with a configurable digest length.
#[derive(Clone, Debug)]
pub struct MixHash {
    key: u64,
    output_len: usize,
    name: String,
}

impl MixHash {
    pub const DEFAULT_OUTPUT_LEN: usize = 32;

    pub fn new(output_len: usize) -> Self {
        Self::keyed(0, output_len)
    }

    pub fn keyed(key: u64, output_len: usize) -> Self {
        assert!(output_len > 0, "digest length must be positive");
        let name = if key == 0 {
            format!("mix{}", output_len * 8)
        } else {
            format!("mix{}-k{key:016x}", output_len * 8)
        };
        MixHash {
            key,
            output_len,
            name,
        }
    }

    fn initial_state(&self) -> [u64; LANES] {
        let mut state = [0u64; LANES];
        state[4] = self.key;
        state[5] = self.output_len as u64;
        state[6] = 0x6d69_7868_6173_6821; // "mixhash!"
        state[7] = RATE_BYTES as u64;
        permute(&mut state);
        state
    }
}

impl Default for MixHash {
    fn default() -> Self {
        MixHash::new(Self::DEFAULT_OUTPUT_LEN)
    }
}

impl HashFunction for MixHash {
    fn name(&self) -> &str {
        &self.name
    }

    fn output_len(&self) -> usize {
        self.output_len
    }

    fn hash(&self, data: &[u8]) -> Vec<u8> {
        let mut state = self.initial_state();

        // pad10*1 to a whole number of rate blocks
        let mut padded = Vec::with_capacity(data.len() + RATE_BYTES);
        padded.extend_from_slice(data);
        padded.push(0x01);
        while padded.len() % RATE_BYTES != 0 {
            padded.push(0);
        }
        let last = padded.len() - 1;
        padded[last] |= 0x80;

        for block in padded.chunks_exact(RATE_BYTES) {
            for (lane, word) in block.chunks_exact(8).enumerate() {
                state[lane] ^= u64::from_le_bytes(word.try_into().unwrap());
            }
            permute(&mut state);
        }

        let mut out = Vec::with_capacity(self.output_len);
        loop {
            for lane in &state[..RATE_LANES] {
                for b in lane.to_le_bytes() {
                    if out.len() == self.output_len {
                        return out;
                    }
                    out.push(b);
                }
            }
            permute(&mut state);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn output_length_is_constant() {
        for len in [1, 16, 32, 33, 64, 100] {
            let h = MixHash::new(len);
            for input in [&b""[..], b"a", &[0u8; 31], &[7u8; 32], &[9u8; 1000]] {
                assert_eq!(h.hash(input).len(), len);
            }
        }
    }

    #[test]
    fn deterministic_and_input_sensitive() {
        let h = MixHash::default();
        assert_eq!(h.hash(b"abc"), h.hash(b"abc"));
        assert_ne!(h.hash(b"abc"), h.hash(b"abd"));
        assert_ne!(h.hash(b""), h.hash(&[0]));
        // padding must separate a trailing 0x01 from the pad byte
        assert_ne!(h.hash(&[0x01]), h.hash(&[]));
    }

    #[test]
    fn keys_and_lengths_separate_domains() {
        let a = MixHash::keyed(1, 32).hash(b"x");
        let b = MixHash::keyed(2, 32).hash(b"x");
        assert_ne!(a, b);
        let short = MixHash::new(16).hash(b"x");
        let long = MixHash::new(32).hash(b"x");
        assert_ne!(&long[..16], &short[..]);
    }

    #[test]
    fn hash_parts_is_concatenation() {
        let h = MixHash::default();
        assert_eq!(h.hash_parts(&[b"ab", b"", b"c"]), h.hash(b"abc"));
    }

    #[test]
    fn single_bit_flip_avalanche() {
        let h = MixHash::default();
        let base = h.hash(&[0u8; 40]);
        for bit in 0..320 {
            let mut input = [0u8; 40];
            input[bit / 8] ^= 1 << (bit % 8);
            let out = h.hash(&input);
            let diff: u32 = base
                .iter()
                .zip(&out)
                .map(|(a, b)| (a ^ b).count_ones())
                .sum();
            // 256 output bits, expect ~128 flipped
            assert!((80..=176).contains(&diff), "bit {bit}: {diff} bits differ");
        }
    }
}
