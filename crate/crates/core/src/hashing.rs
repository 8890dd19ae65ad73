//! Content hashing for canonical refinement keys.
//!
//! Colors are the first 8 bytes of a SHA-256 digest over a domain tag and the
//! little-endian key words, so ids depend only on key content and never on
//! insertion order or thread schedule.

use sha2::{Digest, Sha256};

pub(crate) const TAG_ATP: u64 = 0x01;
pub(crate) const TAG_CR: u64 = 0x02;
pub(crate) const TAG_KWL: u64 = 0x03;
pub(crate) const TAG_OSWL_INIT: u64 = 0x04;
pub(crate) const TAG_OSWL_STEP: u64 = 0x05;
pub(crate) const TAG_MULTISET: u64 = 0x06;
pub(crate) const TAG_LABEL: u64 = 0x07;
pub(crate) const TAG_GRAPH: u64 = 0x08;
pub(crate) const TAG_OSWL_VERTEX: u64 = 0x09;
pub(crate) const TAG_OSWL_SUBGRAPH: u64 = 0x0a;

pub(crate) fn hash_words(tag: u64, words: &[u64]) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(tag.to_le_bytes());
    hasher.update((words.len() as u64).to_le_bytes());
    for w in words {
        hasher.update(w.to_le_bytes());
    }
    let digest = hasher.finalize();
    let mut out = [0u8; 8];
    out.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(out)
}
