//! Seed plumbing.
//!
//! Every random stream is derived from a root seed and a path of labels,
//! so adding a new consumer never shifts the draws seen by existing ones.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub type Rng = ChaCha8Rng;

/// Derive a child seed from `root` and a label path.
pub fn derive_seed(root: u64, path: &[&str]) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(root.to_le_bytes());
    for label in path {
        hasher.update((label.len() as u64).to_le_bytes());
        hasher.update(label.as_bytes());
    }
    let digest = hasher.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}

/// Derive a child seed with a trailing integer index.
pub fn derive_indexed(root: u64, path: &[&str], index: u64) -> u64 {
    let idx = index.to_string();
    let mut full: Vec<&str> = path.to_vec();
    full.push(&idx);
    derive_seed(root, &full)
}

pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
