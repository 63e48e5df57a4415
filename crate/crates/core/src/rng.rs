//! Seeded random streams.
//!
//! Every consumer of randomness gets its own ChaCha8 stream keyed by the run
//! seed and a stream number, so adding additional agents never shifts the
//! draws seen by normal agents.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub type SimRng = ChaCha8Rng;

/// Stream number of the additional-agent schedule. Normal agent `j` uses
/// stream `j`.
pub const SCHEDULE_STREAM: u64 = 1 << 40;

pub fn stream(seed: u64, stream: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Stable seed derivation: the first eight bytes (little endian) of the
/// SHA-256 of the labelled, little-endian encoded parts.
pub fn derive_seed(label: &str, parts: &[u64]) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update((label.len() as u64).to_le_bytes());
    hasher.update(label.as_bytes());
    for p in parts {
        hasher.update(p.to_le_bytes());
    }
    let digest = hasher.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}
