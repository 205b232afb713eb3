//! Counter-based seed derivation.
//!
//! Every random stream in the toolkit is keyed by a master seed plus a path
//! of labels (e.g. `["ensemble", "Pearson", "3"]`). Streams never depend on
//! how many other streams exist, so adding a ranker to a configuration does
//! not move the seeds of the runs already present.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Derives a child seed from `master` and a label path.
pub fn derive(master: u64, path: &[&str]) -> u64 {
    let mut s = splitmix64(master);
    for label in path {
        s = splitmix64(s ^ fnv1a(label.as_bytes()));
    }
    s
}

/// Derives a child seed from `master`, a label and a counter.
pub fn derive_indexed(master: u64, label: &str, index: u64) -> u64 {
    splitmix64(derive(master, &[label]) ^ splitmix64(index.wrapping_add(1)))
}

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
