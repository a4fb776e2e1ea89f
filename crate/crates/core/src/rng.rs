//! Deterministic seed derivation.
//!
//! Every random draw in a run is keyed by the run seed plus a path of tags
//! (example name, point index, identity id, ...), so results do not depend
//! on evaluation order or thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Mixes `tags` into `seed`.
pub fn derive_seed(seed: u64, tags: &[&str]) -> u64 {
    let mut s = splitmix64(seed);
    for t in tags {
        s = splitmix64(s ^ fnv1a(t.as_bytes()));
    }
    s
}

pub fn rng_for(seed: u64, tags: &[&str]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, tags))
}
