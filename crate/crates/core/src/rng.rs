//! Keyed random substreams.
//!
//! Every random quantity is drawn from a generator whose seed is a hash of
//! the run seed and a key naming what is being drawn (a stage, a user, a
//! table cell). Results therefore do not depend on evaluation order or on
//! how work is split across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::model::CellKey;

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ *b as u64).wrapping_mul(0x0000_0100_0000_01B3)
    })
}

/// Seed of the substream named `label` under `seed`.
pub fn substream_seed(seed: u64, label: &str) -> u64 {
    mix64(mix64(seed) ^ fnv1a(label.as_bytes()))
}

/// Seed of the substream for `label` and an integer index under `seed`.
pub fn indexed_seed(seed: u64, label: &str, index: u64) -> u64 {
    mix64(substream_seed(seed, label) ^ mix64(index))
}

pub fn substream(seed: u64, label: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(substream_seed(seed, label))
}

pub fn indexed_substream(seed: u64, label: &str, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(indexed_seed(seed, label, index))
}

/// Seed for one flow-table cell.
pub fn cell_seed(seed: u64, key: &CellKey) -> u64 {
    let o = key.origin.as_str().as_bytes();
    let d = key.destination.as_str().as_bytes();
    let packed = (o[0] as u64) << 56
        | (o[1] as u64) << 48
        | (d[0] as u64) << 40
        | (d[1] as u64) << 32
        | (key.month.ordinal() as u32 as u64);
    mix64(mix64(seed) ^ mix64(packed))
}
