//! Seed derivation. Every random stream in a run is derived from one
//! top-level seed as `derive(seed, stream)`, a SplitMix64 finalizer applied to
//! the seed mixed with a per-purpose stream constant.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const STREAM_BALANCED: u64 = 0x6261_6c61_6e63_6564; // "balanced"
pub const STREAM_FOREST: u64 = 0x666f_7265_7374_0000;
pub const STREAM_MINING: u64 = 0x6d69_6e69_6e67_0000;
pub const STREAM_TRIAL: u64 = 0x7472_6961_6c00_0000;
pub const STREAM_SCENE: u64 = 0x7363_656e_6500_0000;

pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn derive(seed: u64, stream: u64) -> u64 {
    splitmix64(seed ^ splitmix64(stream))
}

pub fn derive_indexed(seed: u64, stream: u64, index: u64) -> u64 {
    derive(derive(seed, stream), index)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
