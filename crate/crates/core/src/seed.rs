//! Splittable seed derivation.
//!
//! Every random stream in the pipeline (fold shuffles, SMOTE draws, bootstrap
//! samples, weight init) gets its own seed derived from the master seed and a
//! path of integer tags, so parallel execution reproduces serial results.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Stream tags keep derived seeds for different purposes apart.
pub mod tag {
    pub const FOLDS: u64 = 1;
    pub const SMOTE: u64 = 2;
    pub const TRAIN: u64 = 3;
    pub const INNER_CV: u64 = 4;
    pub const PERMUTATION: u64 = 5;
    pub const BOOTSTRAP: u64 = 6;
    pub const INIT: u64 = 7;
    pub const SHUFFLE: u64 = 8;
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed from `master` and an ordered list of tags.
pub fn derive(master: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(master), |acc, &t| splitmix64(acc ^ splitmix64(t.wrapping_add(0xA24B_AED4_963E_E407))))
}

pub fn rng(master: u64, path: &[u64]) -> Rng {
    Rng::seed_from_u64(derive(master, path))
}
