//! Stable derivation of per-interval random streams.
//!
//! Interval `i` of run `r` under master seed `m` is driven by a
//! `ChaCha8Rng` seeded (via `seed_from_u64`) with
//!
//! ```text
//! splitmix64(splitmix64(splitmix64(m) ^ r) ^ i)
//! ```
//!
//! where `splitmix64` is the standard finalizer with increment
//! `0x9E3779B97F4A7C15` and multipliers `0xBF58476D1CE4E5B9`,
//! `0x94D049BB133111EB`. Every interval owns its stream, so intervals can be
//! simulated in any order or in parallel with identical results.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Run identifiers used by the protocol and harness.
pub mod runs {
    pub const CALIBRATE_MAX: u64 = 1;
    pub const PROTOCOL: u64 = 2;
    /// Random key generation in the harness.
    pub const KEYS: u64 = 3;
    /// Training run for symbol `k` is `TRAINING + k`.
    pub const TRAINING: u64 = 0x100;
    /// Sweep point `p` is `SWEEP + p`.
    pub const SWEEP: u64 = 0x1_0000;
}

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Random streams for one run under one master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedStream {
    key: u64,
}

impl SeedStream {
    pub fn new(master_seed: u64, run: u64) -> Self {
        Self {
            key: splitmix64(splitmix64(master_seed) ^ run),
        }
    }

    pub fn seed_for(&self, index: u64) -> u64 {
        splitmix64(self.key ^ index)
    }

    pub fn rng(&self, index: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed_for(index))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splitmix_reference_values() {
        // First outputs of the reference SplitMix64 generator seeded with 0.
        assert_eq!(splitmix64(0), 0xE220_A839_7B1D_CDAF);
        assert_eq!(
            splitmix64(0x9E37_79B9_7F4A_7C15),
            0x6E78_9E6A_A1B9_65F4
        );
    }

    #[test]
    fn streams_are_distinct_and_stable() {
        let s = SeedStream::new(42, runs::PROTOCOL);
        assert_eq!(s.seed_for(7), SeedStream::new(42, runs::PROTOCOL).seed_for(7));
        assert_ne!(s.seed_for(7), s.seed_for(8));
        assert_ne!(s.seed_for(7), SeedStream::new(43, runs::PROTOCOL).seed_for(7));
        assert_ne!(s.seed_for(7), SeedStream::new(42, runs::CALIBRATE_MAX).seed_for(7));
    }
}
