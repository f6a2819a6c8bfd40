//! Seed derivation and cheap fair coin flips.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive the seed of stream `index` from a master seed.
///
/// `mix64(master, index) = splitmix64(master ^ splitmix64(index))`, where
/// `splitmix64` is the SplitMix64 output function (add the golden-ratio
/// increment, then two xor-shift-multiply rounds). Trial `i` of a run always
/// uses `mix64(master_seed, i)`, so results do not depend on scheduling.
pub fn mix64(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index))
}

/// Seeded generator used for every stream in the crate.
pub fn stream(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Fair coin flips, 64 per generator call.
#[derive(Debug, Clone)]
pub struct CoinFlips {
    rng: ChaCha8Rng,
    buf: u64,
    left: u32,
}

impl CoinFlips {
    pub fn new(seed: u64) -> Self {
        CoinFlips {
            rng: stream(seed),
            buf: 0,
            left: 0,
        }
    }

    #[inline]
    pub fn flip(&mut self) -> bool {
        if self.left == 0 {
            self.buf = self.rng.next_u64();
            self.left = 64;
        }
        let bit = self.buf & 1 == 1;
        self.buf >>= 1;
        self.left -= 1;
        bit
    }

    /// The next 64 flips packed LSB-first; flip `i` is bit `i`.
    /// Any flips still buffered are discarded.
    pub fn word(&mut self) -> u64 {
        self.left = 0;
        self.rng.next_u64()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mix64_spreads_neighbouring_inputs() {
        let a = mix64(1, 0);
        let b = mix64(1, 1);
        let c = mix64(2, 0);
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert!((a ^ b).count_ones() > 16);
        assert_eq!(mix64(42, 7), mix64(42, 7));
    }

    #[test]
    fn coin_flips_are_balanced_and_reproducible() {
        let mut c = CoinFlips::new(3);
        let heads = (0..100_000).filter(|_| c.flip()).count();
        assert!((heads as f64 - 50_000.0).abs() < 5.0 * 158.2);
        let mut a = CoinFlips::new(9);
        let mut b = CoinFlips::new(9);
        assert!((0..1000).all(|_| a.flip() == b.flip()));
    }
}
