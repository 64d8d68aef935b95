//! Seedable pseudo-random generator for reproducible experiments.
//!
//! SplitMix64: the state advances by the 64-bit golden-gamma constant and is
//! scrambled by the Stafford mix13 finalizer. Output is a pure function of
//! the seed, so every experiment is bit-identical across runs and platforms.

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// Bijective 64-bit finalizer used both as the output mix and to derive
/// substream seeds.
#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    /// Independent stream for (seed, index); used to give each Monte Carlo
    /// trial its own generator so trials can run in any order.
    pub fn substream(seed: u64, index: u64) -> Self {
        Self::new(mix64(seed ^ mix64(index)))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        mix64(self.state)
    }

    /// Uniform draw from [0, n) by rejection; unbiased for every n.
    pub fn next_below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "next_below(0)");
        let zone = u64::MAX - u64::MAX % n;
        loop {
            let x = self.next_u64();
            if x < zone {
                return x % n;
            }
        }
    }
}
