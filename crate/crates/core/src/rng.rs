//! Seedable counter-based pseudo-random generator.
//!
//! Output word `i` under seed `s` is `mix64(s ^ GOLDEN * (i + 1))` where
//! `mix64` is the SplitMix64 finalizer. Being a pure function of
//! `(seed, counter)` the stream supports random access and cheap independent
//! substreams, and is reproducible across implementations from the algorithm
//! identifier alone.

/// Algorithm identifier persisted in instance files.
pub const GENERATOR_ID: &str = "splitmix64-counter-v1";

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z ^= z >> 30;
    z = z.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z ^= z >> 27;
    z = z.wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Clone, Debug)]
pub struct CounterRng {
    key: u64,
    ctr: u64,
}

impl CounterRng {
    pub fn new(seed: u64) -> Self {
        CounterRng { key: seed, ctr: 0 }
    }

    /// Independent substream; stream 0 is distinct from the parent.
    pub fn fork(&self, stream: u64) -> Self {
        CounterRng { key: mix64(self.key ^ GOLDEN.wrapping_mul(stream.wrapping_add(0x5851_F42D))), ctr: 0 }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.ctr = self.ctr.wrapping_add(1);
        mix64(self.key ^ GOLDEN.wrapping_mul(self.ctr))
    }

    /// Uniform in `[0, 1)` with 53 bits of precision.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    #[inline]
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.next_f64() < p
    }

    /// Uniform in `[0, bound)`, unbiased by rejection.
    pub fn gen_range(&mut self, bound: u64) -> u64 {
        assert!(bound > 0);
        let zone = u64::MAX - (u64::MAX - bound + 1) % bound;
        loop {
            let v = self.next_u64();
            if v <= zone {
                return v % bound;
            }
        }
    }

    /// Ordered sample of `p` distinct values from `[0, k)` by partial
    /// Fisher-Yates over an index table.
    pub fn distinct_tuple(&mut self, k: usize, p: usize, scratch: &mut alloc::vec::Vec<usize>) {
        assert!(p <= k);
        scratch.clear();
        scratch.extend(0..k);
        for pos in 0..p {
            let j = pos + self.gen_range((k - pos) as u64) as usize;
            scratch.swap(pos, j);
        }
        scratch.truncate(p);
    }
}
