//! Multiphase problem instances and the ground-truth primitives.
//!
//! An instance is the tuple `(S_1..S_k ⊆ [n], T ⊆ [n])` together with the
//! sampling parameters that produced it. Under the hard distribution every
//! set bit is i.i.d. Bernoulli(γ) with `γ = 1/(1000·sqrt(n))`.

use crate::bits::BitVec;
use crate::rng::{CounterRng, GENERATOR_ID};
use alloc::vec::Vec;
use core::fmt;

/// Bernoulli parameter of the hard distribution: `1/(1000·sqrt(n))`.
pub fn hard_gamma(n: usize) -> f64 {
    1.0 / (1000.0 * libm::sqrt(n as f64))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InstanceError {
    /// `disj` or a harness received vectors of unequal length.
    LengthMismatch { left: usize, right: usize },
    BadParameter(&'static str),
}

impl fmt::Display for InstanceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InstanceError::LengthMismatch { left, right } => {
                write!(f, "bit-vector length mismatch: {left} vs {right}")
            }
            InstanceError::BadParameter(what) => write!(f, "invalid parameter: {what}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for InstanceError {}

/// Set disjointness. Returns `true` (the bit 1) iff no position holds 1 in
/// both vectors.
pub fn disj(s: &BitVec, t: &BitVec) -> Result<bool, InstanceError> {
    if s.len() != t.len() {
        return Err(InstanceError::LengthMismatch { left: s.len(), right: t.len() });
    }
    Ok(!s.intersects(t))
}

/// Two-bit AND.
pub fn and2(x: bool, y: bool) -> bool {
    x & y
}

#[derive(Clone, Debug, PartialEq)]
pub struct MultiphaseInstance {
    n: usize,
    k: usize,
    sets: Vec<BitVec>,
    t: BitVec,
    gamma: f64,
    seed: u64,
    hard: bool,
}

impl MultiphaseInstance {
    /// Samples an instance from the hard distribution (`γ = 1/(1000·sqrt(n))`).
    pub fn sample_hard(n: usize, k: usize, seed: u64) -> Result<Self, InstanceError> {
        Self::sample(n, k, hard_gamma(n), seed, true)
    }

    /// Samples with an explicit γ override for toy-scale experiments where
    /// the hard distribution's γ is too extreme to exercise code paths.
    /// Overridden instances are never tagged as hard-distribution samples.
    pub fn sample_with_gamma(n: usize, k: usize, gamma: f64, seed: u64) -> Result<Self, InstanceError> {
        Self::sample(n, k, gamma, seed, false)
    }

    fn sample(n: usize, k: usize, gamma: f64, seed: u64, hard: bool) -> Result<Self, InstanceError> {
        if n == 0 {
            return Err(InstanceError::BadParameter("n must be >= 1"));
        }
        if k == 0 {
            return Err(InstanceError::BadParameter("k must be >= 1"));
        }
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(InstanceError::BadParameter("gamma must lie in (0, 1)"));
        }
        let mut rng = CounterRng::new(seed);
        let mut sets = Vec::with_capacity(k);
        for _ in 0..k {
            sets.push(sample_bernoulli_vec(n, gamma, &mut rng));
        }
        let t = sample_bernoulli_vec(n, gamma, &mut rng);
        Ok(MultiphaseInstance { n, k, sets, t, gamma, seed, hard })
    }

    /// Builds an instance from explicit bit masks (`n <= 64`), e.g. for
    /// exhaustive enumeration. Not tagged hard-distribution; γ records the
    /// weighting used by enumeration callers.
    pub fn from_masks(n: usize, set_masks: &[u64], t_mask: u64, gamma: f64) -> Self {
        assert!((1..=64).contains(&n) && !set_masks.is_empty());
        MultiphaseInstance {
            n,
            k: set_masks.len(),
            sets: set_masks.iter().map(|&m| BitVec::from_mask(n, m)).collect(),
            t: BitVec::from_mask(n, t_mask),
            gamma,
            seed: 0,
            hard: false,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Whether this instance was drawn from the untouched hard distribution.
    pub fn is_hard_tagged(&self) -> bool {
        self.hard
    }

    pub fn generator_id(&self) -> &'static str {
        GENERATOR_ID
    }

    pub fn set(&self, i: usize) -> &BitVec {
        &self.sets[i]
    }

    pub fn sets(&self) -> &[BitVec] {
        &self.sets
    }

    pub fn t(&self) -> &BitVec {
        &self.t
    }

    /// Ground-truth answer for query `i`.
    pub fn answer(&self, i: usize) -> bool {
        !self.sets[i].intersects(&self.t)
    }

    /// Overwrites the masks in place (`n <= 64`). Enumeration harnesses sweep
    /// full input spaces through one allocation; everyone else should treat
    /// instances as immutable.
    pub fn overwrite_masks(&mut self, set_masks: &[u64], t_mask: u64) {
        assert_eq!(set_masks.len(), self.k);
        for (s, &m) in self.sets.iter_mut().zip(set_masks) {
            s.assign_mask(m);
        }
        self.t.assign_mask(t_mask);
    }

    /// Overwrites `T` alone (`n <= 64`); the phase-split sweep iterates
    /// updates under a fixed set family.
    pub fn set_t_mask(&mut self, t_mask: u64) {
        self.t.assign_mask(t_mask);
    }

    /// Rebuilds an instance from serialized fields; used by the file format.
    pub fn from_parts(
        n: usize,
        k: usize,
        sets: Vec<BitVec>,
        t: BitVec,
        gamma: f64,
        seed: u64,
        hard: bool,
    ) -> Result<Self, InstanceError> {
        if sets.len() != k || k == 0 || n == 0 {
            return Err(InstanceError::BadParameter("k does not match set count"));
        }
        if sets.iter().any(|s| s.len() != n) || t.len() != n {
            return Err(InstanceError::BadParameter("vector length differs from n"));
        }
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(InstanceError::BadParameter("gamma must lie in (0, 1)"));
        }
        Ok(MultiphaseInstance { n, k, sets, t, gamma, seed, hard })
    }
}

/// Samples an `n`-bit vector with i.i.d. Bernoulli(γ) bits.
///
/// For γ < 1/64 the sampler jumps between ones with geometric gaps
/// (inverse-CDF), which preserves the per-bit marginal exactly and makes the
/// hard distribution cheap at large `n`. Both paths are deterministic in the
/// rng state.
fn sample_bernoulli_vec(n: usize, gamma: f64, rng: &mut CounterRng) -> BitVec {
    let mut v = BitVec::zeros(n);
    if gamma < 1.0 / 64.0 {
        let log1m = libm::log1p(-gamma);
        let mut pos = 0usize;
        loop {
            let u = 1.0 - rng.next_f64(); // (0, 1]
            let gap = libm::floor(libm::log(u) / log1m) as usize;
            pos = match pos.checked_add(gap) {
                Some(p) if p < n => p,
                _ => break,
            };
            v.set(pos, true);
            pos += 1;
        }
    } else {
        for j in 0..n {
            if rng.bernoulli(gamma) {
                v.set(j, true);
            }
        }
    }
    v
}

/// A selected sub-family of coordinates: an ordered tuple of `p` distinct
/// indices from `[k]`, a position `ell` in the tuple, and (for the AND
/// embedding only) a bit coordinate `j` in `[n]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoordinateSelection {
    pub indices: Vec<usize>,
    pub ell: usize,
    pub j: usize,
}

impl CoordinateSelection {
    pub fn new(indices: Vec<usize>, ell: usize, j: usize, n: usize, k: usize) -> Result<Self, InstanceError> {
        let p = indices.len();
        if p == 0 || p > k {
            return Err(InstanceError::BadParameter("need 1 <= p <= k"));
        }
        if ell >= p || j >= n {
            return Err(InstanceError::BadParameter("ell or j out of range"));
        }
        for (a, &ia) in indices.iter().enumerate() {
            if ia >= k || indices[a + 1..].contains(&ia) {
                return Err(InstanceError::BadParameter("indices must be distinct and in [k]"));
            }
        }
        Ok(CoordinateSelection { indices, ell, j })
    }

    pub fn p(&self) -> usize {
        self.indices.len()
    }

    /// The selected query index `I_ell`.
    pub fn chosen(&self) -> usize {
        self.indices[self.ell]
    }

    /// Uniform sample: ordered distinct `p`-tuple, uniform `ell` and `j`.
    pub fn sample(n: usize, k: usize, p: usize, rng: &mut CounterRng) -> Self {
        let mut scratch = Vec::new();
        rng.distinct_tuple(k, p, &mut scratch);
        let ell = rng.gen_range(p as u64) as usize;
        let j = rng.gen_range(n as u64) as usize;
        CoordinateSelection { indices: scratch, ell, j }
    }
}

/// All ordered distinct `p`-tuples over `[k]`, in lexicographic order.
/// Enumeration oracles iterate this to average over selections exactly.
pub fn all_ordered_tuples(k: usize, p: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(p);
    fn rec(k: usize, p: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == p {
            out.push(cur.clone());
            return;
        }
        for i in 0..k {
            if !cur.contains(&i) {
                cur.push(i);
                rec(k, p, cur, out);
                cur.pop();
            }
        }
    }
    rec(k, p, &mut cur, &mut out);
    out
}
