//! Packed bit vectors and word-size helpers shared by all modules.
//!
//! Vectors of up to 64 bits are stored inline; longer ones spill to the heap.
//! The inline case matters: exhaustive sweeps construct billions of toy
//! vectors and must not allocate.

use alloc::vec::Vec;
use core::fmt;

/// Word size in bits used for probe accounting: `max{ceil(log2 n), ceil(log2 k)} + 1`.
///
/// One cell-probe moves one `w`-bit word. The same formula is reused by the
/// circuit translation (with `r` in place of `k`).
pub fn default_word_size(n: usize, k: usize) -> u32 {
    core::cmp::max(ceil_log2(n), ceil_log2(k)) + 1
}

/// `ceil(log2(x))` with the convention `ceil_log2(0) = ceil_log2(1) = 0`.
pub fn ceil_log2(x: usize) -> u32 {
    match x {
        0 | 1 => 0,
        _ => usize::BITS - (x - 1).leading_zeros(),
    }
}

/// `floor(sqrt(n))` over integers.
pub fn isqrt(n: usize) -> usize {
    if n < 2 {
        return n;
    }
    let mut x = n;
    let mut y = x.div_ceil(2);
    while y < x {
        x = y;
        y = (x + n / x) / 2;
    }
    x
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
enum Words {
    Inline(u64),
    Heap(Vec<u64>),
}

/// Fixed-length bit vector, LSB-first within 64-bit storage words.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BitVec {
    len: usize,
    words: Words,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        let words = if len <= 64 {
            Words::Inline(0)
        } else {
            Words::Heap(alloc::vec![0u64; len.div_ceil(64)])
        };
        BitVec { len, words }
    }

    /// Builds a vector of `len <= 64` bits from a packed mask.
    pub fn from_mask(len: usize, mask: u64) -> Self {
        debug_assert!(len <= 64);
        let keep = if len == 64 { !0 } else { (1u64 << len) - 1 };
        BitVec { len, words: Words::Inline(mask & keep) }
    }

    pub fn from_indices(len: usize, ones: &[usize]) -> Self {
        let mut v = Self::zeros(len);
        for &j in ones {
            v.set(j, true);
        }
        v
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    fn word_slice(&self) -> &[u64] {
        match &self.words {
            Words::Inline(w) => core::slice::from_ref(w),
            Words::Heap(v) => v,
        }
    }

    fn word_slice_mut(&mut self) -> &mut [u64] {
        match &mut self.words {
            Words::Inline(w) => core::slice::from_mut(w),
            Words::Heap(v) => v,
        }
    }

    pub fn get(&self, idx: usize) -> bool {
        assert!(idx < self.len, "bit index {idx} out of range (len {})", self.len);
        self.word_slice()[idx / 64] >> (idx % 64) & 1 == 1
    }

    pub fn set(&mut self, idx: usize, value: bool) {
        assert!(idx < self.len, "bit index {idx} out of range (len {})", self.len);
        let w = &mut self.word_slice_mut()[idx / 64];
        if value {
            *w |= 1 << (idx % 64);
        } else {
            *w &= !(1 << (idx % 64));
        }
    }

    /// Overwrites all bits from a packed mask; only valid for `len <= 64`.
    pub fn assign_mask(&mut self, mask: u64) {
        assert!(self.len <= 64);
        let keep = if self.len == 64 { !0 } else { (1u64 << self.len) - 1 };
        match &mut self.words {
            Words::Inline(w) => *w = mask & keep,
            Words::Heap(v) => v[0] = mask & keep,
        }
    }

    /// Packed mask of a vector with `len <= 64`.
    pub fn as_mask(&self) -> u64 {
        assert!(self.len <= 64);
        self.word_slice()[0]
    }

    pub fn count_ones(&self) -> usize {
        self.word_slice().iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn intersects(&self, other: &BitVec) -> bool {
        debug_assert_eq!(self.len, other.len);
        self.word_slice()
            .iter()
            .zip(other.word_slice())
            .any(|(a, b)| a & b != 0)
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.word_slice().iter().enumerate().flat_map(|(wi, &w)| {
            let mut rem = w;
            core::iter::from_fn(move || {
                if rem == 0 {
                    return None;
                }
                let b = rem.trailing_zeros() as usize;
                rem &= rem - 1;
                Some(wi * 64 + b)
            })
        })
    }

    /// Extracts `width <= 64` bits starting at `bit`, zero-padded past the end.
    pub fn extract(&self, bit: usize, width: u32) -> u64 {
        debug_assert!(width <= 64);
        if bit >= self.len || width == 0 {
            return 0;
        }
        let take = (width as usize).min(self.len - bit) as u32;
        let words = self.word_slice();
        let wi = bit / 64;
        let off = (bit % 64) as u32;
        let mut out = words[wi] >> off;
        if off + take > 64 {
            out |= words[wi + 1] << (64 - off);
        }
        if take < 64 {
            out &= (1u64 << take) - 1;
        }
        out
    }

    /// The `w`-bit word holding bits `[chunk*w, (chunk+1)*w)` of this vector.
    pub fn chunk_word(&self, chunk: usize, w: u32) -> u64 {
        self.extract(chunk * w as usize, w)
    }

    /// Number of `w`-bit words needed to hold this vector.
    pub fn chunk_count(&self, w: u32) -> usize {
        self.len.div_ceil(w as usize)
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            write!(f, "{}", if self.get(i) { '1' } else { '0' })?;
        }
        Ok(())
    }
}

/// Growable bit string used for message payloads and dictionary keys.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BitString {
    bits: Vec<bool>,
}

impl BitString {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn push(&mut self, bit: bool) {
        self.bits.push(bit);
    }

    /// Appends `width` bits of `value`, LSB first.
    pub fn push_uint(&mut self, value: u64, width: u32) {
        for off in 0..width {
            self.bits.push(value >> off & 1 == 1);
        }
    }

    pub fn push_bitvec(&mut self, v: &BitVec) {
        for i in 0..v.len() {
            self.bits.push(v.get(i));
        }
    }

    pub fn extend(&mut self, other: &BitString) {
        self.bits.extend_from_slice(&other.bits);
    }

    pub fn get(&self, idx: usize) -> bool {
        self.bits[idx]
    }

    /// Reads `width` bits starting at `at`, LSB first.
    pub fn read_uint(&self, at: usize, width: u32) -> u64 {
        let mut out = 0u64;
        for off in 0..width as usize {
            if self.bits[at + off] {
                out |= 1 << off;
            }
        }
        out
    }

    pub fn last(&self) -> Option<bool> {
        self.bits.last().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        self.bits.iter().copied()
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            write!(f, "{}", if b { '1' } else { '0' })?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn word_size_matches_formula() {
        assert_eq!(default_word_size(16, 2), 5); // max{4,1}+1
        assert_eq!(default_word_size(6, 4), 4); // max{3,2}+1
        assert_eq!(default_word_size(1, 1), 1);
        assert_eq!(default_word_size(1 << 14, 256), 15);
    }

    #[test]
    fn ceil_log2_small_values() {
        let expect = [(0, 0), (1, 0), (2, 1), (3, 2), (4, 2), (5, 3), (8, 3), (9, 4)];
        for (x, e) in expect {
            assert_eq!(ceil_log2(x), e, "x = {x}");
        }
    }

    #[test]
    fn isqrt_agrees_with_float() {
        for n in 0..2000usize {
            let f = libm::sqrt(n as f64) as usize;
            assert!((isqrt(n) as i64 - f as i64).abs() <= 1);
            assert!(isqrt(n) * isqrt(n) <= n);
            assert!((isqrt(n) + 1) * (isqrt(n) + 1) > n);
        }
    }

    #[test]
    fn inline_and_heap_agree() {
        let mut a = BitVec::zeros(64);
        let mut b = BitVec::zeros(65);
        for idx in [0usize, 3, 17, 63] {
            a.set(idx, true);
            b.set(idx, true);
        }
        b.set(64, true);
        assert_eq!(a.count_ones(), 4);
        assert_eq!(b.count_ones(), 5);
        assert_eq!(a.iter_ones().collect::<Vec<_>>(), [0, 3, 17, 63]);
        assert!(b.get(64));
    }

    #[test]
    fn chunk_words_round_trip() {
        let v = BitVec::from_indices(10, &[0, 3, 9]);
        assert_eq!(v.chunk_count(4), 3);
        assert_eq!(v.chunk_word(0, 4), 0b1001);
        assert_eq!(v.chunk_word(1, 4), 0b0000);
        assert_eq!(v.chunk_word(2, 4), 0b10);
    }

    #[test]
    fn bitstring_uint_round_trip() {
        let mut s = BitString::new();
        s.push_uint(0b1011, 4);
        s.push_uint(7, 3);
        assert_eq!(s.len(), 7);
        assert_eq!(s.read_uint(0, 4), 0b1011);
        assert_eq!(s.read_uint(4, 3), 7);
    }
}
