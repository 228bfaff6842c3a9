//! Exact-rational referee for small joint tables.
//!
//! Zero-mutual-information and zero-conditional-entropy claims reduce to
//! factorization and point-mass structure, which are decidable exactly when
//! all masses share a common integer denominator (as they do for enumerated
//! protocol distributions with rational γ). Entropic quantities themselves
//! stay in f64; this module only referees the structural claims that
//! tolerances could otherwise blur.

use crate::info::{InfoError, JointTable};
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

/// Entry cap for the exact backend.
pub const MAX_EXACT_ENTRIES: usize = 1 << 16;

/// Dense table of masses `nums[i] / den` over named finite variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalTable {
    names: Vec<String>,
    sizes: Vec<usize>,
    nums: Vec<u128>,
    den: u128,
}

impl RationalTable {
    pub fn new(vars: Vec<(String, usize)>, nums: Vec<u128>, den: u128) -> Result<Self, InfoError> {
        let entries: usize = vars.iter().map(|(_, s)| *s).product();
        if entries > MAX_EXACT_ENTRIES {
            return Err(InfoError::TooLarge { entries });
        }
        if nums.len() != entries || den == 0 {
            return Err(InfoError::BadMass { index: nums.len(), value: f64::NAN });
        }
        let total: u128 = nums.iter().fold(0u128, |acc, &x| acc.checked_add(x).expect("mass overflow"));
        if total != den {
            return Err(InfoError::NotNormalized { total: total as f64 / den as f64 });
        }
        let mut names = Vec::new();
        let mut sizes = Vec::new();
        for (n, s) in vars {
            if names.contains(&n) {
                return Err(InfoError::DuplicateVariable(n));
            }
            names.push(n);
            sizes.push(s);
        }
        Ok(RationalTable { names, sizes, nums, den })
    }

    pub fn den(&self) -> u128 {
        self.den
    }

    fn var_index(&self, name: &str) -> Result<usize, InfoError> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| InfoError::UnknownVariable(name.to_string()))
    }

    fn strides(&self) -> Vec<usize> {
        let mut s = vec![1usize; self.sizes.len()];
        for i in (0..self.sizes.len().saturating_sub(1)).rev() {
            s[i] = s[i + 1] * self.sizes[i + 1];
        }
        s
    }

    fn marginal(&self, keep: &[usize]) -> Vec<u128> {
        let strides = self.strides();
        let len: usize = keep.iter().map(|&i| self.sizes[i]).product::<usize>().max(1);
        let mut out = vec![0u128; len];
        for (idx, &m) in self.nums.iter().enumerate() {
            if m == 0 {
                continue;
            }
            let mut o = 0usize;
            for &vi in keep {
                o = o * self.sizes[vi] + idx / strides[vi] % self.sizes[vi];
            }
            out[o] += m;
        }
        out
    }

    fn resolve(&self, names: &[&str]) -> Result<Vec<usize>, InfoError> {
        names.iter().map(|n| self.var_index(n)).collect()
    }

    /// Exact test of `I(A;B|C) = 0`: for every cell,
    /// `p(abc)·p(c) == p(ac)·p(bc)` over the integers.
    pub fn is_conditionally_independent(
        &self,
        a: &[&str],
        b: &[&str],
        c: &[&str],
    ) -> Result<bool, InfoError> {
        let ia = self.resolve(a)?;
        let ib = self.resolve(b)?;
        let ic = self.resolve(c)?;
        let cat = |xs: &[usize], ys: &[usize]| {
            let mut v = xs.to_vec();
            v.extend_from_slice(ys);
            v
        };
        let abc = cat(&cat(&ia, &ib), &ic);
        let ac = cat(&ia, &ic);
        let bc = cat(&ib, &ic);
        let m_abc = self.marginal(&abc);
        let m_ac = self.marginal(&ac);
        let m_bc = self.marginal(&bc);
        let m_c = self.marginal(&ic);
        let asz: usize = ia.iter().map(|&i| self.sizes[i]).product::<usize>().max(1);
        let bsz: usize = ib.iter().map(|&i| self.sizes[i]).product::<usize>().max(1);
        let csz: usize = ic.iter().map(|&i| self.sizes[i]).product::<usize>().max(1);
        for av in 0..asz {
            for bv in 0..bsz {
                for cv in 0..csz {
                    let lhs = mul_wide(m_abc[(av * bsz + bv) * csz + cv], m_c[cv]);
                    let rhs = mul_wide(m_ac[av * csz + cv], m_bc[bv * csz + cv]);
                    if lhs != rhs {
                        return Ok(false);
                    }
                }
            }
        }
        Ok(true)
    }

    /// Exact test of `H(X | Given) = 0`: every positive-mass assignment of
    /// `Given` admits exactly one value of `X`.
    pub fn is_deterministic_given(&self, x: &[&str], given: &[&str]) -> Result<bool, InfoError> {
        let ix = self.resolve(x)?;
        let ig = self.resolve(given)?;
        let mut order = ig.clone();
        order.extend(&ix);
        let m = self.marginal(&order);
        let xsz: usize = ix.iter().map(|&i| self.sizes[i]).product::<usize>().max(1);
        let gsz: usize = ig.iter().map(|&i| self.sizes[i]).product::<usize>().max(1);
        for g in 0..gsz {
            let support = m[g * xsz..(g + 1) * xsz].iter().filter(|&&v| v > 0).count();
            if support > 1 {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Lossy conversion for entropic follow-up computation.
    pub fn to_joint(&self) -> Result<JointTable, InfoError> {
        let den = self.den as f64;
        let vars = self
            .names
            .iter()
            .zip(&self.sizes)
            .map(|(n, &s)| (n.clone(), s))
            .collect();
        let probs = self.nums.iter().map(|&m| m as f64 / den).collect();
        JointTable::new(vars, probs)
    }
}

/// 256-bit product of two u128 values as (hi, lo).
fn mul_wide(a: u128, b: u128) -> (u128, u128) {
    const MASK: u128 = (1u128 << 64) - 1;
    let (a_hi, a_lo) = (a >> 64, a & MASK);
    let (b_hi, b_lo) = (b >> 64, b & MASK);
    let ll = a_lo * b_lo;
    let lh = a_lo * b_hi;
    let hl = a_hi * b_lo;
    let hh = a_hi * b_hi;
    let mid = (ll >> 64) + (lh & MASK) + (hl & MASK);
    let lo = (mid & MASK) << 64 | (ll & MASK);
    let hi = hh + (lh >> 64) + (hl >> 64) + (mid >> 64);
    (hi, lo)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn vars(spec: &[(&str, usize)]) -> Vec<(String, usize)> {
        spec.iter().map(|(n, s)| (n.to_string(), *s)).collect()
    }

    #[test]
    fn wide_multiply_matches_small_cases() {
        assert_eq!(mul_wide(3, 5), (0, 15));
        let big = u128::MAX;
        let (hi, lo) = mul_wide(big, big);
        // (2^128 - 1)^2 = 2^256 - 2^129 + 1
        assert_eq!(lo, 1);
        assert_eq!(hi, big - 1);
    }

    #[test]
    fn product_table_is_independent_exactly() {
        // X ~ B(1/4), Y ~ B(1/3), independent: masses over (X,Y) with den 12
        let t = RationalTable::new(vars(&[("X", 2), ("Y", 2)]), vec![6, 3, 2, 1], 12).unwrap();
        assert!(t.is_conditionally_independent(&["X"], &["Y"], &[]).unwrap());
    }

    #[test]
    fn copy_table_is_dependent_and_deterministic() {
        let t = RationalTable::new(vars(&[("X", 2), ("Y", 2)]), vec![1, 0, 0, 1], 2).unwrap();
        assert!(!t.is_conditionally_independent(&["X"], &["Y"], &[]).unwrap());
        assert!(t.is_deterministic_given(&["X"], &["Y"]).unwrap());
        assert!(t.is_deterministic_given(&["Y"], &["X"]).unwrap());
    }

    #[test]
    fn conditional_independence_with_common_cause() {
        // Z uniform bit; X = Z, Y = Z: X and Y dependent, independent given Z
        let t = RationalTable::new(
            vars(&[("X", 2), ("Y", 2), ("Z", 2)]),
            vec![1, 0, 0, 0, 0, 0, 0, 1],
            2,
        )
        .unwrap();
        assert!(!t.is_conditionally_independent(&["X"], &["Y"], &[]).unwrap());
        assert!(t.is_conditionally_independent(&["X"], &["Y"], &["Z"]).unwrap());
    }

    #[test]
    fn float_bridge_preserves_masses() {
        let t = RationalTable::new(vars(&[("X", 2)]), vec![5, 7], 12).unwrap();
        let j = t.to_joint().unwrap();
        assert!((j.masses()[0] - 5.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_unnormalized_and_oversized() {
        assert!(RationalTable::new(vars(&[("X", 2)]), vec![1, 2], 4).is_err());
        assert!(RationalTable::new(vars(&[("X", 1 << 17)]), vec![], 1).is_err());
    }
}
