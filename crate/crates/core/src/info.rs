//! Exact entropy, mutual information and KL divergence over dense finite
//! joint distributions.
//!
//! Conventions, fixed once for the whole workspace: logs are base 2 (values
//! are bits), `0·log 0 = 0`, and `μ(x) > 0` with `ν(x) = 0` makes the
//! divergence `+∞`. Identities are checked against an absolute tolerance of
//! `1e-9`; tables are dense and capped at `2^24` entries, so every quantity
//! is an exact finite sum in f64.

use crate::rng::CounterRng;
use alloc::string::String;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

/// Absolute tolerance for identities and normalization checks.
pub const IDENTITY_TOL: f64 = 1e-9;

/// Hard cap on dense table size.
pub const MAX_ENTRIES: usize = 1 << 24;

const LN2: f64 = core::f64::consts::LN_2;

#[derive(Debug, Clone, PartialEq)]
pub enum InfoError {
    UnknownVariable(String),
    DuplicateVariable(String),
    OverlappingSets,
    SignatureMismatch,
    ZeroMassEvent,
    BadMass { index: usize, value: f64 },
    NotNormalized { total: f64 },
    TooLarge { entries: usize },
    EmptyVariable(String),
}

impl fmt::Display for InfoError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InfoError::UnknownVariable(n) => write!(f, "unknown variable: {n}"),
            InfoError::DuplicateVariable(n) => write!(f, "duplicate variable: {n}"),
            InfoError::OverlappingSets => write!(f, "variable sets must be pairwise disjoint"),
            InfoError::SignatureMismatch => write!(f, "tables have different variable signatures"),
            InfoError::ZeroMassEvent => write!(f, "conditioning event has zero mass"),
            InfoError::BadMass { index, value } => write!(f, "entry {index} has invalid mass {value}"),
            InfoError::NotNormalized { total } => write!(f, "total mass {total} is not within 1e-9 of 1"),
            InfoError::TooLarge { entries } => write!(f, "table with {entries} entries exceeds the 2^24 cap"),
            InfoError::EmptyVariable(n) => write!(f, "variable {n} has empty alphabet"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for InfoError {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variable {
    pub name: String,
    pub size: usize,
}

/// Dense probability table over named finite-alphabet variables,
/// row-major with the first variable slowest.
#[derive(Debug, Clone, PartialEq)]
pub struct JointTable {
    vars: Vec<Variable>,
    probs: Vec<f64>,
}

impl JointTable {
    pub fn new(vars: Vec<(String, usize)>, probs: Vec<f64>) -> Result<Self, InfoError> {
        let mut seen: Vec<&str> = Vec::new();
        let mut total_entries = 1usize;
        for (name, size) in &vars {
            if *size == 0 {
                return Err(InfoError::EmptyVariable(name.clone()));
            }
            if seen.contains(&name.as_str()) {
                return Err(InfoError::DuplicateVariable(name.clone()));
            }
            seen.push(name);
            total_entries = total_entries.saturating_mul(*size);
            if total_entries > MAX_ENTRIES {
                return Err(InfoError::TooLarge { entries: total_entries });
            }
        }
        if probs.len() != total_entries {
            return Err(InfoError::BadMass { index: probs.len(), value: f64::NAN });
        }
        let mut total = 0.0;
        for (i, &p) in probs.iter().enumerate() {
            if p.is_nan() || p < 0.0 || !p.is_finite() {
                return Err(InfoError::BadMass { index: i, value: p });
            }
            total += p;
        }
        if (total - 1.0).abs() > IDENTITY_TOL {
            return Err(InfoError::NotNormalized { total });
        }
        let vars = vars.into_iter().map(|(name, size)| Variable { name, size }).collect();
        Ok(JointTable { vars, probs })
    }

    /// Single Bernoulli(p) bit named `name`.
    pub fn bernoulli(name: &str, p: f64) -> Result<Self, InfoError> {
        Self::new(vec![(name.to_string(), 2)], vec![1.0 - p, p])
    }

    /// Copy with one mass scaled and no renormalization. Valid distributions
    /// satisfy every information identity, so falsification harnesses plant
    /// defects by corrupting the mass vector itself; nothing else may build
    /// an unnormalized table.
    pub fn with_corrupted_mass(&self, index: usize, factor: f64) -> JointTable {
        let mut probs = self.probs.clone();
        probs[index] *= factor;
        JointTable { vars: self.vars.clone(), probs }
    }

    /// Product of independent Bernoulli bits.
    pub fn product_bits(bits: &[(&str, f64)]) -> Result<Self, InfoError> {
        let vars: Vec<(String, usize)> = bits.iter().map(|(n, _)| (n.to_string(), 2)).collect();
        let total = 1usize << bits.len();
        let mut probs = vec![0.0; total];
        for (idx, slot) in probs.iter_mut().enumerate() {
            let mut p = 1.0;
            for (pos, (_, q)) in bits.iter().enumerate() {
                // first variable is the slowest digit
                let bit = idx >> (bits.len() - 1 - pos) & 1;
                p *= if bit == 1 { *q } else { 1.0 - *q };
            }
            *slot = p;
        }
        Self::new(vars, probs)
    }

    /// Two perfectly correlated uniform bits named `x` and `y`.
    pub fn copy_pair(x: &str, y: &str) -> Result<Self, InfoError> {
        Self::new(
            vec![(x.to_string(), 2), (y.to_string(), 2)],
            vec![0.5, 0.0, 0.0, 0.5],
        )
    }

    /// Seeded random table for the verification corpus: 3-4 variables with
    /// alphabet sizes in 2..=4, masses drawn from a flat Dirichlet.
    pub fn random_for_seed(seed: u64) -> Self {
        let mut rng = CounterRng::new(seed ^ 0x1AB0_7ABE);
        let nvars = 3 + (rng.gen_range(2) as usize);
        let vars: Vec<(String, usize)> = (0..nvars)
            .map(|i| {
                let mut name = String::from("V");
                name.push((b'0' + i as u8) as char);
                (name, 2 + rng.gen_range(3) as usize)
            })
            .collect();
        let entries: usize = vars.iter().map(|(_, s)| s).product();
        // exponential spacings normalize to a uniform point on the simplex
        let mut probs: Vec<f64> = (0..entries).map(|_| -libm::log(1.0 - rng.next_f64())).collect();
        let total: f64 = probs.iter().sum();
        for p in &mut probs {
            *p /= total;
        }
        Self::new(vars, probs).expect("random table is well-formed")
    }

    pub fn variables(&self) -> &[Variable] {
        &self.vars
    }

    pub fn masses(&self) -> &[f64] {
        &self.probs
    }

    pub fn entry_count(&self) -> usize {
        self.probs.len()
    }

    fn var_index(&self, name: &str) -> Result<usize, InfoError> {
        self.vars
            .iter()
            .position(|v| v.name == name)
            .ok_or_else(|| InfoError::UnknownVariable(name.to_string()))
    }

    fn resolve(&self, names: &[&str]) -> Result<Vec<usize>, InfoError> {
        let mut out = Vec::with_capacity(names.len());
        for &n in names {
            let i = self.var_index(n)?;
            if out.contains(&i) {
                return Err(InfoError::DuplicateVariable(n.to_string()));
            }
            out.push(i);
        }
        out.sort_unstable();
        Ok(out)
    }

    fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1usize; self.vars.len()];
        for i in (0..self.vars.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.vars[i + 1].size;
        }
        strides
    }

    /// Dense marginal over the variables at `keep` (sorted indices), in that
    /// order.
    fn marginal_dense(&self, keep: &[usize]) -> Vec<f64> {
        let strides = self.strides();
        let out_len: usize = keep.iter().map(|&i| self.vars[i].size).product();
        let mut out = vec![0.0; out_len];
        for (idx, &p) in self.probs.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let mut oidx = 0usize;
            for &vi in keep {
                let digit = idx / strides[vi] % self.vars[vi].size;
                oidx = oidx * self.vars[vi].size + digit;
            }
            out[oidx] += p;
        }
        out
    }

    fn entropy_of_dense(dist: &[f64]) -> f64 {
        let mut h = 0.0;
        for &p in dist {
            if p > 0.0 {
                h -= p * libm::log2(p);
            }
        }
        h
    }

    fn joint_entropy(&self, keep: &[usize]) -> f64 {
        if keep.is_empty() {
            return 0.0;
        }
        Self::entropy_of_dense(&self.marginal_dense(keep))
    }

    /// Conditional entropy `H(vars | given)` in bits.
    pub fn entropy(&self, vars: &[&str], given: &[&str]) -> Result<f64, InfoError> {
        let a = self.resolve(vars)?;
        let b = self.resolve(given)?;
        if a.iter().any(|i| b.contains(i)) {
            return Err(InfoError::OverlappingSets);
        }
        let mut ab = a.clone();
        ab.extend_from_slice(&b);
        ab.sort_unstable();
        Ok(self.joint_entropy(&ab) - self.joint_entropy(&b))
    }

    /// Conditional mutual information `I(A;B|C) = H(A|C) - H(A|BC)` in bits.
    pub fn mutual_information(&self, a: &[&str], b: &[&str], c: &[&str]) -> Result<f64, InfoError> {
        let ia = self.resolve(a)?;
        let ib = self.resolve(b)?;
        let ic = self.resolve(c)?;
        for x in &ia {
            if ib.contains(x) || ic.contains(x) {
                return Err(InfoError::OverlappingSets);
            }
        }
        for x in &ib {
            if ic.contains(x) {
                return Err(InfoError::OverlappingSets);
            }
        }
        let union = |xs: &[usize], ys: &[usize]| {
            let mut u: Vec<usize> = xs.iter().chain(ys).copied().collect();
            u.sort_unstable();
            u
        };
        let ac = union(&ia, &ic);
        let bc = union(&ib, &ic);
        let abc = union(&ac, &ib);
        // H(A|C) - H(A|BC) = H(AC) - H(C) - H(ABC) + H(BC)
        Ok(self.joint_entropy(&ac) - self.joint_entropy(&ic) - self.joint_entropy(&abc)
            + self.joint_entropy(&bc))
    }

    /// KL divergence `D(self || other)` in bits; `+∞` when `self` puts mass
    /// outside `other`'s support.
    pub fn kl(&self, other: &JointTable) -> Result<f64, InfoError> {
        if self.vars != other.vars {
            return Err(InfoError::SignatureMismatch);
        }
        let mut d = 0.0;
        for (&p, &q) in self.probs.iter().zip(&other.probs) {
            if p > 0.0 {
                if q == 0.0 {
                    return Ok(f64::INFINITY);
                }
                d += p * libm::log2(p / q);
            }
        }
        Ok(d)
    }

    /// Residual of the identity `I(A;B|C) = E_{B,C}[ D( A|_{B,C} || A|_C ) ]`.
    pub fn kl_mi_identity_residual(&self, a: &[&str], b: &[&str], c: &[&str]) -> Result<f64, InfoError> {
        let mi = self.mutual_information(a, b, c)?;
        let ia = self.resolve(a)?;
        let ib = self.resolve(b)?;
        let ic = self.resolve(c)?;

        // dense tables over (A,B,C), (A,C), (B,C), (C) with A-digit fastest
        let mut order: Vec<usize> = Vec::new();
        order.extend(&ib);
        order.extend(&ic);
        order.extend(&ia);
        // marginal_dense wants sorted indices; build our own accumulation to
        // control the digit order (B, C slow; A fast).
        let strides = self.strides();
        let size_of = |vi: usize| self.vars[vi].size;
        let a_len: usize = ia.iter().map(|&i| size_of(i)).product();
        let bc_len: usize =
            ib.iter().chain(&ic).map(|&i| size_of(i)).product::<usize>().max(1);
        let c_len: usize = ic.iter().map(|&i| size_of(i)).product::<usize>().max(1);

        let mut p_abc = vec![0.0; bc_len * a_len];
        let mut p_ac = vec![0.0; c_len * a_len];
        for (idx, &p) in self.probs.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let digit = |vi: usize| idx / strides[vi] % size_of(vi);
            let mut aidx = 0usize;
            for &vi in &ia {
                aidx = aidx * size_of(vi) + digit(vi);
            }
            let mut cidx = 0usize;
            for &vi in &ic {
                cidx = cidx * size_of(vi) + digit(vi);
            }
            let mut bcidx = 0usize;
            for &vi in ib.iter().chain(&ic) {
                bcidx = bcidx * size_of(vi) + digit(vi);
            }
            p_abc[bcidx * a_len + aidx] += p;
            p_ac[cidx * a_len + aidx] += p;
        }
        let p_bc: Vec<f64> = (0..bc_len)
            .map(|i| p_abc[i * a_len..(i + 1) * a_len].iter().sum())
            .collect();
        let p_c: Vec<f64> = (0..c_len)
            .map(|i| p_ac[i * a_len..(i + 1) * a_len].iter().sum())
            .collect();

        // E_{B,C}[ KL( A|b,c || A|c ) ]; the C digits are the low digits of
        // the (B,C) index.
        let mut expectation = 0.0;
        for bc in 0..bc_len {
            let w = p_bc[bc];
            if w == 0.0 {
                continue;
            }
            let cidx = bc % c_len;
            let wc = p_c[cidx];
            for ai in 0..a_len {
                let pab = p_abc[bc * a_len + ai];
                if pab > 0.0 {
                    let cond_abc = pab / w;
                    let cond_ac = p_ac[cidx * a_len + ai] / wc;
                    expectation += w * cond_abc * libm::log2(cond_abc / cond_ac);
                }
            }
        }
        Ok((mi - expectation).abs())
    }

    /// Marginal table over `keep`, preserving the table's variable order.
    pub fn marginalize_onto(&self, keep: &[&str]) -> Result<JointTable, InfoError> {
        let idx = self.resolve(keep)?;
        let probs = self.marginal_dense(&idx);
        let vars = idx
            .iter()
            .map(|&i| (self.vars[i].name.clone(), self.vars[i].size))
            .collect();
        JointTable::new(vars, probs)
    }

    /// Conditions on `assignments` and renormalizes; the conditioned
    /// variables are removed from the result.
    pub fn condition(&self, assignments: &[(&str, usize)]) -> Result<JointTable, InfoError> {
        let mut fixed: Vec<(usize, usize)> = Vec::new();
        for &(name, value) in assignments {
            let vi = self.var_index(name)?;
            if fixed.iter().any(|&(v, _)| v == vi) {
                return Err(InfoError::DuplicateVariable(name.to_string()));
            }
            if value >= self.vars[vi].size {
                return Err(InfoError::BadMass { index: value, value: f64::NAN });
            }
            fixed.push((vi, value));
        }
        let keep: Vec<usize> =
            (0..self.vars.len()).filter(|i| !fixed.iter().any(|&(v, _)| v == *i)).collect();
        let strides = self.strides();
        let out_len: usize = keep.iter().map(|&i| self.vars[i].size).product::<usize>().max(1);
        let mut out = vec![0.0; out_len];
        let mut mass = 0.0;
        for (idx, &p) in self.probs.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            if fixed.iter().any(|&(vi, val)| idx / strides[vi] % self.vars[vi].size != val) {
                continue;
            }
            let mut oidx = 0usize;
            for &vi in &keep {
                oidx = oidx * self.vars[vi].size + idx / strides[vi] % self.vars[vi].size;
            }
            out[oidx] += p;
            mass += p;
        }
        if mass <= 0.0 {
            return Err(InfoError::ZeroMassEvent);
        }
        for p in &mut out {
            *p /= mass;
        }
        let vars = keep
            .iter()
            .map(|&i| (self.vars[i].name.clone(), self.vars[i].size))
            .collect();
        JointTable::new(vars, out)
    }

    /// Runs the standard information-identity checks over all eligible
    /// variable combinations of this table.
    pub fn verify_facts(&self) -> FactReport {
        let names: Vec<&str> = self.vars.iter().map(|v| v.name.as_str()).collect();
        let nv = names.len();
        let mut report = FactReport::default();

        // conditioning decreases entropy: H(X) >= H(X|Y)
        for x in 0..nv {
            for y in 0..nv {
                if x == y {
                    continue;
                }
                let h = self.entropy(&[names[x]], &[]).unwrap();
                let hc = self.entropy(&[names[x]], &[names[y]]).unwrap();
                report.conditioning.observe(h - hc, -IDENTITY_TOL, names[x], names[y]);
            }
        }

        // KL-MI identity residual
        for a in 0..nv {
            for b in 0..nv {
                if a == b {
                    continue;
                }
                for c in conditioning_choices(nv, &[a, b]) {
                    let cset: Vec<&str> = c.iter().map(|&i| names[i]).collect();
                    let r = self.kl_mi_identity_residual(&[names[a]], &[names[b]], &cset).unwrap();
                    report.kl_mi.observe(IDENTITY_TOL - r, 0.0, names[a], names[b]);
                }
            }
        }

        // chain rule: I(AD;B|C) = I(D;B|C) + I(A;B|CD)
        if nv >= 3 {
            for a in 0..nv {
                for b in 0..nv {
                    for d in 0..nv {
                        if a == b || a == d || b == d {
                            continue;
                        }
                        for c in conditioning_choices(nv, &[a, b, d]) {
                            let cset: Vec<&str> = c.iter().map(|&i| names[i]).collect();
                            let mut cd = cset.clone();
                            cd.push(names[d]);
                            let lhs = self
                                .mutual_information(&[names[a], names[d]], &[names[b]], &cset)
                                .unwrap();
                            let rhs = self.mutual_information(&[names[d]], &[names[b]], &cset).unwrap()
                                + self.mutual_information(&[names[a]], &[names[b]], &cd).unwrap();
                            report.chain_rule.observe(
                                IDENTITY_TOL - (lhs - rhs).abs(),
                                0.0,
                                names[a],
                                names[b],
                            );
                        }
                    }
                }
            }
        }

        // monotonicity under an independent / conditionally independent D
        if nv >= 3 {
            for a in 0..nv {
                for b in 0..nv {
                    for d in 0..nv {
                        if a == b || a == d || b == d {
                            continue;
                        }
                        for c in conditioning_choices(nv, &[a, b, d]) {
                            let cset: Vec<&str> = c.iter().map(|&i| names[i]).collect();
                            let mut cd = cset.clone();
                            cd.push(names[d]);
                            let base = self.mutual_information(&[names[a]], &[names[b]], &cset).unwrap();
                            let refined =
                                self.mutual_information(&[names[a]], &[names[b]], &cd).unwrap();

                            let hyp_bd_c =
                                self.mutual_information(&[names[b]], &[names[d]], &cset).unwrap();
                            if hyp_bd_c.abs() <= IDENTITY_TOL {
                                report.grow_under_indep.observe(
                                    refined - base + IDENTITY_TOL,
                                    0.0,
                                    names[a],
                                    names[b],
                                );
                            }

                            let mut ac = cset.clone();
                            ac.push(names[a]);
                            let hyp_bd_ac =
                                self.mutual_information(&[names[b]], &[names[d]], &ac).unwrap();
                            if hyp_bd_ac.abs() <= IDENTITY_TOL {
                                report.shrink_under_indep.observe(
                                    base - refined + IDENTITY_TOL,
                                    0.0,
                                    names[a],
                                    names[b],
                                );
                            }
                        }
                    }
                }
            }
        }
        report
    }
}

fn conditioning_choices(nv: usize, used: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for c in 0..nv {
        if !used.contains(&c) {
            out.push(vec![c]);
        }
    }
    out
}

/// Outcome of one fact across the combinations it was checked on.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FactStatus {
    pub checked: usize,
    /// Worst observed slack (negative means violated).
    pub worst_slack: f64,
    pub violation: Option<(String, String)>,
}

impl FactStatus {
    fn observe(&mut self, slack: f64, floor: f64, a: &str, b: &str) {
        if self.checked == 0 || slack < self.worst_slack {
            self.worst_slack = slack;
        }
        self.checked += 1;
        if slack < floor && self.violation.is_none() {
            self.violation = Some((a.to_string(), b.to_string()));
        }
    }

    pub fn verdict(&self) -> FactVerdict {
        if self.checked == 0 {
            FactVerdict::NotApplicable
        } else if self.violation.is_none() {
            FactVerdict::Satisfied
        } else {
            FactVerdict::Violated
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FactVerdict {
    Satisfied,
    Violated,
    NotApplicable,
}

/// Per-fact verdicts for one table.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FactReport {
    /// `H(X) >= H(X|Y)`.
    pub conditioning: FactStatus,
    /// `I(A;B|C) = E_{B,C}[D(A|bc || A|c)]`.
    pub kl_mi: FactStatus,
    /// `I(AD;B|C) = I(D;B|C) + I(A;B|CD)`.
    pub chain_rule: FactStatus,
    /// `I(A;B|C) <= I(A;B|CD)` when `I(B;D|C) = 0`.
    pub grow_under_indep: FactStatus,
    /// `I(A;B|C) >= I(A;B|CD)` when `I(B;D|AC) = 0`.
    pub shrink_under_indep: FactStatus,
}

impl FactReport {
    pub fn all_satisfied_or_na(&self) -> bool {
        [
            &self.conditioning,
            &self.kl_mi,
            &self.chain_rule,
            &self.grow_under_indep,
            &self.shrink_under_indep,
        ]
        .iter()
        .all(|s| s.verdict() != FactVerdict::Violated)
    }
}

/// A pair of Bernoulli parameters compared under KL divergence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BernoulliPair {
    pub q: f64,
    pub p: f64,
}

impl BernoulliPair {
    pub fn new(q: f64, p: f64) -> Result<Self, InfoError> {
        if !(0.0..=1.0).contains(&q) || !(0.0..=1.0).contains(&p) {
            return Err(InfoError::BadMass { index: 0, value: q.min(p) });
        }
        Ok(BernoulliPair { q, p })
    }

    pub fn kl(&self) -> f64 {
        kl_bernoulli(self.q, self.p)
    }
}

/// `D(B_q || B_p)` in bits, evaluated in a cancellation-safe form.
pub fn kl_bernoulli(q: f64, p: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&q) && (0.0..=1.0).contains(&p));
    if q == 0.0 {
        return if p == 1.0 { f64::INFINITY } else { -libm::log1p(-p) / LN2 };
    }
    if q == 1.0 {
        return if p == 0.0 { f64::INFINITY } else { -libm::log(p) / LN2 };
    }
    if p == 0.0 || p == 1.0 {
        return f64::INFINITY;
    }
    let t1 = q * (libm::log(q) - libm::log(p)) / LN2;
    let t2 = (1.0 - q) * (libm::log1p(-q) - libm::log1p(-p)) / LN2;
    t1 + t2
}

/// Binary entropy `h(p)` in bits.
pub fn binary_entropy(p: f64) -> f64 {
    let mut h = 0.0;
    if p > 0.0 {
        h -= p * libm::log2(p);
    }
    if p < 1.0 {
        h -= (1.0 - p) * libm::log2(1.0 - p);
    }
    h
}
