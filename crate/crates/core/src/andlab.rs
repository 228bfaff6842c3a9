//! Random processes computing the 2-bit AND, the protocol-to-AND embedding,
//! and the robust cut-and-paste verification machinery.
//!
//! A [`RandomProcess`] is a conditional distribution `p(z | x, y)` over a
//! finite alphabet together with an answer projection `z -> z_ans`, with the
//! inputs a-priori independent Bernoulli(γ). The embedding distills such a
//! process out of a protocol by planting `(X, Y)` in a random coordinate of
//! a random instance and collecting the transcript-valued conditioning
//! variables. The adversarial search then probes, at desk scale, whether a
//! correct low-information low-correlation process exists at all — the
//! bounded falsification of the cut-and-paste lower bound.

use crate::bits::BitString;
use crate::info::{kl_bernoulli, InfoError, JointTable};
use crate::instance::{all_ordered_tuples, MultiphaseInstance};
use crate::nof::{encode_bits, encode_transcript, run_protocol, EnumerationConfig, NofError, ProtocolFamily};
use crate::rng::CounterRng;
use alloc::collections::BTreeMap;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum AndLabError {
    BadKernel { row: usize, total: f64 },
    BadParameter(&'static str),
    AnswerClash { z: usize },
    Nof(NofError),
    Info(InfoError),
}

impl fmt::Display for AndLabError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AndLabError::BadKernel { row, total } => {
                write!(f, "kernel row {row} sums to {total}, not 1")
            }
            AndLabError::BadParameter(what) => write!(f, "invalid parameter: {what}"),
            AndLabError::AnswerClash { z } => {
                write!(f, "embedding assigned two different answers to z = {z}")
            }
            AndLabError::Nof(e) => write!(f, "protocol error: {e}"),
            AndLabError::Info(e) => write!(f, "info engine error: {e}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for AndLabError {}

impl From<NofError> for AndLabError {
    fn from(e: NofError) -> Self {
        AndLabError::Nof(e)
    }
}

impl From<InfoError> for AndLabError {
    fn from(e: InfoError) -> Self {
        AndLabError::Info(e)
    }
}

pub const ROW_TOL: f64 = 1e-9;

/// Conditional process `Z(X, Y)` with an answer projection. Row `xy` packs
/// `x` in the high bit: rows are ordered `(0,0), (0,1), (1,0), (1,1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomProcess {
    z_size: usize,
    kernel: [Vec<f64>; 4],
    ans: Vec<bool>,
    gamma: f64,
}

pub fn row_index(x: bool, y: bool) -> usize {
    (x as usize) << 1 | y as usize
}

impl RandomProcess {
    pub fn new(kernel: [Vec<f64>; 4], ans: Vec<bool>, gamma: f64) -> Result<Self, AndLabError> {
        let z_size = ans.len();
        if z_size == 0 {
            return Err(AndLabError::BadParameter("empty alphabet"));
        }
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(AndLabError::BadParameter("gamma must lie in (0, 1)"));
        }
        for (row, masses) in kernel.iter().enumerate() {
            if masses.len() != z_size {
                return Err(AndLabError::BadKernel { row, total: f64::NAN });
            }
            let mut total = 0.0;
            for &m in masses {
                if m.is_nan() || m < 0.0 {
                    return Err(AndLabError::BadKernel { row, total: m });
                }
                total += m;
            }
            if (total - 1.0).abs() > ROW_TOL {
                return Err(AndLabError::BadKernel { row, total });
            }
        }
        Ok(RandomProcess { z_size, kernel, ans, gamma })
    }

    pub fn z_size(&self) -> usize {
        self.z_size
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn kernel(&self) -> &[Vec<f64>; 4] {
        &self.kernel
    }

    pub fn ans(&self) -> &[bool] {
        &self.ans
    }

    /// Joint table over `(X, Y, Z)` = `B_γ ⊗ B_γ × kernel`.
    pub fn joint(&self) -> Result<JointTable, AndLabError> {
        let g = self.gamma;
        let px = [1.0 - g, g];
        let mut probs = vec![0.0f64; 2 * 2 * self.z_size];
        for x in 0..2 {
            for y in 0..2 {
                let w = px[x] * px[y];
                let row = &self.kernel[x << 1 | y];
                for (z, &m) in row.iter().enumerate() {
                    probs[(x * 2 + y) * self.z_size + z] = w * m;
                }
            }
        }
        JointTable::new(
            vec![("X".to_string(), 2), ("Y".to_string(), 2), ("Z".to_string(), self.z_size)],
            probs,
        )
        .map_err(AndLabError::Info)
    }

    /// The ideal process announcing `¬AND(X, Y)` through a two-letter
    /// alphabet; zero-error by construction.
    pub fn ideal_not_and(gamma: f64) -> Result<Self, AndLabError> {
        // z0 carries ans = 1, z1 carries ans = 0
        let kernel = [
            vec![1.0, 0.0],
            vec![1.0, 0.0],
            vec![1.0, 0.0],
            vec![0.0, 1.0],
        ];
        RandomProcess::new(kernel, vec![true, false], gamma)
    }

    /// The "announce Y" process: `Z = Y` with `ans = ¬y`. Feasible for the
    /// correctness contract exactly when `γ/(1+γ) <= 0.001`.
    pub fn announce_y(gamma: f64) -> Result<Self, AndLabError> {
        let kernel = [
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            vec![1.0, 0.0],
            vec![0.0, 1.0],
        ];
        RandomProcess::new(kernel, vec![true, false], gamma)
    }
}

/// The measured information and correctness profile of a process.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostProfile {
    pub i_zx: f64,
    pub i_zy: f64,
    pub i_xy_given_z: f64,
    /// `Pr[Z_ans = 1 | X = Y = 1]` (must be 0 for a correct process).
    pub err_and1: f64,
    /// `Pr[Z_ans = 0 | AND = 0]`.
    pub err_and0: f64,
    pub p_ans1: f64,
}

impl CostProfile {
    pub const FIELDS: [&'static str; 6] =
        ["i_zx", "i_zy", "i_xy_given_z", "err_and1", "err_and0", "p_ans1"];

    pub fn field(&self, idx: usize) -> f64 {
        [self.i_zx, self.i_zy, self.i_xy_given_z, self.err_and1, self.err_and0, self.p_ans1][idx]
    }
}

/// Exact profile through the info engine.
pub fn and_costs(process: &RandomProcess) -> Result<CostProfile, AndLabError> {
    let joint = process.joint()?;
    let i_zx = joint.mutual_information(&["Z"], &["X"], &[])?;
    let i_zy = joint.mutual_information(&["Z"], &["Y"], &[])?;
    let i_xy_given_z = joint.mutual_information(&["X"], &["Y"], &["Z"])?;
    let direct = profile_direct(process);
    Ok(CostProfile { i_zx, i_zy, i_xy_given_z, ..direct })
}

/// Closed-form profile used in search inner loops; must agree with
/// [`and_costs`] (tested).
pub fn profile_direct(process: &RandomProcess) -> CostProfile {
    let g = process.gamma;
    let px = [1.0 - g, g];
    let zs = process.z_size;
    let mut p_z = vec![0.0f64; zs];
    let mut p_zx = vec![0.0f64; zs * 2];
    let mut p_zy = vec![0.0f64; zs * 2];
    let mut h_xy_z = 0.0; // H(X,Y,Z) accumulator pieces
    let mut err_and0_mass = 0.0;
    let mut p_ans1 = 0.0;
    for x in 0..2 {
        for y in 0..2 {
            let w = px[x] * px[y];
            let row = &process.kernel[x << 1 | y];
            for (z, &m) in row.iter().enumerate() {
                let mass = w * m;
                if mass > 0.0 {
                    p_z[z] += mass;
                    p_zx[z * 2 + x] += mass;
                    p_zy[z * 2 + y] += mass;
                    h_xy_z -= mass * libm::log2(mass);
                }
                if !process.ans[z] {
                    if !(x == 1 && y == 1) {
                        err_and0_mass += mass;
                    }
                } else {
                    p_ans1 += mass;
                }
            }
        }
    }
    let h = |dist: &[f64]| -> f64 {
        dist.iter().filter(|&&p| p > 0.0).map(|&p| -p * libm::log2(p)).sum()
    };
    let h_z = h(&p_z);
    let h_zx = h(&p_zx);
    let h_zy = h(&p_zy);
    let h_x = h(&[1.0 - g, g]);
    let i_zx = h_z + h_x - h_zx;
    let i_zy = h_z + h_x - h_zy;
    // I(X;Y|Z) = H(XZ) + H(YZ) - H(Z) - H(XYZ)
    let i_xy_given_z = h_zx + h_zy - h_z - h_xy_z;
    let and0 = 1.0 - g * g;
    let err_and1 = process.kernel[3]
        .iter()
        .zip(&process.ans)
        .filter(|(_, &a)| a)
        .map(|(&m, _)| m)
        .sum();
    CostProfile {
        i_zx,
        i_zy,
        i_xy_given_z,
        err_and1,
        err_and0: err_and0_mass / and0,
        p_ans1,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ContractVerdict {
    pub pass: bool,
    pub err_and1_zero: bool,
    pub err_and0_ok: bool,
    pub p_ans1_ok: bool,
}

/// The correctness contract: one-sided error exactly zero,
/// `Pr[ans = 0 | AND = 0] <= 0.001` (the boundary passes), and
/// `Pr[ans = 1] >= 1/2`.
pub fn check_and_contract(process: &RandomProcess) -> ContractVerdict {
    let profile = profile_direct(process);
    let err_and1_zero = profile.err_and1 == 0.0;
    let err_and0_ok = profile.err_and0 <= 0.001;
    let p_ans1_ok = profile.p_ans1 >= 0.5;
    ContractVerdict {
        pass: err_and1_zero && err_and0_ok && p_ans1_ok,
        err_and1_zero,
        err_and0_ok,
        p_ans1_ok,
    }
}

// ---------------------------------------------------------------------------
// Embedding a protocol into an AND process
// ---------------------------------------------------------------------------

/// Result of distilling a protocol into an AND process.
pub struct EmbedOutcome {
    pub process: RandomProcess,
    /// max `|Π_i|` bits observed during the embedding runs.
    pub c_bits: usize,
    pub u_bits_max: usize,
    /// Whether the source protocol answered `DISJ` correctly on every run.
    pub zero_error: bool,
}

/// Monte Carlo variant: the pooled process plus per-field batch statistics.
pub struct EmbedMonteCarlo {
    pub outcome: EmbedOutcome,
    pub samples_per_row: u64,
    pub batches: u32,
    pub mean: CostProfile,
    /// Standard error of each profile field across batches.
    pub se: [f64; 6],
}

struct ZDict {
    map: BTreeMap<Vec<u64>, usize>,
    ans: Vec<bool>,
}

impl ZDict {
    fn new() -> Self {
        ZDict { map: BTreeMap::new(), ans: Vec::new() }
    }

    fn intern(&mut self, key: Vec<u64>, answer: bool) -> Result<usize, AndLabError> {
        let next = self.map.len();
        let idx = *self.map.entry(key).or_insert(next);
        if idx == self.ans.len() {
            self.ans.push(answer);
        } else if self.ans[idx] != answer {
            return Err(AndLabError::AnswerClash { z: idx });
        }
        Ok(idx)
    }
}

/// Plants `(x, y)` at coordinate `(I_ℓ, j)` of `assignment_rest` (an
/// `(N-2)`-bit integer) and returns the full `N`-bit assignment.
fn splice_bits(rest: u64, pos1: usize, pos2: usize, x: bool, y: bool) -> u64 {
    debug_assert!(pos1 < pos2);
    let low = rest & ((1u64 << pos1) - 1);
    let mid_width = pos2 - pos1 - 1;
    let mid = rest >> pos1 & ((1u64 << mid_width) - 1);
    let high = rest >> (pos1 + mid_width);
    low | (x as u64) << pos1 | mid << (pos1 + 1) | (y as u64) << pos2 | high << (pos2 + 1)
}

/// The `Z^AND` key: the `Z^DISJ` variables plus `T^{<j}` and `j`.
fn z_and_key(
    txs: &[crate::nof::Transcript],
    set_masks: &[u64],
    tuple: &[usize],
    ell: usize,
    t_mask: u64,
    j: usize,
) -> Vec<u64> {
    let mut key = vec![ell as u64, tuple.len() as u64];
    key.extend(tuple.iter().map(|&x| x as u64));
    for &idx in &tuple[..ell] {
        key.push(set_masks[idx]);
        encode_bits(&mut key, &txs[idx].megan);
    }
    encode_transcript(&mut key, &txs[tuple[ell]]);
    key.push(j as u64);
    key.push(t_mask & ((1u64 << j) - 1));
    key
}

/// Exact-mode embedding: enumerates every selection `(P, ℓ, j)` and every
/// assignment of the non-embedded coordinates, weighting by the input
/// distribution, and returns the exact kernel of `Z^AND(X, Y)`.
pub fn embed_and_exact(family: &dyn ProtocolFamily, cfg: &EnumerationConfig) -> Result<EmbedOutcome, AndLabError> {
    let n = cfg.n;
    let k = cfg.k;
    let total_bits = n * (k + 1);
    if total_bits > crate::nof::MAX_ENUMERATION_BITS {
        return Err(AndLabError::Nof(NofError::EnumerationTooLarge { bits: total_bits }));
    }
    if cfg.p == 0 || cfg.p > k {
        return Err(AndLabError::BadParameter("need 1 <= p <= k"));
    }
    let tuples = all_ordered_tuples(k, cfg.p);
    let ells: Vec<usize> = match cfg.ell {
        Some(e) => vec![e],
        None => (0..cfg.p).collect(),
    };
    let rest_bits = total_bits - 2;
    let sel_count = (tuples.len() * ells.len() * n) as f64;

    let mut pow_g = vec![1.0f64; rest_bits + 1];
    let mut pow_1mg = vec![1.0f64; rest_bits + 1];
    for e in 1..=rest_bits {
        pow_g[e] = pow_g[e - 1] * cfg.gamma;
        pow_1mg[e] = pow_1mg[e - 1] * (1.0 - cfg.gamma);
    }

    let mut dict = ZDict::new();
    let mut rows: [BTreeMap<usize, f64>; 4] = Default::default();
    let mut c_bits = 0usize;
    let mut u_bits_max = 0usize;
    let mut zero_error = true;

    let mut inst = MultiphaseInstance::from_masks(n, &vec![0u64; k], 0, cfg.gamma);
    let mut set_masks = vec![0u64; k];

    for tuple in &tuples {
        for &ell in &ells {
            let chosen = tuple[ell];
            for j in 0..n {
                let pos1 = chosen * n + j;
                let pos2 = k * n + j;
                for rest in 0..1u64 << rest_bits {
                    let rest_ones = rest.count_ones() as usize;
                    let weight = pow_g[rest_ones] * pow_1mg[rest_bits - rest_ones] / sel_count;
                    for xy in 0..4usize {
                        let (x, y) = (xy >> 1 == 1, xy & 1 == 1);
                        let assignment = splice_bits(rest, pos1, pos2, x, y);
                        for (f, m) in set_masks.iter_mut().enumerate() {
                            *m = assignment >> (f * n) & ((1u64 << n) - 1);
                        }
                        let t_mask = assignment >> (k * n) & ((1u64 << n) - 1);
                        inst.overwrite_masks(&set_masks, t_mask);
                        let proto = family.build(&inst)?;
                        // transcripts for the chosen index and everything
                        // before it in the tuple (the Z^DISJ constituents)
                        let mut txs: Vec<Option<crate::nof::Transcript>> = vec![None; k];
                        for &idx in tuple[..=ell].iter() {
                            let tx = run_protocol(proto.as_ref(), &inst, idx)?;
                            c_bits = c_bits.max(tx.pi_bits());
                            u_bits_max = u_bits_max.max(tx.u_bits());
                            if tx.answer != inst.answer(idx) {
                                zero_error = false;
                            }
                            txs[idx] = Some(tx);
                        }
                        let txs_filled: Vec<crate::nof::Transcript> = (0..k)
                            .map(|idx| {
                                txs[idx].clone().unwrap_or_else(|| crate::nof::Transcript {
                                    u: BitString::new(),
                                    u_prime: None,
                                    megan: BitString::new(),
                                    rounds: Vec::new(),
                                    answer: false,
                                })
                            })
                            .collect();
                        let answer = txs_filled[chosen].answer;
                        let key = z_and_key(&txs_filled, &set_masks, tuple, ell, t_mask, j);
                        let z = dict.intern(key, answer)?;
                        *rows[xy].entry(z).or_insert(0.0) += weight;
                    }
                }
            }
        }
    }

    let z_size = dict.ans.len();
    let mut kernel: [Vec<f64>; 4] =
        [vec![0.0; z_size], vec![0.0; z_size], vec![0.0; z_size], vec![0.0; z_size]];
    for (xy, row) in rows.iter().enumerate() {
        for (&z, &m) in row {
            kernel[xy][z] = m;
        }
        // guard against drift from the many tiny contributions
        let total: f64 = kernel[xy].iter().sum();
        for v in kernel[xy].iter_mut() {
            *v /= total;
        }
    }
    let process = RandomProcess::new(kernel, dict.ans, cfg.gamma)?;
    Ok(EmbedOutcome { process, c_bits, u_bits_max, zero_error })
}

/// Monte Carlo embedding: `samples_per_row` runs per input pair `(x, y)`,
/// split into `batches` for standard-error estimation.
pub fn embed_and_monte_carlo(
    family: &dyn ProtocolFamily,
    cfg: &EnumerationConfig,
    samples_per_row: u64,
    batches: u32,
    seed: u64,
) -> Result<EmbedMonteCarlo, AndLabError> {
    if cfg.p == 0 || cfg.p > cfg.k {
        return Err(AndLabError::BadParameter("need 1 <= p <= k"));
    }
    if batches == 0 || samples_per_row < batches as u64 {
        return Err(AndLabError::BadParameter("need at least one sample per batch"));
    }
    let n = cfg.n;
    let k = cfg.k;
    let mut rng = CounterRng::new(seed ^ 0xE3BED);
    let mut dict = ZDict::new();
    let mut pooled: [BTreeMap<usize, u64>; 4] = Default::default();
    let mut batch_rows: Vec<[BTreeMap<usize, u64>; 4]> = (0..batches).map(|_| Default::default()).collect();
    let per_batch = samples_per_row / batches as u64;
    let mut c_bits = 0usize;
    let mut u_bits_max = 0usize;
    let mut zero_error = true;
    let mut scratch = Vec::new();

    for batch in batch_rows.iter_mut() {
        for xy in 0..4usize {
            let (x, y) = (xy >> 1 == 1, xy & 1 == 1);
            for _ in 0..per_batch {
                // random selection
                rng.distinct_tuple(k, cfg.p, &mut scratch);
                let ell = match cfg.ell {
                    Some(e) => e,
                    None => rng.gen_range(cfg.p as u64) as usize,
                };
                let j = rng.gen_range(n as u64) as usize;
                let chosen = scratch[ell];
                // sample the instance, then plant the embedded bits
                let mut set_masks: Vec<u64> = Vec::with_capacity(k);
                for _ in 0..k {
                    let mut m = 0u64;
                    for bit in 0..n {
                        if rng.bernoulli(cfg.gamma) {
                            m |= 1 << bit;
                        }
                    }
                    set_masks.push(m);
                }
                let mut t_mask = 0u64;
                for bit in 0..n {
                    if rng.bernoulli(cfg.gamma) {
                        t_mask |= 1 << bit;
                    }
                }
                set_masks[chosen] = set_masks[chosen] & !(1 << j) | (x as u64) << j;
                t_mask = t_mask & !(1 << j) | (y as u64) << j;

                let inst = MultiphaseInstance::from_masks(n, &set_masks, t_mask, cfg.gamma);
                let proto = family.build(&inst)?;
                let mut txs: Vec<crate::nof::Transcript> = Vec::with_capacity(k);
                // only the tuple prefix transcripts are needed; fill others
                // with placeholders to reuse the key builder
                for idx in 0..k {
                    if scratch[..=ell].contains(&idx) {
                        let tx = run_protocol(proto.as_ref(), &inst, idx)?;
                        c_bits = c_bits.max(tx.pi_bits());
                        u_bits_max = u_bits_max.max(tx.u_bits());
                        if tx.answer != inst.answer(idx) {
                            zero_error = false;
                        }
                        txs.push(tx);
                    } else {
                        txs.push(crate::nof::Transcript {
                            u: BitString::new(),
                            u_prime: None,
                            megan: BitString::new(),
                            rounds: Vec::new(),
                            answer: false,
                        });
                    }
                }
                let answer = txs[chosen].answer;
                let key = z_and_key(&txs, &set_masks, &scratch, ell, t_mask, j);
                let z = dict.intern(key, answer)?;
                *batch[xy].entry(z).or_insert(0) += 1;
                *pooled[xy].entry(z).or_insert(0) += 1;
            }
        }
    }

    let z_size = dict.ans.len();
    let to_process = |rows: &[BTreeMap<usize, u64>; 4], count: u64| -> Result<RandomProcess, AndLabError> {
        let mut kernel: [Vec<f64>; 4] =
            [vec![0.0; z_size], vec![0.0; z_size], vec![0.0; z_size], vec![0.0; z_size]];
        for (xy, row) in rows.iter().enumerate() {
            for (&z, &c) in row {
                kernel[xy][z] = c as f64 / count as f64;
            }
        }
        RandomProcess::new(kernel, dict.ans.clone(), cfg.gamma)
    };

    // Batch profiles estimate the sampling spread; the reported point
    // estimate is the pooled one (per-batch plug-in profiles carry an
    // O(|Z|/batch) bias that must not enter the comparison center).
    let mut field_sums = [0.0f64; 6];
    let mut field_sq = [0.0f64; 6];
    for batch in &batch_rows {
        let process = to_process(batch, per_batch)?;
        let profile = profile_direct(&process);
        for f in 0..6 {
            let v = profile.field(f);
            field_sums[f] += v;
            field_sq[f] += v * v;
        }
    }
    let bn = batches as f64;
    let mut se = [0.0f64; 6];
    for f in 0..6 {
        let m = field_sums[f] / bn;
        let var = (field_sq[f] / bn - m * m).max(0.0);
        se[f] = libm::sqrt(var / bn);
    }

    let process = to_process(&pooled, per_batch * batches as u64)?;
    let mean = profile_direct(&process);
    Ok(EmbedMonteCarlo {
        outcome: EmbedOutcome { process, c_bits, u_bits_max, zero_error },
        samples_per_row: per_batch * batches as u64,
        batches,
        mean,
        se,
    })
}

// ---------------------------------------------------------------------------
// Adversarial search
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
pub struct SearchParams {
    pub gamma: f64,
    pub z_size: usize,
    /// Hypothesis slack: constraints are `I(Z;X) <= eps*γ` and
    /// `I(X;Y|Z) <= eps*γ²`.
    pub eps: f64,
    pub restarts: u32,
    pub steps_per_restart: u32,
    pub seed: u64,
}

impl SearchParams {
    pub fn new(gamma: f64, z_size: usize, eps: f64, restarts: u32, seed: u64) -> Result<Self, AndLabError> {
        if !(gamma > 0.0 && gamma <= 0.1) {
            return Err(AndLabError::BadParameter("search requires gamma in (0, 0.1]"));
        }
        if !(2..=16).contains(&z_size) {
            return Err(AndLabError::BadParameter("z_size must lie in 2..=16"));
        }
        Ok(SearchParams { gamma, z_size, eps, restarts, steps_per_restart: 3000, seed })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    /// Best feasible point, if any restart found one.
    pub best: Option<(RandomProcess, CostProfile)>,
    pub feasible_restarts: u32,
    pub restarts: u32,
    pub evaluations: u64,
}

fn feasible(profile: &CostProfile, params: &SearchParams) -> bool {
    profile.err_and1 == 0.0
        && profile.err_and0 <= 0.001
        && profile.p_ans1 >= 0.5
        && profile.i_zx <= params.eps * params.gamma
        && profile.i_xy_given_z <= params.eps * params.gamma * params.gamma
}

fn violation(profile: &CostProfile, params: &SearchParams) -> f64 {
    let g = params.gamma;
    (profile.i_zx - params.eps * g).max(0.0) / g
        + (profile.i_xy_given_z - params.eps * g * g).max(0.0) / (g * g)
        + (0.5 - profile.p_ans1).max(0.0)
        + (profile.err_and0 - 0.001).max(0.0) * 1e3
}

fn random_simplex(len: usize, support: &[usize], rng: &mut CounterRng) -> Vec<f64> {
    let mut v = vec![0.0f64; len];
    let mut total = 0.0;
    for &z in support {
        let e = -libm::log(1.0 - rng.next_f64());
        v[z] = e;
        total += e;
    }
    for x in v.iter_mut() {
        *x /= total;
    }
    v
}

/// Multi-restart projected local search minimizing `I(Z;Y)` over kernels
/// subject to the correctness contract and the `eps`-scaled information and
/// correlation caps. The one-sided-error constraint is structural: the
/// `(1,1)` row is confined to answer-0 letters. Constraint handling is an
/// exact penalty with a decreasing weight schedule; moves are coordinate
/// mixes toward random simplex points. Deterministic in `(seed, params)`.
pub fn adversarial_search(params: &SearchParams) -> Result<SearchOutcome, AndLabError> {
    let zs = params.z_size;
    // answer labels: first half 1, second half 0
    let ans: Vec<bool> = (0..zs).map(|z| z < zs.div_ceil(2)).collect();
    let all: Vec<usize> = (0..zs).collect();
    let ans0: Vec<usize> = (0..zs).filter(|&z| !ans[z]).collect();
    let supports: [&[usize]; 4] = [&all, &all, &all, &ans0];

    let mut best: Option<(RandomProcess, CostProfile)> = None;
    let mut feasible_restarts = 0u32;
    let mut evaluations = 0u64;
    let root = CounterRng::new(params.seed ^ 0x5EA8C4);

    for restart in 0..params.restarts {
        let mut rng = root.fork(restart as u64);
        let mut kernel: [Vec<f64>; 4] = match restart {
            0 => seed_announce_y(zs, &ans),
            1 => seed_ideal(zs, &ans),
            _ => {
                let mk = |support: &[usize], rng: &mut CounterRng| random_simplex(zs, support, rng);
                [mk(&all, &mut rng), mk(&all, &mut rng), mk(&all, &mut rng), mk(&ans0, &mut rng)]
            }
        };
        let eval = |kernel: &[Vec<f64>; 4]| -> (CostProfile, RandomProcess) {
            let p = RandomProcess::new(kernel.clone(), ans.clone(), params.gamma)
                .expect("search kernels are stochastic");
            let profile = profile_direct(&p);
            (profile, p)
        };
        let (mut profile, mut process) = eval(&kernel);
        evaluations += 1;

        // decreasing penalty weights: find the feasible set, then polish
        let phases = [1e6f64, 1e4, 1e2];
        let steps_per_phase = params.steps_per_restart / phases.len() as u32;
        for &lambda in &phases {
            let mut objective = profile.i_zy + lambda * violation(&profile, params);
            for step in 0..steps_per_phase {
                let row = rng.gen_range(4) as usize;
                let eta = match step % 3 {
                    0 => 0.5,
                    1 => 0.1,
                    _ => 0.02,
                };
                let target = random_simplex(zs, supports[row], &mut rng);
                let mut cand = kernel.clone();
                for z in 0..zs {
                    cand[row][z] = (1.0 - eta) * cand[row][z] + eta * target[z];
                }
                let (cand_profile, cand_process) = eval(&cand);
                evaluations += 1;
                let cand_obj = cand_profile.i_zy + lambda * violation(&cand_profile, params);
                if cand_obj < objective {
                    objective = cand_obj;
                    kernel = cand;
                    profile = cand_profile;
                    process = cand_process;
                }
            }
        }

        if feasible(&profile, params) {
            feasible_restarts += 1;
            // the engine-backed profile is the one recorded
            let engine_profile = and_costs(&process)?;
            let better = match &best {
                Some((_, b)) => engine_profile.i_zy < b.i_zy,
                None => true,
            };
            if better {
                best = Some((process, engine_profile));
            }
        }
    }

    Ok(SearchOutcome { best, feasible_restarts, restarts: params.restarts, evaluations })
}

fn seed_announce_y(zs: usize, ans: &[bool]) -> [Vec<f64>; 4] {
    let z1 = 0;
    let z0 = ans.iter().position(|&a| !a).expect("an answer-0 letter exists");
    let mut kernel: [Vec<f64>; 4] = [vec![0.0; zs], vec![0.0; zs], vec![0.0; zs], vec![0.0; zs]];
    kernel[row_index(false, false)][z1] = 1.0;
    kernel[row_index(true, false)][z1] = 1.0;
    kernel[row_index(false, true)][z0] = 1.0;
    kernel[row_index(true, true)][z0] = 1.0;
    kernel
}

fn seed_ideal(zs: usize, ans: &[bool]) -> [Vec<f64>; 4] {
    let z1 = 0;
    let z0 = ans.iter().position(|&a| !a).expect("an answer-0 letter exists");
    let mut kernel: [Vec<f64>; 4] = [vec![0.0; zs], vec![0.0; zs], vec![0.0; zs], vec![0.0; zs]];
    kernel[row_index(false, false)][z1] = 1.0;
    kernel[row_index(true, false)][z1] = 1.0;
    kernel[row_index(false, true)][z1] = 1.0;
    kernel[row_index(true, true)][z0] = 1.0;
    kernel
}

// ---------------------------------------------------------------------------
// Simplex sweep for the large-divergence claim
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub gamma: f64,
    pub resolution: u32,
    pub points: u64,
    /// Points passing both filters `D(X_z||B_γ) <= γ/100` and
    /// `I(X;Y|Z=z) <= γ²/100`.
    pub filtered: u64,
    /// Filtered points with `D(Y_z||B_γ) < γ/100` (the claim predicts none).
    pub violations: u64,
    pub first_violation: Option<(f64, f64, f64)>,
    /// Empirical constant in `b_z·c_z <= κ·I(X;Y|Z=z)`.
    pub kappa_max: f64,
    /// Smallest `D(Y_z||B_γ)` among filtered points.
    pub min_kly_filtered: f64,
}

/// `I(X;Y|Z=z)` for the three-cell conditional with masses
/// `(a, b, c)` on `(0,0), (0,1), (1,0)` and zero on `(1,1)`.
pub fn corner_free_mi(a: f64, b: f64, c: f64) -> f64 {
    let h = |p: f64| -> f64 {
        if p > 0.0 {
            -p * libm::log2(p)
        } else {
            0.0
        }
    };
    // H(X) + H(Y) - H(X,Y) with Pr[X=1] = c, Pr[Y=1] = b
    let hx = h(c) + h(1.0 - c);
    let hy = h(b) + h(1.0 - b);
    let hxy = h(a) + h(b) + h(c);
    hx + hy - hxy
}

/// Sweeps the conditional simplex `(a_z, b_z, c_z)` (zero mass at `(1,1)`,
/// the shape forced by a correct answer-1 letter) and checks that points
/// with small `X`-divergence and small conditional correlation must have
/// `Y`-divergence at least `γ/100`.
///
/// The `X` filter keeps only points with `c_z` within a hair of γ, so the
/// filtered set is nonempty iff `γ * resolution` lands on the grid.
pub fn largediv_sweep(gamma: f64, resolution: u32) -> Result<SweepReport, AndLabError> {
    if resolution < 100 {
        return Err(AndLabError::BadParameter("resolution must be >= 100"));
    }
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(AndLabError::BadParameter("gamma must lie in (0, 1)"));
    }
    let res = resolution as u64;
    let klx_cap = gamma / 100.0;
    let ixy_cap = gamma * gamma / 100.0;
    let kly_floor = gamma / 100.0;
    let mut report = SweepReport {
        gamma,
        resolution,
        points: 0,
        filtered: 0,
        violations: 0,
        first_violation: None,
        kappa_max: 0.0,
        min_kly_filtered: f64::INFINITY,
    };
    for i in 0..=res {
        for jj in 0..=(res - i) {
            // exact grid coordinates so boundary points carry true zeros
            let a = i as f64 / res as f64;
            let b = jj as f64 / res as f64;
            let c = (res - i - jj) as f64 / res as f64;
            report.points += 1;
            let ixy = corner_free_mi(a, b, c);
            if b > 0.0 && c > 0.0 && ixy > 0.0 {
                let kappa = b * c / ixy;
                if kappa > report.kappa_max {
                    report.kappa_max = kappa;
                }
            }
            let klx = kl_bernoulli(c, gamma);
            if klx <= klx_cap && ixy <= ixy_cap {
                report.filtered += 1;
                let kly = kl_bernoulli(b, gamma);
                if kly < report.min_kly_filtered {
                    report.min_kly_filtered = kly;
                }
                if kly < kly_floor {
                    report.violations += 1;
                    if report.first_violation.is_none() {
                        report.first_violation = Some((a, b, c));
                    }
                }
            }
        }
    }
    Ok(report)
}
