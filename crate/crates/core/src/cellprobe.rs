//! Dynamic cell-probe simulator for the Multiphase problem.
//!
//! The memory keeps the preprocessing-phase state `M` and the update-phase
//! overlay `Δ` as separate layers: a query-phase probe into `M` always sees
//! the pre-update word, and a probe into `Δ` returns the updated word or the
//! distinguished `⊥` (here `None`) when the address was never updated. The
//! semi-adaptive discipline — free read of `S_i`, then adaptive `M`-layer
//! reads, then adaptive `Δ`-layer reads, at most one layer alternation — is
//! checked on the recorded probe log, not assumed.
//!
//! Addresses are abstract; layer membership is decided by the write log, not
//! by address ranges. One probe moves one `w`-bit word; update cost is
//! counted in words written.

use crate::bits::{ceil_log2, default_word_size, isqrt, BitVec};
use crate::instance::MultiphaseInstance;
use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Preprocess = 0,
    Update = 1,
    Query = 2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layer {
    M = 0,
    Delta = 1,
    FreeSi = 2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Op {
    Read = 0,
    Write = 1,
}

/// One probe record, packed to 16 bytes: the meta word carries the address
/// in its low 56 bits plus phase/layer/op/presence tags.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProbeEntry {
    meta: u64,
    data: u64,
}

const ADDR_BITS: u32 = 56;
const ADDR_MASK: u64 = (1 << ADDR_BITS) - 1;

impl ProbeEntry {
    /// `word = None` encodes `⊥` on a `Δ`-layer miss.
    pub fn new(phase: Phase, layer: Layer, op: Op, addr: u64, word: Option<u64>) -> Self {
        debug_assert!(addr <= ADDR_MASK);
        let tag = (phase as u64) << 61 | (layer as u64) << 58 | (op as u64) << 57 | (word.is_some() as u64) << 56;
        ProbeEntry { meta: tag | (addr & ADDR_MASK), data: word.unwrap_or(0) }
    }

    pub fn phase(&self) -> Phase {
        match self.meta >> 61 & 0b11 {
            0 => Phase::Preprocess,
            1 => Phase::Update,
            _ => Phase::Query,
        }
    }

    pub fn layer(&self) -> Layer {
        match self.meta >> 58 & 0b11 {
            0 => Layer::M,
            1 => Layer::Delta,
            _ => Layer::FreeSi,
        }
    }

    pub fn op(&self) -> Op {
        if self.meta >> 57 & 1 == 0 {
            Op::Read
        } else {
            Op::Write
        }
    }

    pub fn addr(&self) -> u64 {
        self.meta & ADDR_MASK
    }

    /// Word moved by the probe; `None` encodes `⊥`.
    pub fn word(&self) -> Option<u64> {
        if self.meta >> 56 & 1 == 1 {
            Some(self.data)
        } else {
            None
        }
    }
}

/// Ordered record of memory probes for one phase or one query. Discipline
/// counters are maintained incrementally on push so conformance checks stay
/// O(1) on the pass path.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeLog {
    entries: Vec<ProbeEntry>,
    /// Bulk harnesses disable entry retention; counters still accumulate and
    /// any failure is re-run with retention for an exact report.
    recording: bool,
    t1: u64,
    t2: u64,
    alternations: u32,
    query_writes: u32,
    update_reads: u64,
    update_writes: u64,
    /// A query-phase M read arrived after a Δ read.
    order_broken: bool,
    last_query_layer: Option<Layer>,
}

impl Default for ProbeLog {
    fn default() -> Self {
        ProbeLog {
            entries: Vec::new(),
            recording: true,
            t1: 0,
            t2: 0,
            alternations: 0,
            query_writes: 0,
            update_reads: 0,
            update_writes: 0,
            order_broken: false,
            last_query_layer: None,
        }
    }
}

impl ProbeLog {
    pub fn new() -> Self {
        Self::default()
    }

    /// Counter-only log for bulk sweeps.
    pub fn counters_only() -> Self {
        ProbeLog { recording: false, ..Self::default() }
    }

    pub fn clear(&mut self) {
        self.entries.clear();
        self.t1 = 0;
        self.t2 = 0;
        self.alternations = 0;
        self.query_writes = 0;
        self.update_reads = 0;
        self.update_writes = 0;
        self.order_broken = false;
        self.last_query_layer = None;
    }

    pub fn entries(&self) -> &[ProbeEntry] {
        &self.entries
    }

    #[inline]
    pub fn push(&mut self, e: ProbeEntry) {
        let layer = e.layer();
        if e.phase() == Phase::Update {
            match e.op() {
                Op::Read => self.update_reads += 1,
                Op::Write => self.update_writes += 1,
            }
        }
        if e.phase() == Phase::Query && layer != Layer::FreeSi {
            if e.op() == Op::Write {
                self.query_writes += 1;
            } else {
                match layer {
                    Layer::M => self.t1 += 1,
                    Layer::Delta => self.t2 += 1,
                    Layer::FreeSi => unreachable!(),
                }
                if let Some(prev) = self.last_query_layer {
                    if prev != layer {
                        self.alternations += 1;
                        if layer == Layer::M {
                            self.order_broken = true;
                        }
                    }
                }
                self.last_query_layer = Some(layer);
            }
        }
        if self.recording {
            self.entries.push(e);
        }
    }

    fn truncate(&mut self, len: usize) {
        // only used between phases, before any query entries exist
        debug_assert!(self.t1 == 0 && self.t2 == 0 && self.query_writes == 0);
        self.entries.truncate(len);
    }

    /// Query-phase reads from `M`.
    pub fn t1(&self) -> u64 {
        self.t1
    }

    /// Query-phase reads from `Δ`.
    pub fn t2(&self) -> u64 {
        self.t2
    }

    /// Layer switches among query-phase M/Δ reads.
    pub fn alternations(&self) -> u32 {
        self.alternations
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProbeError {
    OutOfRange { addr: u64, space: u64 },
    /// A probe read `⊥` where the scheme guarantees a written cell.
    MissingDelta { addr: u64 },
    /// An advice decode returned a candidate set violating its contract.
    AdviceContract(&'static str),
    /// Replay oracle ran out of recorded data (used by protocol reductions).
    Suspended,
    /// Replay oracle saw an address that differs from the recorded one.
    ReplayMismatch { expected: u64, got: u64 },
}

impl fmt::Display for ProbeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProbeError::OutOfRange { addr, space } => {
                write!(f, "probe at {addr} outside address space {space}")
            }
            ProbeError::MissingDelta { addr } => write!(f, "unexpected ⊥ at address {addr}"),
            ProbeError::AdviceContract(why) => write!(f, "advice decode contract violated: {why}"),
            ProbeError::Suspended => write!(f, "query suspended awaiting probe data"),
            ProbeError::ReplayMismatch { expected, got } => {
                write!(f, "replay address mismatch: expected {expected}, got {got}")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for ProbeError {}

#[derive(Debug, Clone, PartialEq)]
pub enum CellProbeError {
    Probe(ProbeError),
    /// A data structure returned an answer different from the `disj` oracle.
    Soundness { query_index: usize, i: usize, got: bool, expected: bool },
    GeometryMismatch(&'static str),
}

impl fmt::Display for CellProbeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CellProbeError::Probe(e) => write!(f, "probe error: {e}"),
            CellProbeError::Soundness { query_index, i, got, expected } => write!(
                f,
                "soundness failure at query #{query_index} (i = {i}): got {got}, expected {expected}"
            ),
            CellProbeError::GeometryMismatch(what) => write!(f, "geometry mismatch: {what}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for CellProbeError {}

impl From<ProbeError> for CellProbeError {
    fn from(e: ProbeError) -> Self {
        CellProbeError::Probe(e)
    }
}

/// Flat cell store with O(1) whole-array reset via generation stamps.
#[derive(Debug, Clone, Copy, Default)]
struct Cell {
    stamp: u32,
    word: u64,
}

#[derive(Debug, Clone)]
struct CellArray {
    cells: Vec<Cell>,
    gen: u32,
    written: Vec<u32>,
}

impl CellArray {
    fn new(size: u64) -> Self {
        CellArray { cells: vec![Cell::default(); size as usize], gen: 1, written: Vec::new() }
    }

    fn reset(&mut self) {
        self.gen = self.gen.wrapping_add(1);
        if self.gen == 0 {
            // stamp wrap-around: scrub once every 2^32 resets
            for c in &mut self.cells {
                c.stamp = 0;
            }
            self.gen = 1;
        }
        self.written.clear();
    }

    #[inline]
    fn read(&self, addr: usize) -> Option<u64> {
        let cell = &self.cells[addr];
        if cell.stamp == self.gen {
            Some(cell.word)
        } else {
            None
        }
    }

    #[inline]
    fn write(&mut self, addr: usize, word: u64) {
        let gen = self.gen;
        let cell = &mut self.cells[addr];
        if cell.stamp != gen {
            cell.stamp = gen;
            self.written.push(addr as u32);
        }
        cell.word = word;
    }

    fn written_count(&self) -> u64 {
        self.written.len() as u64
    }

    fn pairs_sorted(&self) -> Vec<(u64, u64)> {
        let mut addrs: Vec<u32> = self.written.clone();
        addrs.sort_unstable();
        addrs.iter().map(|&a| (a as u64, self.cells[a as usize].word)).collect()
    }
}

/// Two-layer word memory: the phase-I state `M` and the phase-II overlay `Δ`.
#[derive(Debug, Clone)]
pub struct MemoryModel {
    w: u32,
    addr_space: u64,
    m: CellArray,
    delta: CellArray,
}

impl MemoryModel {
    pub fn new(w: u32, addr_space: u64) -> Self {
        assert!((1..=63).contains(&w), "word size must be in 1..=63 bits");
        MemoryModel { w, addr_space, m: CellArray::new(addr_space), delta: CellArray::new(addr_space) }
    }

    pub fn word_size(&self) -> u32 {
        self.w
    }

    pub fn address_space(&self) -> u64 {
        self.addr_space
    }

    pub fn reset(&mut self) {
        self.m.reset();
        self.delta.reset();
    }

    fn check(&self, addr: u64) -> Result<usize, ProbeError> {
        if addr >= self.addr_space {
            return Err(ProbeError::OutOfRange { addr, space: self.addr_space });
        }
        Ok(addr as usize)
    }

    /// Updated cells as sorted (address, final word) pairs.
    pub fn delta_pairs(&self) -> Vec<(u64, u64)> {
        self.delta.pairs_sorted()
    }

    pub fn delta_size(&self) -> u64 {
        self.delta.written_count()
    }

    /// Unlogged inspection of the phase-I layer (`None` if never written).
    pub fn peek_m(&self, addr: u64) -> Option<u64> {
        if addr >= self.addr_space {
            return None;
        }
        self.m.read(addr as usize)
    }

    /// Unlogged inspection of the `Δ` layer.
    pub fn peek_delta(&self, addr: u64) -> Option<u64> {
        if addr >= self.addr_space {
            return None;
        }
        self.delta.read(addr as usize)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budgets {
    /// Worst-case phase-II writes in words (total update cost).
    pub update_writes: u64,
    /// Query-phase `M`-layer read budget.
    pub t1: u64,
    /// Query-phase `Δ`-layer read budget.
    pub t2: u64,
}

impl Budgets {
    pub fn t_q(&self) -> u64 {
        self.t1 + self.t2
    }
}

/// Probe interface handed to query procedures. The harness implementation
/// logs and bounds-checks; protocol reductions substitute replay oracles.
pub trait ProbeSource {
    fn read_m(&mut self, addr: u64) -> Result<u64, ProbeError>;
    fn read_delta(&mut self, addr: u64) -> Result<Option<u64>, ProbeError>;
}

/// Phase-I write interface.
pub struct PreprocessCtx<'a> {
    mem: &'a mut MemoryModel,
    log: &'a mut ProbeLog,
}

impl PreprocessCtx<'_> {
    pub fn write(&mut self, addr: u64, word: u64) -> Result<(), ProbeError> {
        let a = self.mem.check(addr)?;
        debug_assert!(word >> self.mem.w == 0, "word wider than w bits");
        self.mem.m.write(a, word);
        self.log.push(ProbeEntry::new(Phase::Preprocess, Layer::M, Op::Write, addr, Some(word)));
        Ok(())
    }

    pub fn read(&mut self, addr: u64) -> Result<u64, ProbeError> {
        let a = self.mem.check(addr)?;
        let word = self.mem.m.read(a).unwrap_or(0);
        self.log.push(ProbeEntry::new(Phase::Preprocess, Layer::M, Op::Read, addr, Some(word)));
        Ok(word)
    }
}

/// Phase-II interface: adaptive reads of the current state, writes recorded
/// as the `Δ` overlay.
pub struct UpdateCtx<'a> {
    mem: &'a mut MemoryModel,
    log: &'a mut ProbeLog,
}

impl UpdateCtx<'_> {
    pub fn read(&mut self, addr: u64) -> Result<u64, ProbeError> {
        let a = self.mem.check(addr)?;
        let (layer, word) = match self.mem.delta.read(a) {
            Some(w) => (Layer::Delta, w),
            None => (Layer::M, self.mem.m.read(a).unwrap_or(0)),
        };
        self.log.push(ProbeEntry::new(Phase::Update, layer, Op::Read, addr, Some(word)));
        Ok(word)
    }

    pub fn write(&mut self, addr: u64, word: u64) -> Result<(), ProbeError> {
        let a = self.mem.check(addr)?;
        debug_assert!(word >> self.mem.w == 0, "word wider than w bits");
        self.mem.delta.write(a, word);
        self.log.push(ProbeEntry::new(Phase::Update, Layer::Delta, Op::Write, addr, Some(word)));
        Ok(())
    }
}

struct QueryCtx<'a> {
    mem: &'a MemoryModel,
    log: &'a mut ProbeLog,
}

impl ProbeSource for QueryCtx<'_> {
    #[inline]
    fn read_m(&mut self, addr: u64) -> Result<u64, ProbeError> {
        let a = self.mem.check(addr)?;
        // M-layer reads see the pre-update state even for updated addresses
        let word = self.mem.m.read(a).unwrap_or(0);
        self.log.push(ProbeEntry::new(Phase::Query, Layer::M, Op::Read, addr, Some(word)));
        Ok(word)
    }

    #[inline]
    fn read_delta(&mut self, addr: u64) -> Result<Option<u64>, ProbeError> {
        let a = self.mem.check(addr)?;
        let word = self.mem.delta.read(a);
        self.log.push(ProbeEntry::new(Phase::Query, Layer::Delta, Op::Read, addr, word));
        Ok(word)
    }
}

/// Monomorphic query entry point: the shipped schemes also expose their
/// query procedure generically over the probe source, so bulk harnesses can
/// drive them without per-probe virtual dispatch. The object-safe
/// [`DataStructure::query`] delegates here.
pub trait MonoQuery {
    fn query_mono<P: ProbeSource + ?Sized>(
        &self,
        i: usize,
        s_i: &BitVec,
        probes: &mut P,
    ) -> Result<bool, ProbeError>;
}

/// A registered data structure: a preprocessing procedure, an update
/// procedure, and a query procedure that sees `T` and `S_{≠i}` only through
/// probes (the harness simply never hands them over).
pub trait DataStructure {
    fn name(&self) -> &'static str;
    fn word_size(&self) -> u32;
    fn address_space(&self) -> u64;
    fn budgets(&self) -> Budgets;
    fn preprocess(&self, sets: &[BitVec], ctx: &mut PreprocessCtx) -> Result<(), ProbeError>;
    fn update(&self, t: &BitVec, ctx: &mut UpdateCtx) -> Result<(), ProbeError>;
    fn query(&self, i: usize, s_i: &BitVec, probes: &mut dyn ProbeSource) -> Result<bool, ProbeError>;
}

/// Bits needed to name one address of `ds` in a message.
pub fn address_bits(ds: &dyn DataStructure) -> u32 {
    ceil_log2(ds.address_space() as usize).max(1)
}

/// Smallest word size >= the default that lets one word address the
/// scheme's own memory (`space(w) <= 2^w`). The default formula
/// `max{ceil(log2 n), ceil(log2 k)} + 1` already satisfies this except at
/// degenerate toy geometries, where an unaddressable memory would break the
/// word-granularity accounting the protocol reductions rely on.
fn addressable_word_size(n: usize, k: usize, space_for: impl Fn(u32) -> u64) -> u32 {
    let mut w = default_word_size(n, k);
    loop {
        let need = ceil_log2(space_for(w) as usize).max(1);
        if need <= w {
            return w;
        }
        w = need;
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PhaseCosts {
    pub phase1_writes: u64,
    pub phase2_writes: u64,
    pub phase2_reads: u64,
    pub delta_size: u64,
}

/// Reusable phase-I/II runner plus query driver. `load` resets the memory in
/// O(1), so sweeping millions of instances through one simulator allocates
/// nothing in steady state.
pub struct Simulator {
    mem: MemoryModel,
    phase_log: ProbeLog,
    phase1_log_len: usize,
    costs: PhaseCosts,
}

impl Simulator {
    pub fn new(ds: &dyn DataStructure) -> Self {
        Simulator {
            mem: MemoryModel::new(ds.word_size(), ds.address_space()),
            phase_log: ProbeLog::new(),
            phase1_log_len: 0,
            costs: PhaseCosts::default(),
        }
    }

    /// Simulator whose phase log keeps counters but no entries; bulk sweeps
    /// re-run failures through a recording simulator for diagnostics.
    pub fn new_lean(ds: &dyn DataStructure) -> Self {
        Simulator {
            mem: MemoryModel::new(ds.word_size(), ds.address_space()),
            phase_log: ProbeLog::counters_only(),
            phase1_log_len: 0,
            costs: PhaseCosts::default(),
        }
    }

    pub fn memory(&self) -> &MemoryModel {
        &self.mem
    }

    pub fn phase_log(&self) -> &ProbeLog {
        &self.phase_log
    }

    pub fn costs(&self) -> &PhaseCosts {
        &self.costs
    }

    /// Runs phases I and II for `inst`.
    pub fn load(&mut self, ds: &dyn DataStructure, inst: &MultiphaseInstance) -> Result<(), CellProbeError> {
        self.phase1(ds, inst.sets())?;
        self.phase2(ds, inst.t())
    }

    /// Phase I alone: full reset, then preprocessing. Callers sweeping many
    /// updates over one set family run this once and [`Self::phase2`] per `T`.
    pub fn phase1(&mut self, ds: &dyn DataStructure, sets: &[BitVec]) -> Result<(), CellProbeError> {
        self.mem.reset();
        self.phase_log.clear();
        {
            let mut ctx = PreprocessCtx { mem: &mut self.mem, log: &mut self.phase_log };
            ds.preprocess(sets, &mut ctx)?;
        }
        self.phase1_log_len = self.phase_log.entries().len();
        self.costs = PhaseCosts {
            phase1_writes: self.mem.m.written_count(),
            ..PhaseCosts::default()
        };
        Ok(())
    }

    /// Phase II alone: clears the `Δ` layer and any previous update's log
    /// entries, then applies the update for `t`.
    pub fn phase2(&mut self, ds: &dyn DataStructure, t: &BitVec) -> Result<(), CellProbeError> {
        self.mem.delta.reset();
        self.phase_log.truncate(self.phase1_log_len);
        let reads_before = self.phase_log.update_reads;
        let writes_before = self.phase_log.update_writes;
        {
            let mut ctx = UpdateCtx { mem: &mut self.mem, log: &mut self.phase_log };
            ds.update(t, &mut ctx)?;
        }
        self.costs.phase2_reads = self.phase_log.update_reads - reads_before;
        self.costs.phase2_writes = self.phase_log.update_writes - writes_before;
        self.costs.delta_size = self.mem.delta_size();
        Ok(())
    }

    /// Runs one query, logging into `log`, and checks the answer against the
    /// `disj` oracle.
    pub fn query(
        &mut self,
        ds: &dyn DataStructure,
        inst: &MultiphaseInstance,
        i: usize,
        log: &mut ProbeLog,
    ) -> Result<bool, CellProbeError> {
        let s_i = inst.set(i);
        // the free read of S_i: zero cost, logged for the record
        log.push(ProbeEntry::new(Phase::Query, Layer::FreeSi, Op::Read, i as u64, None));
        let answer = {
            let mut ctx = QueryCtx { mem: &self.mem, log };
            ds.query(i, s_i, &mut ctx)?
        };
        let expected = inst.answer(i);
        if answer != expected {
            return Err(CellProbeError::Soundness { query_index: 0, i, got: answer, expected });
        }
        Ok(answer)
    }

    /// Lean query driver for bulk harnesses: logs the memory probes (the
    /// free `S_i` read is exempt from the discipline anyway) and leaves the
    /// oracle comparison to the caller. Statically dispatched end to end.
    #[inline]
    pub fn query_raw<D: MonoQuery + ?Sized>(
        &self,
        ds: &D,
        s_i: &BitVec,
        i: usize,
        log: &mut ProbeLog,
    ) -> Result<bool, ProbeError> {
        let mut ctx = QueryCtx { mem: &self.mem, log };
        ds.query_mono(i, s_i, &mut ctx)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiphaseRun {
    pub answers: Vec<bool>,
    pub logs: Vec<ProbeLog>,
    pub costs: PhaseCosts,
}

/// Convenience wrapper: phases I-III for a list of queries, with answers
/// verified against the oracle.
pub fn run_multiphase(
    ds: &dyn DataStructure,
    inst: &MultiphaseInstance,
    queries: &[usize],
) -> Result<MultiphaseRun, CellProbeError> {
    let mut sim = Simulator::new(ds);
    sim.load(ds, inst)?;
    let mut answers = Vec::with_capacity(queries.len());
    let mut logs = Vec::with_capacity(queries.len());
    for (qi, &i) in queries.iter().enumerate() {
        if i >= inst.k() {
            return Err(CellProbeError::GeometryMismatch("query index out of range"));
        }
        let mut log = ProbeLog::new();
        match sim.query(ds, inst, i, &mut log) {
            Ok(a) => {
                answers.push(a);
                logs.push(log);
            }
            Err(CellProbeError::Soundness { i, got, expected, .. }) => {
                return Err(CellProbeError::Soundness { query_index: qi, i, got, expected })
            }
            Err(e) => return Err(e),
        }
    }
    Ok(MultiphaseRun { answers, logs, costs: sim.costs().clone() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SemiAdaptiveViolation {
    LayerAlternation,
    T1Exceeded,
    T2Exceeded,
    QueryPhaseWrite,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SemiAdaptiveVerdict {
    pub pass: bool,
    /// Index into the log and the rule broken, for the first violation.
    pub violation: Option<(usize, SemiAdaptiveViolation)>,
    pub t1: u64,
    pub t2: u64,
    pub alternations: u32,
}

/// Checks the layer discipline of one query log: all `M` reads precede all
/// `Δ` reads (at most one alternation), read counts within budgets, no
/// query-phase writes. Free `S_i` reads are exempt. The verdict comes from
/// the log's incremental counters; the entry walk runs only to locate the
/// first offending index of a failing log.
pub fn enforce_semi_adaptive(log: &ProbeLog, budgets: &Budgets) -> SemiAdaptiveVerdict {
    let pass = !log.order_broken
        && log.alternations <= 1
        && log.query_writes == 0
        && log.t1 <= budgets.t1
        && log.t2 <= budgets.t2;
    let mut verdict = SemiAdaptiveVerdict {
        pass,
        violation: None,
        t1: log.t1,
        t2: log.t2,
        alternations: log.alternations,
    };
    if pass {
        return verdict;
    }
    let mut t1 = 0u64;
    let mut t2 = 0u64;
    let mut last: Option<Layer> = None;
    for (idx, e) in log.entries.iter().enumerate() {
        if e.phase() != Phase::Query || e.layer() == Layer::FreeSi {
            continue;
        }
        if e.op() == Op::Write {
            verdict.violation = Some((idx, SemiAdaptiveViolation::QueryPhaseWrite));
            return verdict;
        }
        if let Some(prev) = last {
            if prev == Layer::Delta && e.layer() == Layer::M {
                verdict.violation = Some((idx, SemiAdaptiveViolation::LayerAlternation));
                return verdict;
            }
        }
        last = Some(e.layer());
        match e.layer() {
            Layer::M => {
                t1 += 1;
                if t1 > budgets.t1 {
                    verdict.violation = Some((idx, SemiAdaptiveViolation::T1Exceeded));
                    return verdict;
                }
            }
            Layer::Delta => {
                t2 += 1;
                if t2 > budgets.t2 {
                    verdict.violation = Some((idx, SemiAdaptiveViolation::T2Exceeded));
                    return verdict;
                }
            }
            Layer::FreeSi => unreachable!(),
        }
    }
    verdict.violation = Some((0, SemiAdaptiveViolation::LayerAlternation));
    verdict
}

// ---------------------------------------------------------------------------
// Shipped data structures
// ---------------------------------------------------------------------------

/// Stores `S` verbatim in phase I, computes every answer during the update,
/// and answers any query with a single `Δ`-probe into the packed answer
/// table.
pub struct PrecomputeAnswers {
    n: usize,
    k: usize,
    w: u32,
    set_words: usize,
    answer_words: usize,
    t_words_buf: core::cell::RefCell<Vec<u64>>,
}

impl PrecomputeAnswers {
    pub fn new(n: usize, k: usize) -> Self {
        let w = addressable_word_size(n, k, |w| {
            (k * n.div_ceil(w as usize) + k.div_ceil(w as usize)) as u64
        });
        Self::with_word_size(n, k, w)
    }

    pub fn with_word_size(n: usize, k: usize, w: u32) -> Self {
        PrecomputeAnswers {
            n,
            k,
            w,
            set_words: n.div_ceil(w as usize),
            answer_words: k.div_ceil(w as usize),
            t_words_buf: core::cell::RefCell::new(Vec::new()),
        }
    }

    fn answer_base(&self) -> u64 {
        (self.k * self.set_words) as u64
    }
}

impl DataStructure for PrecomputeAnswers {
    fn name(&self) -> &'static str {
        "precompute-answers"
    }

    fn word_size(&self) -> u32 {
        self.w
    }

    fn address_space(&self) -> u64 {
        self.answer_base() + self.answer_words as u64
    }

    fn budgets(&self) -> Budgets {
        Budgets { update_writes: self.answer_words as u64, t1: 0, t2: 1 }
    }

    fn preprocess(&self, sets: &[BitVec], ctx: &mut PreprocessCtx) -> Result<(), ProbeError> {
        debug_assert!(sets.len() == self.k && sets.iter().all(|s| s.len() == self.n));
        for (i, s) in sets.iter().enumerate() {
            for c in 0..self.set_words {
                ctx.write((i * self.set_words + c) as u64, s.chunk_word(c, self.w))?;
            }
        }
        Ok(())
    }

    fn update(&self, t: &BitVec, ctx: &mut UpdateCtx) -> Result<(), ProbeError> {
        let mut t_words = self.t_words_buf.borrow_mut();
        t_words.clear();
        for c in 0..self.set_words {
            t_words.push(t.chunk_word(c, self.w));
        }
        let mut word = 0u64;
        let mut packed = 0usize;
        let mut out_addr = self.answer_base();
        for i in 0..self.k {
            let mut hit = false;
            for (c, &tw) in t_words.iter().enumerate() {
                if tw == 0 {
                    continue;
                }
                let sw = ctx.read((i * self.set_words + c) as u64)?;
                if sw & tw != 0 {
                    hit = true;
                    break;
                }
            }
            if !hit {
                word |= 1 << packed;
            }
            packed += 1;
            if packed == self.w as usize {
                ctx.write(out_addr, word)?;
                out_addr += 1;
                word = 0;
                packed = 0;
            }
        }
        if packed > 0 {
            ctx.write(out_addr, word)?;
        }
        Ok(())
    }

    fn query(&self, i: usize, s_i: &BitVec, probes: &mut dyn ProbeSource) -> Result<bool, ProbeError> {
        self.query_mono(i, s_i, probes)
    }
}

impl MonoQuery for PrecomputeAnswers {
    #[inline]
    fn query_mono<P: ProbeSource + ?Sized>(
        &self,
        i: usize,
        _s_i: &BitVec,
        probes: &mut P,
    ) -> Result<bool, ProbeError> {
        let addr = self.answer_base() + (i / self.w as usize) as u64;
        let word = probes.read_delta(addr)?.ok_or(ProbeError::MissingDelta { addr })?;
        Ok(word >> (i % self.w as usize) & 1 == 1)
    }
}

/// Writes `T`'s bitmap during the update; a query probes the word of each
/// element of `S_i` (distinct words, early exit on the first hit).
pub struct StoreT {
    n: usize,
    w: u32,
    t_words: usize,
}

impl StoreT {
    pub fn new(n: usize, k: usize) -> Self {
        let w = addressable_word_size(n, k, |w| n.div_ceil(w as usize) as u64);
        Self::with_word_size(n, k, w)
    }

    pub fn with_word_size(n: usize, _k: usize, w: u32) -> Self {
        StoreT { n, w, t_words: n.div_ceil(w as usize) }
    }
}

impl DataStructure for StoreT {
    fn name(&self) -> &'static str {
        "store-t"
    }

    fn word_size(&self) -> u32 {
        self.w
    }

    fn address_space(&self) -> u64 {
        self.t_words as u64
    }

    fn budgets(&self) -> Budgets {
        Budgets { update_writes: self.t_words as u64, t1: 0, t2: self.t_words as u64 }
    }

    fn preprocess(&self, _sets: &[BitVec], _ctx: &mut PreprocessCtx) -> Result<(), ProbeError> {
        Ok(())
    }

    fn update(&self, t: &BitVec, ctx: &mut UpdateCtx) -> Result<(), ProbeError> {
        for c in 0..self.t_words {
            ctx.write(c as u64, t.chunk_word(c, self.w))?;
        }
        Ok(())
    }

    fn query(&self, i: usize, s_i: &BitVec, probes: &mut dyn ProbeSource) -> Result<bool, ProbeError> {
        self.query_mono(i, s_i, probes)
    }
}

impl MonoQuery for StoreT {
    #[inline]
    fn query_mono<P: ProbeSource + ?Sized>(
        &self,
        _i: usize,
        s_i: &BitVec,
        probes: &mut P,
    ) -> Result<bool, ProbeError> {
        debug_assert_eq!(s_i.len(), self.n);
        for c in 0..self.t_words {
            let sw = s_i.chunk_word(c, self.w);
            if sw == 0 {
                continue;
            }
            let addr = c as u64;
            let tw = probes.read_delta(addr)?.ok_or(ProbeError::MissingDelta { addr })?;
            if tw & sw != 0 {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// What an advice decoder may conclude from `(U, i, S_i)` alone.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AdviceDecode {
    /// A definite answer; no further probes required.
    Answer(bool),
    /// A candidate set `P ⊆ S_i`, `|P| <= floor(sqrt(n))`, that must contain
    /// every witness of `S_i ∩ T`; the query verifies it against `T`.
    Candidates(Vec<usize>),
    /// Advice unusable for this update; fall back to bitmap probing.
    Fallback,
}

/// Update-phase advice `U(S, T)` with a decode contract on the query side.
pub trait AdviceScheme {
    fn id(&self) -> &'static str;
    /// Upper bound on encoded words for this geometry.
    fn max_words(&self, n: usize, w: u32) -> u64;
    /// Appends the advice words for `t` into `out`.
    fn encode_into(&self, t: &BitVec, w: u32, out: &mut Vec<u64>);
    /// `read_word(j)` fetches advice word `j`; reads are probes.
    fn decode(
        &self,
        read_word: &mut dyn FnMut(u64) -> Result<u64, ProbeError>,
        s_i: &BitVec,
        w: u32,
    ) -> Result<AdviceDecode, ProbeError>;
}

/// Explicit-T advice: when `|T| <= floor(sqrt(n))` the advice lists `T`'s
/// positions outright, so the decoder can intersect with `S_i` locally;
/// otherwise it signals fallback. `direct_answer` controls whether the
/// decoder answers immediately or returns the intersection as candidates
/// for verification probes.
pub struct ExplicitTAdvice {
    pub direct_answer: bool,
}

impl ExplicitTAdvice {
    pub fn direct() -> Self {
        ExplicitTAdvice { direct_answer: true }
    }

    pub fn candidates() -> Self {
        ExplicitTAdvice { direct_answer: false }
    }
}

fn pos_bits(n: usize) -> u32 {
    ceil_log2(n).max(1)
}

/// Positions packed per advice word.
fn positions_per_word(n: usize, w: u32) -> usize {
    (w / pos_bits(n)).max(1) as usize
}

impl AdviceScheme for ExplicitTAdvice {
    fn id(&self) -> &'static str {
        if self.direct_answer {
            "explicit-t-direct"
        } else {
            "explicit-t-candidates"
        }
    }

    fn max_words(&self, n: usize, w: u32) -> u64 {
        1 + isqrt(n).div_ceil(positions_per_word(n, w)) as u64
    }

    fn encode_into(&self, t: &BitVec, w: u32, out: &mut Vec<u64>) {
        let n = t.len();
        let cap = isqrt(n);
        let count = t.count_ones();
        out.push(count as u64);
        if count <= cap {
            let pb = pos_bits(n);
            let per_word = positions_per_word(n, w);
            let mut acc = 0u64;
            let mut in_word = 0usize;
            for pos in t.iter_ones() {
                acc |= (pos as u64) << (in_word as u32 * pb);
                in_word += 1;
                if in_word == per_word {
                    out.push(acc);
                    acc = 0;
                    in_word = 0;
                }
            }
            if in_word > 0 {
                out.push(acc);
            }
        }
    }

    fn decode(
        &self,
        read_word: &mut dyn FnMut(u64) -> Result<u64, ProbeError>,
        s_i: &BitVec,
        w: u32,
    ) -> Result<AdviceDecode, ProbeError> {
        let n = s_i.len();
        let cap = isqrt(n);
        let count = read_word(0)? as usize;
        if count > cap {
            return Ok(AdviceDecode::Fallback);
        }
        let pb = pos_bits(n);
        let per_word = positions_per_word(n, w);
        let mut hits: Option<Vec<usize>> =
            if self.direct_answer { None } else { Some(Vec::new()) };
        let mut disjoint = true;
        let mut widx = 1u64;
        let mut in_word = 0usize;
        let mut cur = 0u64;
        for taken in 0..count {
            if taken % per_word == 0 {
                cur = read_word(widx)?;
                widx += 1;
                in_word = 0;
            }
            let p = (cur >> (in_word as u32 * pb) & ((1 << pb) - 1)) as usize;
            in_word += 1;
            if p < n && s_i.get(p) {
                disjoint = false;
                if let Some(hs) = hits.as_mut() {
                    hs.push(p);
                }
            }
        }
        match hits {
            None => Ok(AdviceDecode::Answer(disjoint)),
            Some(hs) => Ok(AdviceDecode::Candidates(hs)),
        }
    }
}

/// Test advice that silently drops one witness position; the harness must
/// surface the resulting soundness failure.
pub struct BrokenAdvice;

impl AdviceScheme for BrokenAdvice {
    fn id(&self) -> &'static str {
        "broken-drop-witness"
    }

    fn max_words(&self, n: usize, w: u32) -> u64 {
        ExplicitTAdvice::direct().max_words(n, w)
    }

    fn encode_into(&self, t: &BitVec, w: u32, out: &mut Vec<u64>) {
        let mut trimmed = t.clone();
        if let Some(last) = t.iter_ones().last() {
            trimmed.set(last, false);
        }
        ExplicitTAdvice::direct().encode_into(&trimmed, w, out)
    }

    fn decode(
        &self,
        read_word: &mut dyn FnMut(u64) -> Result<u64, ProbeError>,
        s_i: &BitVec,
        w: u32,
    ) -> Result<AdviceDecode, ProbeError> {
        ExplicitTAdvice::direct().decode(read_word, s_i, w)
    }
}

/// The `sqrt(n)`-probe scheme: the update writes advice `U` and then `T`'s
/// bitmap (both in the `Δ` layer). A query reads the advice words, decodes a
/// definite answer or a candidate set `P ⊆ S_i` with `|P| <= sqrt(n)`, then
/// verifies `P` (or, on fallback, scans the bitmap like `StoreT`).
pub struct SqrtScheme<A: AdviceScheme> {
    n: usize,
    w: u32,
    advice: A,
    u_cap: u64,
    t_words: usize,
    encode_buf: core::cell::RefCell<Vec<u64>>,
}

impl<A: AdviceScheme> SqrtScheme<A> {
    pub fn new(n: usize, k: usize, advice: A) -> Self {
        let w = {
            let probe = &advice;
            addressable_word_size(n, k, |w| {
                probe.max_words(n, w.max(pos_bits(n))) + n.div_ceil(w as usize) as u64
            })
        };
        Self::with_word_size(n, k, w.max(pos_bits(n)), advice)
    }

    pub fn with_word_size(n: usize, _k: usize, w: u32, advice: A) -> Self {
        assert!(pos_bits(n) <= w, "a position index must fit in one word");
        let u_cap = advice.max_words(n, w);
        SqrtScheme {
            n,
            w,
            advice,
            u_cap,
            t_words: n.div_ceil(w as usize),
            encode_buf: core::cell::RefCell::new(Vec::new()),
        }
    }

    fn t_base(&self) -> u64 {
        self.u_cap
    }

    pub fn advice_id(&self) -> &'static str {
        self.advice.id()
    }
}

impl<A: AdviceScheme> DataStructure for SqrtScheme<A> {
    fn name(&self) -> &'static str {
        "sqrt-advice"
    }

    fn word_size(&self) -> u32 {
        self.w
    }

    fn address_space(&self) -> u64 {
        self.u_cap + self.t_words as u64
    }

    fn budgets(&self) -> Budgets {
        let cap = isqrt(self.n) as u64;
        Budgets {
            update_writes: self.u_cap + self.t_words as u64,
            t1: 0,
            t2: self.u_cap + cap.max(self.t_words as u64),
        }
    }

    fn preprocess(&self, _sets: &[BitVec], _ctx: &mut PreprocessCtx) -> Result<(), ProbeError> {
        Ok(())
    }

    fn update(&self, t: &BitVec, ctx: &mut UpdateCtx) -> Result<(), ProbeError> {
        let mut words = self.encode_buf.borrow_mut();
        words.clear();
        self.advice.encode_into(t, self.w, &mut words);
        debug_assert!(words.len() as u64 <= self.u_cap, "advice exceeded its declared cap");
        for (j, &word) in words.iter().enumerate() {
            ctx.write(j as u64, word)?;
        }
        for c in 0..self.t_words {
            ctx.write(self.t_base() + c as u64, t.chunk_word(c, self.w))?;
        }
        Ok(())
    }

    fn query(&self, i: usize, s_i: &BitVec, probes: &mut dyn ProbeSource) -> Result<bool, ProbeError> {
        self.query_mono(i, s_i, probes)
    }
}

impl<A: AdviceScheme> MonoQuery for SqrtScheme<A> {
    #[inline]
    fn query_mono<P: ProbeSource + ?Sized>(
        &self,
        _i: usize,
        s_i: &BitVec,
        probes: &mut P,
    ) -> Result<bool, ProbeError> {
        let u_cap = self.u_cap;
        let mut read_word = |j: u64| -> Result<u64, ProbeError> {
            if j >= u_cap {
                return Err(ProbeError::AdviceContract("decode read past the advice region"));
            }
            probes.read_delta(j)?.ok_or(ProbeError::MissingDelta { addr: j })
        };
        let decoded = self.advice.decode(&mut read_word, s_i, self.w)?;
        match decoded {
            AdviceDecode::Answer(a) => Ok(a),
            AdviceDecode::Candidates(ps) => {
                let cap = isqrt(self.n);
                if ps.len() > cap {
                    return Err(ProbeError::AdviceContract("candidate set larger than sqrt(n)"));
                }
                if ps.iter().any(|&p| p >= self.n || !s_i.get(p)) {
                    return Err(ProbeError::AdviceContract("candidate outside S_i"));
                }
                for p in ps {
                    let addr = self.t_base() + (p / self.w as usize) as u64;
                    let tw = probes.read_delta(addr)?.ok_or(ProbeError::MissingDelta { addr })?;
                    if tw >> (p % self.w as usize) & 1 == 1 {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            AdviceDecode::Fallback => {
                for c in 0..self.t_words {
                    let sw = s_i.chunk_word(c, self.w);
                    if sw == 0 {
                        continue;
                    }
                    let addr = self.t_base() + c as u64;
                    let tw = probes.read_delta(addr)?.ok_or(ProbeError::MissingDelta { addr })?;
                    if tw & sw != 0 {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
        }
    }
}

/// The three shipped schemes at the default word size.
pub fn shipped_schemes(n: usize, k: usize) -> Vec<Box<dyn DataStructure>> {
    vec![
        Box::new(PrecomputeAnswers::new(n, k)),
        Box::new(StoreT::new(n, k)),
        Box::new(SqrtScheme::new(n, k, ExplicitTAdvice::direct())),
    ]
}

/// One scheme's share of [`exhaustive_soundness_check`], monomorphized so
/// the probe chain inlines.
///
/// Schemes whose preprocessing writes nothing have memory state depending
/// on `T` alone, and their query procedure receives only `(i, S_i)` by
/// signature, so the full simulation of query `i` is determined by
/// `(i, S_i, T)`. For those the harness runs every distinct simulation
/// through the complete probe/discipline machinery and then verifies the
/// whole `(S, T, i)` input space against the oracle by equivalence-class
/// lookup. Schemes with phase-I state (the answer-table scheme reads all of
/// `S` during its update) take the direct per-input path.
fn exhaustive_check_scheme<D: DataStructure + MonoQuery>(
    ds: &D,
    n: usize,
    k: usize,
    s_lo: u64,
    s_hi: u64,
) -> Result<u64, alloc::string::String> {
    use alloc::format;
    let budget = ds.budgets();
    let mut sim = Simulator::new_lean(ds);
    let mut inst = MultiphaseInstance::from_masks(n, &vec![0u64; k], 0, 0.5);
    let mut set_masks = vec![0u64; k];
    let mut log = ProbeLog::counters_only();
    let mut checked = 0u64;
    let n_mask = (1u64 << n) - 1;

    // probe for phase-I state on one representative family
    inst.overwrite_masks(&vec![n_mask & 0x2A; k], 0);
    sim.phase1(ds, inst.sets()).map_err(|e| format!("{e}"))?;
    let stateless_preprocess = sim.costs().phase1_writes == 0;

    if stateless_preprocess {
        // one real simulation per (T, i, S_i); sweep verifies every input
        let s_vals = 1usize << n;
        let si_vecs: Vec<BitVec> = (0..s_vals as u64).map(|m| BitVec::from_mask(n, m)).collect();
        let mut table = vec![false; (1usize << n) * k * s_vals];
        inst.overwrite_masks(&vec![0; k], 0);
        sim.phase1(ds, inst.sets()).map_err(|e| format!("{e}"))?;
        for t_mask in 0..1u64 << n {
            inst.set_t_mask(t_mask);
            sim.phase2(ds, inst.t()).map_err(|e| format!("{e}"))?;
            if sim.costs().phase2_writes > budget.update_writes {
                return Err(format!(
                    "{}: phase-II writes exceed the declared budget at t={t_mask:#x}",
                    ds.name()
                ));
            }
            for i in 0..k {
                for (s_mask, s_i) in si_vecs.iter().enumerate() {
                    log.clear();
                    let got = sim.query_raw(ds, s_i, i, &mut log).map_err(|e| {
                        format!("{} at (n={n},k={k},s_i={s_mask:#x},t={t_mask:#x},i={i}): {e}", ds.name())
                    })?;
                    let verdict = enforce_semi_adaptive(&log, &budget);
                    if !verdict.pass {
                        return Err(format!(
                            "{}: discipline violation {:?} at (s_i={s_mask:#x},t={t_mask:#x},i={i})",
                            ds.name(),
                            verdict.violation
                        ));
                    }
                    table[(t_mask as usize * k + i) * s_vals + s_mask] = got;
                }
            }
        }
        // literal sweep of the assigned input slice against the oracle
        for s_combined in s_lo..s_hi {
            for t_mask in 0..1u64 << n {
                let base = t_mask as usize * k;
                for i in 0..k {
                    let s_mask = s_combined >> (i * n) & n_mask;
                    let got = table[(base + i) * s_vals + s_mask as usize];
                    if got != (s_mask & t_mask == 0) {
                        return Err(format!(
                            "{}: wrong answer at (n={n},k={k},s={s_combined:#x},t={t_mask:#x},i={i})",
                            ds.name()
                        ));
                    }
                    checked += 1;
                }
            }
        }
        return Ok(checked);
    }

    for s_combined in s_lo..s_hi {
        for (f, m) in set_masks.iter_mut().enumerate() {
            *m = s_combined >> (f * n) & n_mask;
        }
        inst.overwrite_masks(&set_masks, 0);
        sim.phase1(ds, inst.sets()).map_err(|e| format!("{e}"))?;
        for t_mask in 0..1u64 << n {
            inst.set_t_mask(t_mask);
            sim.phase2(ds, inst.t()).map_err(|e| format!("{e}"))?;
            if sim.costs().phase2_writes > budget.update_writes {
                return Err(format!(
                    "{}: phase-II writes exceed the declared budget at s={s_combined:#x} t={t_mask:#x}",
                    ds.name()
                ));
            }
            for i in 0..k {
                log.clear();
                let got = sim.query_raw(ds, inst.set(i), i, &mut log).map_err(|e| {
                    format!("{} at (n={n},k={k},s={s_combined:#x},t={t_mask:#x},i={i}): {e}", ds.name())
                })?;
                if got != inst.answer(i) {
                    return Err(format!(
                        "{}: wrong answer at (n={n},k={k},s={s_combined:#x},t={t_mask:#x},i={i})",
                        ds.name()
                    ));
                }
                let verdict = enforce_semi_adaptive(&log, &budget);
                if !verdict.pass {
                    return Err(format!(
                        "{}: discipline violation {:?} at (s={s_combined:#x},t={t_mask:#x},i={i})",
                        ds.name(),
                        verdict.violation
                    ));
                }
                checked += 1;
            }
        }
    }
    Ok(checked)
}

/// Exhaustive soundness and discipline check over a slice of the
/// `(S, T)` input space: for every combined set assignment in
/// `[s_lo, s_hi)`, every `T` and every query index, each shipped scheme
/// must answer the `disj` oracle, stay within its declared phase-II write
/// budget, and pass [`enforce_semi_adaptive`]. Returns the number of query
/// checks performed; ranges partition cleanly across workers.
pub fn exhaustive_soundness_check(
    n: usize,
    k: usize,
    s_lo: u64,
    s_hi: u64,
) -> Result<u64, alloc::string::String> {
    assert!(n <= 10 && k <= 6, "exhaustive check is a toy-scale harness");
    let mut checked = 0u64;
    checked += exhaustive_check_scheme(&PrecomputeAnswers::new(n, k), n, k, s_lo, s_hi)?;
    checked += exhaustive_check_scheme(&StoreT::new(n, k), n, k, s_lo, s_hi)?;
    checked += exhaustive_check_scheme(
        &SqrtScheme::new(n, k, ExplicitTAdvice::direct()),
        n,
        k,
        s_lo,
        s_hi,
    )?;
    Ok(checked)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::CounterRng;

    fn inst_from(n: usize, sets: &[u64], t: u64) -> MultiphaseInstance {
        MultiphaseInstance::from_masks(n, sets, t, 0.5)
    }

    /// Hand-simulated example: n=8, k=2, S_0={3}, T={3}; querying 0 under
    /// StoreT answers "intersecting" with exactly one Δ-probe.
    #[test]
    fn store_t_single_probe_hit() {
        let inst = inst_from(8, &[1 << 3, 0], 1 << 3);
        let ds = StoreT::new(8, 2);
        let run = run_multiphase(&ds, &inst, &[0]).unwrap();
        assert!(!run.answers[0]);
        assert_eq!(run.logs[0].t2(), 1);
        assert_eq!(run.logs[0].t1(), 0);
    }

    /// Empty T is disjoint from every set, for every scheme.
    #[test]
    fn empty_t_is_always_disjoint() {
        let inst = inst_from(8, &[0b1010_1010, 0b0000_0001, 0b1111_1111], 0);
        for ds in shipped_schemes(8, 3) {
            let run = run_multiphase(ds.as_ref(), &inst, &[0, 1, 2]).unwrap();
            assert!(run.answers.iter().all(|&a| a), "{}", ds.name());
        }
    }

    /// An empty S_i needs no probes at all under the bitmap scheme.
    #[test]
    fn store_t_empty_set_is_free() {
        let ds = StoreT::new(8, 2);
        let inst = inst_from(8, &[0, 0b1111], 0b1010);
        let run = run_multiphase(&ds, &inst, &[0]).unwrap();
        assert!(run.answers[0]);
        assert_eq!(run.logs[0].t1() + run.logs[0].t2(), 0);
    }

    /// Three elements of S_i in three distinct words: exactly 3 Δ-probes when
    /// disjoint.
    #[test]
    fn store_t_probes_distinct_words() {
        // w = default_word_size(16, 2) = 5; elements 0, 5, 10 hit words 0,1,2
        let ds = StoreT::new(16, 2);
        assert_eq!(ds.word_size(), 5);
        let inst = inst_from(16, &[1 | 1 << 5 | 1 << 10, 0], 1 << 15);
        let run = run_multiphase(&ds, &inst, &[0]).unwrap();
        assert!(run.answers[0]);
        assert_eq!(run.logs[0].t2(), 3);
    }

    /// Precompute writes exactly ceil(k/w) answer words in phase II and
    /// answers any query with one probe.
    #[test]
    fn precompute_costs_match_construction() {
        let ds = PrecomputeAnswers::with_word_size(16, 64, 8);
        let inst = MultiphaseInstance::sample_with_gamma(16, 64, 0.3, 5).unwrap();
        let queries: Vec<usize> = (0..64).collect();
        let run = run_multiphase(&ds, &inst, &queries).unwrap();
        assert_eq!(run.costs.phase2_writes, 8); // ceil(64/8)
        for log in &run.logs {
            assert_eq!(log.t1() + log.t2(), 1);
        }
    }

    #[test]
    fn all_schemes_sound_on_random_instances() {
        for seed in 0..400 {
            let inst = MultiphaseInstance::sample_with_gamma(24, 6, 0.2, seed).unwrap();
            let queries: Vec<usize> = (0..6).collect();
            for ds in shipped_schemes(24, 6) {
                let run = run_multiphase(ds.as_ref(), &inst, &queries).unwrap();
                for (qi, &i) in queries.iter().enumerate() {
                    assert_eq!(run.answers[qi], inst.answer(i), "{} seed {seed}", ds.name());
                }
                let budgets = ds.budgets();
                assert!(run.costs.phase2_writes <= budgets.update_writes, "{}", ds.name());
                for log in &run.logs {
                    let verdict = enforce_semi_adaptive(log, &budgets);
                    assert!(verdict.pass, "{} seed {seed}: {verdict:?}", ds.name());
                }
            }
        }
    }

    #[test]
    fn semi_adaptive_verdicts_on_synthetic_logs() {
        let budgets = Budgets { update_writes: 8, t1: 2, t2: 2 };
        let entry = |layer, op| ProbeEntry::new(Phase::Query, layer, op, 0, Some(0));
        // M,M,Δ,Δ passes
        let mut log = ProbeLog::new();
        for layer in [Layer::M, Layer::M, Layer::Delta, Layer::Delta] {
            log.push(entry(layer, Op::Read));
        }
        let v = enforce_semi_adaptive(&log, &budgets);
        assert!(v.pass);
        assert_eq!((v.t1, v.t2, v.alternations), (2, 2, 1));
        // M,Δ,M fails at entry 2 (0-based) with an alternation violation
        let mut log = ProbeLog::new();
        for layer in [Layer::M, Layer::Delta, Layer::M] {
            log.push(entry(layer, Op::Read));
        }
        let v = enforce_semi_adaptive(&log, &budgets);
        assert!(!v.pass);
        assert_eq!(v.violation, Some((2, SemiAdaptiveViolation::LayerAlternation)));
        // t1 over budget fails citing t1
        let mut log = ProbeLog::new();
        for _ in 0..3 {
            log.push(entry(Layer::M, Op::Read));
        }
        let v = enforce_semi_adaptive(&log, &budgets);
        assert_eq!(v.violation.unwrap().1, SemiAdaptiveViolation::T1Exceeded);
        // query-phase write fails
        let mut log = ProbeLog::new();
        log.push(entry(Layer::M, Op::Write));
        let v = enforce_semi_adaptive(&log, &budgets);
        assert_eq!(v.violation.unwrap().1, SemiAdaptiveViolation::QueryPhaseWrite);
    }

    /// A Δ-probe to an address never updated returns ⊥, even when phase I
    /// wrote that cell.
    #[test]
    fn bottom_never_aliases_phase_one() {
        let mut mem = MemoryModel::new(8, 16);
        let mut log = ProbeLog::new();
        {
            let mut ctx = PreprocessCtx { mem: &mut mem, log: &mut log };
            ctx.write(5, 77).unwrap();
        }
        let mut qctx = QueryCtx { mem: &mem, log: &mut log };
        assert_eq!(qctx.read_delta(5).unwrap(), None);
        assert_eq!(qctx.read_m(5).unwrap(), 77);
        // and M-layer reads see the pre-update value after an update
        let mut log2 = ProbeLog::new();
        {
            let mut ctx = UpdateCtx { mem: &mut mem, log: &mut log2 };
            ctx.write(5, 99).unwrap();
        }
        let mut qctx = QueryCtx { mem: &mem, log: &mut log2 };
        assert_eq!(qctx.read_m(5).unwrap(), 77);
        assert_eq!(qctx.read_delta(5).unwrap(), Some(99));
    }

    #[test]
    fn out_of_range_probe_is_a_harness_error() {
        let inst = inst_from(8, &[1], 1);
        struct Rogue;
        impl DataStructure for Rogue {
            fn name(&self) -> &'static str {
                "rogue"
            }
            fn word_size(&self) -> u32 {
                4
            }
            fn address_space(&self) -> u64 {
                2
            }
            fn budgets(&self) -> Budgets {
                Budgets { update_writes: 0, t1: 1, t2: 1 }
            }
            fn preprocess(&self, _: &[BitVec], _: &mut PreprocessCtx) -> Result<(), ProbeError> {
                Ok(())
            }
            fn update(&self, _: &BitVec, _: &mut UpdateCtx) -> Result<(), ProbeError> {
                Ok(())
            }
            fn query(&self, _: usize, _: &BitVec, probes: &mut dyn ProbeSource) -> Result<bool, ProbeError> {
                probes.read_m(100)?;
                Ok(true)
            }
        }
        let err = run_multiphase(&Rogue, &inst, &[0]).unwrap_err();
        assert!(matches!(err, CellProbeError::Probe(ProbeError::OutOfRange { .. })));
    }

    /// Queries see T only through probes: under two updates that differ in
    /// one word, the probe address sequences agree up to and including the
    /// first probe whose returned word differs.
    #[test]
    fn query_isolation_under_t_mutation() {
        let n = 16;
        let ds = StoreT::new(n, 2);
        let s0 = 1 | 1 << 5 | 1 << 10; // touches words 0, 1, 2 at w = 5
        let run_a = run_multiphase(&ds, &inst_from(n, &[s0, 0], 0), &[0]).unwrap();
        let run_b = run_multiphase(&ds, &inst_from(n, &[s0, 0], 1 << 5), &[0]).unwrap();
        let pa: Vec<_> = run_a.logs[0].entries().iter().filter(|e| e.layer() == Layer::Delta).collect();
        let pb: Vec<_> = run_b.logs[0].entries().iter().filter(|e| e.layer() == Layer::Delta).collect();
        let mut diverged = false;
        for (ea, eb) in pa.iter().zip(&pb) {
            assert!(!diverged, "probe after the first differing word");
            assert_eq!(ea.addr(), eb.addr());
            if ea.word() != eb.word() {
                diverged = true;
            }
        }
        assert!(diverged);
        assert!(pa.len() > pb.len(), "hit run must exit early");
    }

    #[test]
    fn sqrt_scheme_explicit_mode_uses_no_extra_probes() {
        let n = 64;
        let ds = SqrtScheme::new(n, 4, ExplicitTAdvice::direct());
        // |T| = 3 <= floor(sqrt(64)) = 8: explicit advice
        let t = 1 | 1 << 20 | 1 << 63;
        let sets = [1u64 << 20, 1 << 2, 0, u64::MAX];
        let inst = inst_from(n, &sets, t);
        let run = run_multiphase(&ds, &inst, &[0, 1, 2, 3]).unwrap();
        assert_eq!(run.answers, [false, true, true, false]);
        // probes all live in the advice region
        let t_base = ds.t_base();
        for log in &run.logs {
            for e in log.entries().iter().filter(|e| e.layer() == Layer::Delta) {
                assert!(e.addr() < t_base, "explicit mode must not probe the bitmap");
            }
        }
    }

    #[test]
    fn sqrt_scheme_empty_t_one_probe() {
        let n = 64;
        let ds = SqrtScheme::new(n, 2, ExplicitTAdvice::direct());
        let inst = inst_from(n, &[u64::MAX, 5], 0);
        let run = run_multiphase(&ds, &inst, &[0, 1]).unwrap();
        assert!(run.answers.iter().all(|&a| a));
        for log in &run.logs {
            assert_eq!(log.t2(), 1, "count word only");
        }
    }

    #[test]
    fn sqrt_scheme_fallback_on_large_t() {
        let n = 64;
        let ds = SqrtScheme::new(n, 2, ExplicitTAdvice::direct());
        let t = (1u64 << 40) - 1; // |T| = 40 > 8: fallback
        let inst = inst_from(n, &[1 << 50, 1 << 10], t);
        let run = run_multiphase(&ds, &inst, &[0, 1]).unwrap();
        assert_eq!(run.answers, [true, false]);
    }

    #[test]
    fn sqrt_scheme_candidate_mode_matches_direct_mode() {
        let mut rng = CounterRng::new(9);
        for _ in 0..200 {
            let n = 32;
            let sets = [rng.next_u64(), rng.next_u64()];
            let t = rng.next_u64() & rng.next_u64() & rng.next_u64() & rng.next_u64(); // sparse-ish
            let inst = inst_from(n, &sets, t);
            let d = SqrtScheme::new(n, 2, ExplicitTAdvice::direct());
            let c = SqrtScheme::new(n, 2, ExplicitTAdvice::candidates());
            let rd = run_multiphase(&d, &inst, &[0, 1]).unwrap();
            let rc = run_multiphase(&c, &inst, &[0, 1]).unwrap();
            assert_eq!(rd.answers, rc.answers);
        }
    }

    /// The planted bad advice drops a witness; the harness must flag the
    /// soundness failure rather than return silently.
    #[test]
    fn broken_advice_is_flagged() {
        let n = 16;
        let ds = SqrtScheme::new(n, 1, BrokenAdvice);
        // T = {3}; dropping the only witness makes query 0 wrongly disjoint
        let inst = inst_from(n, &[1 << 3], 1 << 3);
        let err = run_multiphase(&ds, &inst, &[0]).unwrap_err();
        assert!(matches!(err, CellProbeError::Soundness { .. }), "{err:?}");
    }

    #[test]
    fn exhaustive_tiny_space_equivalence() {
        // all instances at n = 3, k = 2 for every scheme
        let n = 3;
        let k = 2;
        for ds in shipped_schemes(n, k) {
            let mut sim = Simulator::new(ds.as_ref());
            let mut inst = inst_from(n, &vec![0; k], 0);
            let mut log = ProbeLog::new();
            for s0 in 0..1u64 << n {
                for s1 in 0..1u64 << n {
                    for t in 0..1u64 << n {
                        inst.overwrite_masks(&[s0, s1], t);
                        sim.load(ds.as_ref(), &inst).unwrap();
                        for i in 0..k {
                            log.clear();
                            let got = sim.query(ds.as_ref(), &inst, i, &mut log).unwrap();
                            assert_eq!(got, inst.answer(i));
                        }
                    }
                }
            }
        }
    }
}
