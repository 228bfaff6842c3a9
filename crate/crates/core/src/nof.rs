//! Number-on-forehead protocol framework for the Multiphase game.
//!
//! Players and visibility:
//!
//! - **Charlie** sees `(S, T)` and sends private advice `U` to Bob. He never
//!   sees the index `i`.
//! - **Megan** sees `(S, i)` and broadcasts `Π^M` to Alice and Bob (in the
//!   modified model she additionally receives `U'(S,T)` from Charlie).
//! - **Alice** sees `(S_i, i)` plus the broadcast and transcript.
//! - **Bob** sees `(T, i, U)` plus the broadcast and transcript.
//!
//! Alice and Bob then alternate (Alice first); the answer bit is the final
//! bit of the final round. Restricted 3-party protocols embed into this
//! model by letting Megan speak Alice's first message.
//!
//! Message functions are deterministic opaque callables with declared
//! visibility; [`visibility_audit`] enforces the declarations statistically
//! by counterfactually resampling hidden inputs while holding declared
//! inputs fixed. Bit-length accounting counts raw payload bits; framing is
//! excluded.

use crate::bits::{BitString, BitVec};
use crate::cellprobe::{
    enforce_semi_adaptive, DataStructure, MemoryModel, ProbeError, ProbeLog, ProbeSource,
    Simulator,
};
use crate::circuits::{audit_non_adaptive, probe_plan, CircuitError, StaticDataStructure};
use crate::exact::RationalTable;
use crate::info::{InfoError, JointTable};
use crate::instance::{all_ordered_tuples, MultiphaseInstance};
use crate::rng::CounterRng;
use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum NofError {
    QueryOutOfRange { i: usize, k: usize },
    CostOverflow { message: &'static str, bits: usize, max: usize },
    RoundLimit { max: usize },
    EmptyAnswer,
    NotSemiAdaptive { query: usize },
    AdaptiveStatic { query: usize, probe: usize },
    AnswerMismatch { i: usize, protocol: bool, oracle: bool },
    EnumerationTooLarge { bits: usize },
    AuditFailed { constraint: String },
    Probe(ProbeError),
    Info(InfoError),
    Circuit(CircuitError),
}

impl fmt::Display for NofError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NofError::QueryOutOfRange { i, k } => write!(f, "query {i} out of range [0, {k})"),
            NofError::CostOverflow { message, bits, max } => {
                write!(f, "{message} message of {bits} bits exceeds budget {max}")
            }
            NofError::RoundLimit { max } => write!(f, "protocol exceeded {max} rounds"),
            NofError::EmptyAnswer => write!(f, "final round carried no answer bit"),
            NofError::NotSemiAdaptive { query } => {
                write!(f, "data structure is not semi-adaptive (query {query}); construction refused")
            }
            NofError::AdaptiveStatic { query, probe } => {
                write!(f, "static structure probes adaptively (query {query}, probe {probe}); refused")
            }
            NofError::AnswerMismatch { i, protocol, oracle } => {
                write!(f, "protocol answered {protocol} but DISJ = {oracle} at i = {i}")
            }
            NofError::EnumerationTooLarge { bits } => {
                write!(f, "exhaustive enumeration needs 2^{bits} inputs; bound is 2^{MAX_ENUMERATION_BITS}")
            }
            NofError::AuditFailed { constraint } => write!(f, "visibility audit failed: {constraint}"),
            NofError::Probe(e) => write!(f, "probe error: {e}"),
            NofError::Info(e) => write!(f, "info engine error: {e}"),
            NofError::Circuit(e) => write!(f, "circuit error: {e}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for NofError {}

impl From<ProbeError> for NofError {
    fn from(e: ProbeError) -> Self {
        NofError::Probe(e)
    }
}

impl From<InfoError> for NofError {
    fn from(e: InfoError) -> Self {
        NofError::Info(e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Speaker {
    Alice,
    Bob,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Message {
    pub speaker: Speaker,
    pub bits: BitString,
}

/// What a round function returns: another message, or the final message
/// whose last bit is the protocol's answer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RoundOutcome {
    Send(BitString),
    Answer(BitString),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProtocolLimits {
    pub u_max_bits: usize,
    pub u_prime_max_bits: usize,
    pub megan_max_bits: usize,
    pub round_max_bits: usize,
    /// Budget on `|Π_i|` = broadcast plus all rounds.
    pub pi_budget_bits: usize,
    pub max_rounds: usize,
}

impl ProtocolLimits {
    pub fn generous() -> Self {
        ProtocolLimits {
            u_max_bits: 1 << 24,
            u_prime_max_bits: 1 << 24,
            megan_max_bits: 1 << 24,
            round_max_bits: 1 << 24,
            pi_budget_bits: 1 << 24,
            max_rounds: 1 << 16,
        }
    }
}

/// A 4-party (or modified 4-party) deterministic protocol. Implementations
/// must compute each message from the declared arguments only; captured
/// state may depend solely on inputs the player legitimately sees.
pub trait FourParty {
    fn name(&self) -> &'static str;

    fn limits(&self) -> ProtocolLimits {
        ProtocolLimits::generous()
    }

    /// Charlie's private advice `U(S, T)` to Bob.
    fn charlie(&self, sets: &[BitVec], t: &BitVec) -> Result<BitString, NofError>;

    /// Charlie's message to Megan (modified model only).
    fn charlie_to_megan(&self, _sets: &[BitVec], _t: &BitVec) -> Result<Option<BitString>, NofError> {
        Ok(None)
    }

    /// Megan's broadcast `Π^M(S, i)` (plus `U'` in the modified model).
    fn megan(&self, sets: &[BitVec], i: usize, u_prime: Option<&BitString>) -> Result<BitString, NofError>;

    /// Alice's round (round index is even).
    fn alice(
        &self,
        round: usize,
        s_i: &BitVec,
        i: usize,
        pi_m: &BitString,
        prefix: &[Message],
    ) -> Result<RoundOutcome, NofError>;

    /// Bob's round (round index is odd).
    fn bob(
        &self,
        round: usize,
        t: &BitVec,
        i: usize,
        u: &BitString,
        pi_m: &BitString,
        prefix: &[Message],
    ) -> Result<RoundOutcome, NofError>;
}

/// Per-index transcript `(U, Π^M_i, Π^{A<->B}_i)` with the answer as the
/// final bit of the final round.
#[derive(Debug, Clone, PartialEq)]
pub struct Transcript {
    pub u: BitString,
    pub u_prime: Option<BitString>,
    pub megan: BitString,
    pub rounds: Vec<Message>,
    pub answer: bool,
}

impl Transcript {
    /// `|Π_i|`: broadcast plus round payloads, in bits.
    pub fn pi_bits(&self) -> usize {
        self.megan.len() + self.rounds.iter().map(|m| m.bits.len()).sum::<usize>()
    }

    pub fn u_bits(&self) -> usize {
        self.u.len()
    }
}

fn ensure_budget(message: &'static str, bits: usize, max: usize) -> Result<(), NofError> {
    if bits > max {
        return Err(NofError::CostOverflow { message, bits, max });
    }
    Ok(())
}

/// Runs a protocol on one instance and query index, enforcing budgets and
/// model order (Charlie, then Megan, then alternating Alice/Bob).
pub fn run_protocol(proto: &dyn FourParty, inst: &MultiphaseInstance, i: usize) -> Result<Transcript, NofError> {
    if i >= inst.k() {
        return Err(NofError::QueryOutOfRange { i, k: inst.k() });
    }
    let lim = proto.limits();
    let u = proto.charlie(inst.sets(), inst.t())?;
    ensure_budget("charlie advice", u.len(), lim.u_max_bits)?;
    let u_prime = proto.charlie_to_megan(inst.sets(), inst.t())?;
    if let Some(up) = &u_prime {
        ensure_budget("charlie-to-megan", up.len(), lim.u_prime_max_bits)?;
    }
    let megan = proto.megan(inst.sets(), i, u_prime.as_ref())?;
    ensure_budget("megan broadcast", megan.len(), lim.megan_max_bits)?;

    let mut rounds: Vec<Message> = Vec::new();
    let mut pi_bits = megan.len();
    let answer;
    loop {
        if rounds.len() >= lim.max_rounds {
            return Err(NofError::RoundLimit { max: lim.max_rounds });
        }
        let round = rounds.len();
        let speaker = if round.is_multiple_of(2) { Speaker::Alice } else { Speaker::Bob };
        let outcome = match speaker {
            Speaker::Alice => proto.alice(round, inst.set(i), i, &megan, &rounds)?,
            Speaker::Bob => proto.bob(round, inst.t(), i, &u, &megan, &rounds)?,
        };
        let (bits, done) = match outcome {
            RoundOutcome::Send(b) => (b, false),
            RoundOutcome::Answer(b) => (b, true),
        };
        ensure_budget("round", bits.len(), lim.round_max_bits)?;
        pi_bits += bits.len();
        ensure_budget("transcript", pi_bits, lim.pi_budget_bits)?;
        if done {
            let bit = bits.last().ok_or(NofError::EmptyAnswer)?;
            rounds.push(Message { speaker, bits });
            answer = bit;
            break;
        }
        rounds.push(Message { speaker, bits });
    }
    Ok(Transcript { u, u_prime, megan, rounds, answer })
}

/// A family of protocols indexed by instance: `build` derives whatever the
/// players may legitimately precompute (e.g. a data structure's memory
/// image). Audits rebuild under counterfactual instances.
pub trait ProtocolFamily {
    fn name(&self) -> &'static str;
    fn build<'a>(&'a self, inst: &MultiphaseInstance) -> Result<Box<dyn FourParty + 'a>, NofError>;
}

/// Wrapper for protocols without instance-derived state.
pub struct Stateless<P>(pub P);

impl<P: FourParty + Clone + 'static> ProtocolFamily for Stateless<P> {
    fn name(&self) -> &'static str {
        self.0.name()
    }

    fn build<'a>(&'a self, _inst: &MultiphaseInstance) -> Result<Box<dyn FourParty + 'a>, NofError> {
        Ok(Box::new(self.0.clone()))
    }
}

// ---------------------------------------------------------------------------
// Visibility audit
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AuditConstraint {
    /// `U` may not depend on the query index.
    CharlieIgnoresIndex,
    /// `Π^M` may not depend on `T` (except through `U'` in the modified model).
    MeganIgnoresT,
    /// Alice's round may depend on `S_{≠i}` and `T` only through the transcript.
    AliceRound(usize),
    /// Bob's round may depend on `S` only through `U`, `Π^M` and the transcript.
    BobRound(usize),
}

impl fmt::Display for AuditConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AuditConstraint::CharlieIgnoresIndex => write!(f, "charlie"),
            AuditConstraint::MeganIgnoresT => write!(f, "megan"),
            AuditConstraint::AliceRound(r) => write!(f, "alice round {r}"),
            AuditConstraint::BobRound(r) => write!(f, "bob round {r}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintAudit {
    pub constraint: AuditConstraint,
    pub trials: u32,
    pub violations: u32,
    /// (trial, first differing bit position) of the first violation;
    /// `None` position means a length or outcome-kind mismatch.
    pub first_violation: Option<(u32, Option<usize>)>,
}

impl ConstraintAudit {
    fn new(constraint: AuditConstraint) -> Self {
        ConstraintAudit { constraint, trials: 0, violations: 0, first_violation: None }
    }

    fn observe(&mut self, trial: u32, diff: Option<Option<usize>>) {
        self.trials += 1;
        if let Some(pos) = diff {
            self.violations += 1;
            if self.first_violation.is_none() {
                self.first_violation = Some((trial, pos));
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditReport {
    pub protocol: String,
    pub constraints: Vec<ConstraintAudit>,
}

impl AuditReport {
    pub fn clean(&self) -> bool {
        self.constraints.iter().all(|c| c.violations == 0)
    }

    pub fn first_failure(&self) -> Option<&ConstraintAudit> {
        self.constraints.iter().find(|c| c.violations > 0)
    }
}

fn first_diff(a: &BitString, b: &BitString) -> Option<Option<usize>> {
    if a.len() != b.len() {
        return Some(None);
    }
    for (pos, (x, y)) in a.iter().zip(b.iter()).enumerate() {
        if x != y {
            return Some(Some(pos));
        }
    }
    None
}

fn outcome_diff(a: &RoundOutcome, b: &RoundOutcome) -> Option<Option<usize>> {
    match (a, b) {
        (RoundOutcome::Send(x), RoundOutcome::Send(y)) => first_diff(x, y),
        (RoundOutcome::Answer(x), RoundOutcome::Answer(y)) => first_diff(x, y),
        _ => Some(None),
    }
}

fn resample_vec(n: usize, rng: &mut CounterRng) -> BitVec {
    let mut v = BitVec::zeros(n);
    for j in 0..n {
        if rng.bernoulli(0.5) {
            v.set(j, true);
        }
    }
    v
}

/// Counterfactual visibility audit at one `(instance, i)`. Hidden inputs are
/// resampled uniformly (full-support coverage); declared inputs are replayed
/// byte-identically from the base transcript.
pub fn visibility_audit(
    family: &dyn ProtocolFamily,
    base: &MultiphaseInstance,
    i: usize,
    trials: u32,
    seed: u64,
) -> Result<AuditReport, NofError> {
    let proto = family.build(base)?;
    let tx = run_protocol(proto.as_ref(), base, i)?;
    let mut rng = CounterRng::new(seed ^ 0xAD17);

    let mut charlie = ConstraintAudit::new(AuditConstraint::CharlieIgnoresIndex);
    let mut megan = ConstraintAudit::new(AuditConstraint::MeganIgnoresT);
    let mut alice: Vec<ConstraintAudit> = (0..tx.rounds.len())
        .step_by(2)
        .map(|r| ConstraintAudit::new(AuditConstraint::AliceRound(r)))
        .collect();
    let mut bob: Vec<ConstraintAudit> = (1..tx.rounds.len())
        .step_by(2)
        .map(|r| ConstraintAudit::new(AuditConstraint::BobRound(r)))
        .collect();

    let n = base.n();
    let k = base.k();
    for trial in 0..trials {
        // Charlie never receives i; verify U is reproducible and
        // deterministic when the surrounding query changes.
        let u2 = proto.charlie(base.sets(), base.t())?;
        charlie.observe(trial, first_diff(&tx.u, &u2));

        // Megan with T resampled, everything she sees held fixed.
        {
            let t2 = resample_vec(n, &mut rng);
            let inst2 = MultiphaseInstance::from_parts(
                n,
                k,
                base.sets().to_vec(),
                t2,
                base.gamma(),
                base.seed(),
                false,
            )
            .expect("resampled instance is well-formed");
            let p2 = family.build(&inst2)?;
            let m2 = p2.megan(base.sets(), i, tx.u_prime.as_ref())?;
            megan.observe(trial, first_diff(&tx.megan, &m2));
        }

        // Alice with S_{≠i} and T resampled, holding S_i.
        {
            let mut sets2: Vec<BitVec> = (0..k).map(|_| resample_vec(n, &mut rng)).collect();
            sets2[i] = base.set(i).clone();
            let t2 = resample_vec(n, &mut rng);
            let inst2 =
                MultiphaseInstance::from_parts(n, k, sets2, t2, base.gamma(), base.seed(), false)
                    .expect("resampled instance is well-formed");
            let p2 = family.build(&inst2)?;
            for (slot, r) in (0..tx.rounds.len()).step_by(2).enumerate() {
                let base_out = replay_round(&tx, r);
                let got = p2.alice(r, base.set(i), i, &tx.megan, &tx.rounds[..r])?;
                alice[slot].observe(trial, outcome_diff(&base_out, &got));
            }
        }

        // Bob with the whole of S resampled, holding T (and U, Π^M from the
        // base transcript).
        {
            let sets2: Vec<BitVec> = (0..k).map(|_| resample_vec(n, &mut rng)).collect();
            let inst2 = MultiphaseInstance::from_parts(
                n,
                k,
                sets2,
                base.t().clone(),
                base.gamma(),
                base.seed(),
                false,
            )
            .expect("resampled instance is well-formed");
            let p2 = family.build(&inst2)?;
            for (slot, r) in (1..tx.rounds.len()).step_by(2).enumerate() {
                let base_out = replay_round(&tx, r);
                let got = p2.bob(r, base.t(), i, &tx.u, &tx.megan, &tx.rounds[..r])?;
                bob[slot].observe(trial, outcome_diff(&base_out, &got));
            }
        }
    }

    let mut constraints = vec![charlie, megan];
    constraints.extend(alice);
    constraints.extend(bob);
    Ok(AuditReport { protocol: family.name().to_string(), constraints })
}

fn replay_round(tx: &Transcript, r: usize) -> RoundOutcome {
    let bits = tx.rounds[r].bits.clone();
    if r + 1 == tx.rounds.len() {
        RoundOutcome::Answer(bits)
    } else {
        RoundOutcome::Send(bits)
    }
}

// ---------------------------------------------------------------------------
// Reduction: semi-adaptive dynamic data structure -> 4-party protocol
// ---------------------------------------------------------------------------

/// Protocol family induced by a semi-adaptive data structure.
///
/// `U` is the update transcript (the updated cells with their contents),
/// `Π^M_i` carries the addresses and contents of the query's `M`-layer
/// probes (Megan can produce it: the `M` layer is a function of `S` alone),
/// Alice's rounds name `Δ`-layer addresses, and Bob's rounds return the
/// probed contents with `⊥` encoded as a cleared presence flag.
pub struct DsProtocolFamily<D: DataStructure> {
    ds: D,
    name: &'static str,
}

pub fn ds_to_4party<D: DataStructure>(ds: D) -> DsProtocolFamily<D> {
    let name = ds.name();
    DsProtocolFamily { ds, name }
}

impl<D: DataStructure> DsProtocolFamily<D> {
    pub fn data_structure(&self) -> &D {
        &self.ds
    }

    fn a_bits(&self) -> u32 {
        crate::cellprobe::address_bits(&self.ds)
    }

    /// Declared per-element update budget `t_u`, normalized so the advice
    /// bound reads `|U| <= t_u * n * w` bits.
    pub fn declared_t_u(&self, n: usize) -> u64 {
        let w = self.ds.word_size() as u64;
        let per_write = self.a_bits() as u64 + w;
        (self.ds.budgets().update_writes * per_write).div_ceil(n as u64 * w)
    }
}

struct DsProtocol<'a, D: DataStructure> {
    ds: &'a D,
    /// Memory after phase I; a function of `S` only, so Megan may hold it.
    memory: MemoryModel,
    /// Serialized update transcript (sorted `(address, word)` pairs).
    u_bits: BitString,
    a_bits: u32,
    w: u32,
    max_rounds: usize,
}

fn serialize_delta(pairs: &[(u64, u64)], a_bits: u32, w: u32) -> BitString {
    let mut out = BitString::new();
    for &(addr, word) in pairs {
        out.push_uint(addr, a_bits);
        out.push_uint(word, w);
    }
    out
}

fn parse_delta(bits: &BitString, a_bits: u32, w: u32) -> BTreeMap<u64, u64> {
    let entry = (a_bits + w) as usize;
    let mut map = BTreeMap::new();
    let mut at = 0;
    while at + entry <= bits.len() {
        let addr = bits.read_uint(at, a_bits);
        let word = bits.read_uint(at + a_bits as usize, w);
        map.insert(addr, word);
        at += entry;
    }
    map
}

/// Probe source replaying Megan's broadcast for `M` reads and the Bob
/// replies embedded in the transcript for `Δ` reads; suspends when the query
/// needs a `Δ` word that has not been communicated yet.
struct TranscriptOracle<'a> {
    pi_m: &'a BitString,
    a_bits: u32,
    w: u32,
    m_at: usize,
    delta_replies: Vec<Option<u64>>,
    delta_at: usize,
    pending_addr: Option<u64>,
}

impl<'a> TranscriptOracle<'a> {
    fn new(pi_m: &'a BitString, prefix: &[Message], a_bits: u32, w: u32) -> Self {
        // Bob's replies: [presence flag][w-bit word]
        let delta_replies = prefix
            .iter()
            .filter(|m| m.speaker == Speaker::Bob)
            .map(|m| if m.bits.get(0) { Some(m.bits.read_uint(1, w)) } else { None })
            .collect();
        TranscriptOracle { pi_m, a_bits, w, m_at: 0, delta_replies, delta_at: 0, pending_addr: None }
    }
}

impl ProbeSource for TranscriptOracle<'_> {
    fn read_m(&mut self, addr: u64) -> Result<u64, ProbeError> {
        let entry = (self.a_bits + self.w) as usize;
        if self.m_at + entry > self.pi_m.len() {
            return Err(ProbeError::Suspended);
        }
        let rec_addr = self.pi_m.read_uint(self.m_at, self.a_bits);
        if rec_addr != addr {
            return Err(ProbeError::ReplayMismatch { expected: rec_addr, got: addr });
        }
        let word = self.pi_m.read_uint(self.m_at + self.a_bits as usize, self.w);
        self.m_at += entry;
        Ok(word)
    }

    fn read_delta(&mut self, addr: u64) -> Result<Option<u64>, ProbeError> {
        if self.delta_at < self.delta_replies.len() {
            let word = self.delta_replies[self.delta_at];
            self.delta_at += 1;
            Ok(word)
        } else {
            self.pending_addr = Some(addr);
            Err(ProbeError::Suspended)
        }
    }
}

/// Probe source answering `M` reads from a snapshot and recording them;
/// suspends at the first `Δ` read. Megan uses it to produce `Π^M_i`.
struct MLayerRecorder<'a> {
    memory: &'a MemoryModel,
    a_bits: u32,
    w: u32,
    recorded: BitString,
}

impl ProbeSource for MLayerRecorder<'_> {
    fn read_m(&mut self, addr: u64) -> Result<u64, ProbeError> {
        let word = self.memory.peek_m(addr).unwrap_or(0);
        self.recorded.push_uint(addr, self.a_bits);
        self.recorded.push_uint(word, self.w);
        Ok(word)
    }

    fn read_delta(&mut self, _addr: u64) -> Result<Option<u64>, ProbeError> {
        Err(ProbeError::Suspended)
    }
}

impl<D: DataStructure> FourParty for DsProtocol<'_, D> {
    fn name(&self) -> &'static str {
        "ds-induced"
    }

    fn limits(&self) -> ProtocolLimits {
        ProtocolLimits { max_rounds: self.max_rounds, ..ProtocolLimits::generous() }
    }

    fn charlie(&self, _sets: &[BitVec], _t: &BitVec) -> Result<BitString, NofError> {
        Ok(self.u_bits.clone())
    }

    fn megan(&self, sets: &[BitVec], i: usize, _u_prime: Option<&BitString>) -> Result<BitString, NofError> {
        let mut rec = MLayerRecorder {
            memory: &self.memory,
            a_bits: self.a_bits,
            w: self.w,
            recorded: BitString::new(),
        };
        match self.ds.query(i, &sets[i], &mut rec) {
            Ok(_) | Err(ProbeError::Suspended) => Ok(rec.recorded),
            Err(e) => Err(NofError::Probe(e)),
        }
    }

    fn alice(
        &self,
        _round: usize,
        s_i: &BitVec,
        i: usize,
        pi_m: &BitString,
        prefix: &[Message],
    ) -> Result<RoundOutcome, NofError> {
        let mut oracle = TranscriptOracle::new(pi_m, prefix, self.a_bits, self.w);
        match self.ds.query(i, s_i, &mut oracle) {
            Ok(answer) => {
                let mut bits = BitString::new();
                bits.push(answer);
                Ok(RoundOutcome::Answer(bits))
            }
            Err(ProbeError::Suspended) => {
                let addr = oracle.pending_addr.ok_or(NofError::Probe(ProbeError::Suspended))?;
                let mut bits = BitString::new();
                bits.push_uint(addr, self.a_bits);
                Ok(RoundOutcome::Send(bits))
            }
            Err(e) => Err(NofError::Probe(e)),
        }
    }

    fn bob(
        &self,
        _round: usize,
        _t: &BitVec,
        _i: usize,
        u: &BitString,
        _pi_m: &BitString,
        prefix: &[Message],
    ) -> Result<RoundOutcome, NofError> {
        // Bob reconstructs Δ from the update transcript alone.
        let delta = parse_delta(u, self.a_bits, self.w);
        let last = prefix.last().ok_or(NofError::EmptyAnswer)?;
        let addr = last.bits.read_uint(0, self.a_bits);
        let mut bits = BitString::new();
        match delta.get(&addr) {
            Some(&word) => {
                bits.push(true);
                bits.push_uint(word, self.w);
            }
            None => {
                bits.push(false);
                bits.push_uint(0, self.w);
            }
        }
        Ok(RoundOutcome::Send(bits))
    }
}

impl<D: DataStructure> ProtocolFamily for DsProtocolFamily<D> {
    fn name(&self) -> &'static str {
        self.name
    }

    fn build<'a>(&'a self, inst: &MultiphaseInstance) -> Result<Box<dyn FourParty + 'a>, NofError> {
        let mut sim = Simulator::new(&self.ds);
        sim.load(&self.ds, inst).map_err(|e| match e {
            crate::cellprobe::CellProbeError::Probe(p) => NofError::Probe(p),
            _ => NofError::NotSemiAdaptive { query: 0 },
        })?;
        // refuse construction unless every query run is semi-adaptive
        let budgets = self.ds.budgets();
        let mut log = ProbeLog::new();
        for i in 0..inst.k() {
            log.clear();
            sim.query(&self.ds, inst, i, &mut log)
                .map_err(|_| NofError::NotSemiAdaptive { query: i })?;
            let verdict = enforce_semi_adaptive(&log, &budgets);
            if !verdict.pass {
                return Err(NofError::NotSemiAdaptive { query: i });
            }
        }
        let a_bits = self.a_bits();
        let w = self.ds.word_size();
        let u_bits = serialize_delta(&sim.memory().delta_pairs(), a_bits, w);
        let max_rounds = 2 * budgets.t2 as usize + 3;
        Ok(Box::new(DsProtocol {
            ds: &self.ds,
            memory: sim.memory().clone(),
            u_bits,
            a_bits,
            w,
            max_rounds,
        }))
    }
}

/// One reduction run with its measured costs and the asserted bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct ReductionRun {
    pub transcript: Transcript,
    pub t1: u64,
    pub t2: u64,
    pub u_bits: usize,
    pub pi_bits: usize,
    /// `t_u * n * w` with the declared `t_u`.
    pub u_bound_bits: u64,
    /// `4 * t_q * w` with the measured per-run `t_q`. A zero-probe query
    /// leaves only the one-bit answer in the transcript; its bound is 1.
    pub pi_bound_bits: u64,
    pub within_bounds: bool,
}

impl<D: DataStructure> DsProtocolFamily<D> {
    /// Runs the induced protocol at `(inst, i)`, checks answer equality with
    /// the data structure / oracle, and evaluates the reduction bounds.
    pub fn run(&self, inst: &MultiphaseInstance, i: usize) -> Result<ReductionRun, NofError> {
        let proto = self.build(inst)?;
        let tx = run_protocol(proto.as_ref(), inst, i)?;
        drop(proto);
        let oracle = inst.answer(i);
        if tx.answer != oracle {
            return Err(NofError::AnswerMismatch { i, protocol: tx.answer, oracle });
        }
        // measured probe counts for this query
        let mut sim = Simulator::new(&self.ds);
        sim.load(&self.ds, inst).map_err(|_| NofError::NotSemiAdaptive { query: i })?;
        let mut log = ProbeLog::new();
        sim.query(&self.ds, inst, i, &mut log)
            .map_err(|_| NofError::NotSemiAdaptive { query: i })?;
        let (t1, t2) = (log.t1(), log.t2());
        let w = self.ds.word_size() as u64;
        let n = inst.n();
        let t_q = t1 + t2;
        let pi_bound_bits = if t_q == 0 { 1 } else { 4 * t_q * w };
        let u_bound_bits = self.declared_t_u(n) * n as u64 * w;
        let within_bounds =
            tx.pi_bits() as u64 <= pi_bound_bits && tx.u_bits() as u64 <= u_bound_bits;
        Ok(ReductionRun {
            t1,
            t2,
            u_bits: tx.u_bits(),
            pi_bits: tx.pi_bits(),
            u_bound_bits,
            pi_bound_bits,
            within_bounds,
            transcript: tx,
        })
    }
}

// ---------------------------------------------------------------------------
// Reduction: non-adaptive static structure -> 3-round protocol
// ---------------------------------------------------------------------------

/// 3-round protocol induced by a non-adaptive static structure: `U` is the
/// whole memory image (`s*w` bits), Alice names the probe plan of query `i`,
/// Bob replies with the probed contents plus the answer bit.
pub struct StaticProtocolFamily<S: StaticDataStructure> {
    sds: S,
}

/// Refuses adaptive structures, reporting the offending (query, probe).
pub fn static_ds_to_3round<S: StaticDataStructure>(sds: S) -> Result<StaticProtocolFamily<S>, NofError> {
    if let Err((query, probe)) = audit_non_adaptive(&sds, 24, 0x5747) {
        return Err(NofError::AdaptiveStatic { query, probe });
    }
    Ok(StaticProtocolFamily { sds })
}

/// One static-reduction run: payload accounting against `2*t*w`.
#[derive(Debug, Clone, PartialEq)]
pub struct StaticReductionRun {
    pub answer: bool,
    pub probes: u64,
    pub u_bits: usize,
    pub pi_bits: usize,
    pub bound_2tw: u64,
    /// Probe payloads always fit in `2*t*w`; the appended answer bit can
    /// exceed it by exactly one when the address width equals `w`.
    pub within_2tw: bool,
    pub within_2tw_plus_answer: bool,
}

impl<S: StaticDataStructure> StaticProtocolFamily<S> {
    pub fn sds(&self) -> &S {
        &self.sds
    }

    fn a_bits(&self) -> u32 {
        crate::bits::ceil_log2(self.sds.space() as usize).max(1)
    }

    /// Runs the 3-round simulation for database `x` and query `i`.
    pub fn run(&self, x: &BitVec, i: usize) -> Result<StaticReductionRun, NofError> {
        let image = self.sds.preprocess(x).map_err(NofError::Circuit)?;
        let plan = probe_plan(&self.sds, i)?;
        let w = self.sds.word_size();
        let a_bits = self.a_bits();
        // U: contents of all s cells, addresses implicit
        let u_bits = image.len() * w as usize;
        let mut contents = Vec::with_capacity(plan.len());
        for &addr in &plan {
            if addr >= self.sds.space() {
                return Err(NofError::Probe(ProbeError::OutOfRange { addr, space: self.sds.space() }));
            }
            contents.push(image[addr as usize]);
        }
        // Bob re-runs the evaluator over the communicated contents
        let mut at = 0usize;
        let mut probe = |addr: u64| -> Result<u64, ProbeError> {
            let expected = plan[at];
            if addr != expected {
                return Err(ProbeError::ReplayMismatch { expected, got: addr });
            }
            let word = contents[at];
            at += 1;
            Ok(word)
        };
        let answer = self.sds.query(i, &mut probe)?;
        let t = plan.len() as u64;
        let pi_bits = t as usize * a_bits as usize + t as usize * w as usize + 1;
        let bound_2tw = 2 * t * w as u64;
        Ok(StaticReductionRun {
            answer,
            probes: t,
            u_bits,
            pi_bits,
            bound_2tw,
            within_2tw: pi_bits as u64 <= bound_2tw,
            within_2tw_plus_answer: pi_bits as u64 <= bound_2tw + 1,
        })
    }
}

// ---------------------------------------------------------------------------
// 1.5-round protocols and the modified 4-party simulation
// ---------------------------------------------------------------------------

/// A 1.5-round protocol: Charlie advises Bob; Bob forwards an i-independent
/// part `U' ⊆ U` to Alice; Alice (holding all of `S` and `i`) replies once;
/// Bob answers.
pub trait OnePointFive {
    fn name(&self) -> &'static str;
    fn charlie(&self, sets: &[BitVec], t: &BitVec) -> BitString;
    /// The forwarded part; a function of `U` only.
    fn forward(&self, u: &BitString) -> BitString;
    fn alice_msg(&self, u_prime: &BitString, sets: &[BitVec], i: usize) -> BitString;
    fn bob_answer(&self, u: &BitString, t: &BitVec, i: usize, alice: &BitString) -> bool;
}

#[derive(Debug, Clone, PartialEq)]
pub struct OnePointFiveRun {
    pub u_bits: usize,
    pub u_prime_bits: usize,
    pub alice_bits: usize,
    pub answer: bool,
    /// `C`: the larger of the forwarded message and Alice's message.
    pub c_bits: usize,
}

pub fn run_one_point_five(proto: &dyn OnePointFive, inst: &MultiphaseInstance, i: usize) -> OnePointFiveRun {
    let u = proto.charlie(inst.sets(), inst.t());
    let u_prime = proto.forward(&u);
    let alice = proto.alice_msg(&u_prime, inst.sets(), i);
    let answer = proto.bob_answer(&u, inst.t(), i, &alice);
    OnePointFiveRun {
        u_bits: u.len(),
        u_prime_bits: u_prime.len(),
        alice_bits: alice.len(),
        answer,
        c_bits: u_prime.len().max(alice.len()),
    }
}

/// The modified-4-party simulation of a 1.5-round protocol: Charlie sends
/// `U'` to Megan, Megan broadcasts `(U', Alice's 1.5-round message)`, and
/// Bob decodes the answer with no further interaction. `|Π^M| <= 2C`.
#[derive(Clone)]
pub struct ModifiedFromOnePointFive<P: OnePointFive + Clone> {
    pub inner: P,
}

impl<P: OnePointFive + Clone> FourParty for ModifiedFromOnePointFive<P> {
    fn name(&self) -> &'static str {
        "modified-4party-simulation"
    }

    fn charlie(&self, sets: &[BitVec], t: &BitVec) -> Result<BitString, NofError> {
        Ok(self.inner.charlie(sets, t))
    }

    fn charlie_to_megan(&self, sets: &[BitVec], t: &BitVec) -> Result<Option<BitString>, NofError> {
        let u = self.inner.charlie(sets, t);
        Ok(Some(self.inner.forward(&u)))
    }

    fn megan(&self, sets: &[BitVec], i: usize, u_prime: Option<&BitString>) -> Result<BitString, NofError> {
        let up = u_prime.ok_or(NofError::EmptyAnswer)?;
        let mut out = up.clone();
        out.extend(&self.inner.alice_msg(up, sets, i));
        Ok(out)
    }

    fn alice(
        &self,
        _round: usize,
        _s_i: &BitVec,
        _i: usize,
        _pi_m: &BitString,
        _prefix: &[Message],
    ) -> Result<RoundOutcome, NofError> {
        Ok(RoundOutcome::Send(BitString::new()))
    }

    fn bob(
        &self,
        _round: usize,
        t: &BitVec,
        i: usize,
        u: &BitString,
        pi_m: &BitString,
        _prefix: &[Message],
    ) -> Result<RoundOutcome, NofError> {
        // Bob recomputes U' = forward(U) to split Megan's broadcast.
        let u_prime = self.inner.forward(u);
        let split = u_prime.len();
        let mut alice_part = BitString::new();
        for pos in split..pi_m.len() {
            alice_part.push(pi_m.get(pos));
        }
        let answer = self.inner.bob_answer(u, t, i, &alice_part);
        let mut bits = BitString::new();
        bits.push(answer);
        Ok(RoundOutcome::Answer(bits))
    }
}

// ---------------------------------------------------------------------------
// Restricted 3-party embedding
// ---------------------------------------------------------------------------

/// A restricted 3-party protocol: Alice's first message may read all of
/// `(S, i)`; later Alice messages read only `(S_i, i, transcript)`.
pub trait RestrictedThreeParty {
    fn name(&self) -> &'static str;
    fn charlie(&self, sets: &[BitVec], t: &BitVec) -> BitString;
    fn alice_first(&self, sets: &[BitVec], i: usize) -> BitString;
    fn alice_later(
        &self,
        round: usize,
        s_i: &BitVec,
        i: usize,
        first: &BitString,
        prefix: &[Message],
    ) -> RoundOutcome;
    fn bob(
        &self,
        round: usize,
        t: &BitVec,
        i: usize,
        u: &BitString,
        first: &BitString,
        prefix: &[Message],
    ) -> RoundOutcome;
}

/// The standard equivalence: Alice's first message becomes Megan's broadcast.
#[derive(Clone)]
pub struct AsFourParty<P: RestrictedThreeParty + Clone>(pub P);

impl<P: RestrictedThreeParty + Clone> FourParty for AsFourParty<P> {
    fn name(&self) -> &'static str {
        self.0.name()
    }

    fn charlie(&self, sets: &[BitVec], t: &BitVec) -> Result<BitString, NofError> {
        Ok(self.0.charlie(sets, t))
    }

    fn megan(&self, sets: &[BitVec], i: usize, _u_prime: Option<&BitString>) -> Result<BitString, NofError> {
        Ok(self.0.alice_first(sets, i))
    }

    fn alice(
        &self,
        round: usize,
        s_i: &BitVec,
        i: usize,
        pi_m: &BitString,
        prefix: &[Message],
    ) -> Result<RoundOutcome, NofError> {
        Ok(self.0.alice_later(round, s_i, i, pi_m, prefix))
    }

    fn bob(
        &self,
        round: usize,
        t: &BitVec,
        i: usize,
        u: &BitString,
        pi_m: &BitString,
        prefix: &[Message],
    ) -> Result<RoundOutcome, NofError> {
        Ok(self.0.bob(round, t, i, u, pi_m, prefix))
    }
}

// ---------------------------------------------------------------------------
// Toy protocols
// ---------------------------------------------------------------------------

fn intersect_bits(a: &BitString, offset: usize, t: &BitVec) -> bool {
    let mut hit = false;
    for j in 0..t.len() {
        if a.get(offset + j) && t.get(j) {
            hit = true;
        }
    }
    hit
}

fn answer_message(answer: bool) -> RoundOutcome {
    let mut bits = BitString::new();
    bits.push(answer);
    RoundOutcome::Answer(bits)
}

/// Megan broadcasts `S_i`; Bob answers directly. No advice.
#[derive(Clone)]
pub struct MeganSendsSi;

impl FourParty for MeganSendsSi {
    fn name(&self) -> &'static str {
        "megan-sends-si"
    }

    fn charlie(&self, _sets: &[BitVec], _t: &BitVec) -> Result<BitString, NofError> {
        Ok(BitString::new())
    }

    fn megan(&self, sets: &[BitVec], i: usize, _u_prime: Option<&BitString>) -> Result<BitString, NofError> {
        let mut out = BitString::new();
        out.push_bitvec(&sets[i]);
        Ok(out)
    }

    fn alice(&self, _round: usize, _s_i: &BitVec, _i: usize, _pi_m: &BitString, _prefix: &[Message]) -> Result<RoundOutcome, NofError> {
        Ok(RoundOutcome::Send(BitString::new()))
    }

    fn bob(&self, _round: usize, t: &BitVec, _i: usize, _u: &BitString, pi_m: &BitString, _prefix: &[Message]) -> Result<RoundOutcome, NofError> {
        Ok(answer_message(!intersect_bits(pi_m, 0, t)))
    }
}

/// Alice sends `S_i`; Bob answers. No advice, empty broadcast.
#[derive(Clone)]
pub struct AliceSendsSi;

impl FourParty for AliceSendsSi {
    fn name(&self) -> &'static str {
        "alice-sends-si"
    }

    fn charlie(&self, _sets: &[BitVec], _t: &BitVec) -> Result<BitString, NofError> {
        Ok(BitString::new())
    }

    fn megan(&self, _sets: &[BitVec], _i: usize, _u_prime: Option<&BitString>) -> Result<BitString, NofError> {
        Ok(BitString::new())
    }

    fn alice(&self, _round: usize, s_i: &BitVec, _i: usize, _pi_m: &BitString, _prefix: &[Message]) -> Result<RoundOutcome, NofError> {
        let mut out = BitString::new();
        out.push_bitvec(s_i);
        Ok(RoundOutcome::Send(out))
    }

    fn bob(&self, _round: usize, t: &BitVec, _i: usize, _u: &BitString, _pi_m: &BitString, prefix: &[Message]) -> Result<RoundOutcome, NofError> {
        Ok(answer_message(!intersect_bits(&prefix[0].bits, 0, t)))
    }
}

/// Adversarial advice: Charlie sends the whole of `T` to Bob, maximally
/// correlating the advice with Bob's input; otherwise as [`AliceSendsSi`].
#[derive(Clone)]
pub struct AdversarialFullT;

impl FourParty for AdversarialFullT {
    fn name(&self) -> &'static str {
        "adversarial-u-equals-t"
    }

    fn charlie(&self, _sets: &[BitVec], t: &BitVec) -> Result<BitString, NofError> {
        let mut out = BitString::new();
        out.push_bitvec(t);
        Ok(out)
    }

    fn megan(&self, _sets: &[BitVec], _i: usize, _u_prime: Option<&BitString>) -> Result<BitString, NofError> {
        Ok(BitString::new())
    }

    fn alice(&self, _round: usize, s_i: &BitVec, _i: usize, _pi_m: &BitString, _prefix: &[Message]) -> Result<RoundOutcome, NofError> {
        let mut out = BitString::new();
        out.push_bitvec(s_i);
        Ok(RoundOutcome::Send(out))
    }

    fn bob(&self, _round: usize, t: &BitVec, _i: usize, _u: &BitString, _pi_m: &BitString, prefix: &[Message]) -> Result<RoundOutcome, NofError> {
        Ok(answer_message(!intersect_bits(&prefix[0].bits, 0, t)))
    }
}

/// `U` is the first bit of `T`; Bob forwards it ahead of his answer bit.
#[derive(Clone)]
pub struct UForwardsFirstBit;

impl FourParty for UForwardsFirstBit {
    fn name(&self) -> &'static str {
        "u-first-bit-forwarded"
    }

    fn charlie(&self, _sets: &[BitVec], t: &BitVec) -> Result<BitString, NofError> {
        let mut out = BitString::new();
        out.push(t.get(0));
        Ok(out)
    }

    fn megan(&self, _sets: &[BitVec], _i: usize, _u_prime: Option<&BitString>) -> Result<BitString, NofError> {
        Ok(BitString::new())
    }

    fn alice(&self, _round: usize, s_i: &BitVec, _i: usize, _pi_m: &BitString, _prefix: &[Message]) -> Result<RoundOutcome, NofError> {
        let mut out = BitString::new();
        out.push_bitvec(s_i);
        Ok(RoundOutcome::Send(out))
    }

    fn bob(&self, _round: usize, t: &BitVec, _i: usize, u: &BitString, _pi_m: &BitString, prefix: &[Message]) -> Result<RoundOutcome, NofError> {
        let mut bits = BitString::new();
        bits.push(u.get(0));
        bits.push(!intersect_bits(&prefix[0].bits, 0, t));
        Ok(RoundOutcome::Answer(bits))
    }
}

/// Zero-communication negative control: Bob answers the constant 1. Only
/// correct when `T` is empty.
#[derive(Clone)]
pub struct AlwaysDisjoint;

impl FourParty for AlwaysDisjoint {
    fn name(&self) -> &'static str {
        "always-answer-disjoint"
    }

    fn charlie(&self, _sets: &[BitVec], _t: &BitVec) -> Result<BitString, NofError> {
        Ok(BitString::new())
    }

    fn megan(&self, _sets: &[BitVec], _i: usize, _u_prime: Option<&BitString>) -> Result<BitString, NofError> {
        Ok(BitString::new())
    }

    fn alice(&self, _round: usize, _s_i: &BitVec, _i: usize, _pi_m: &BitString, _prefix: &[Message]) -> Result<RoundOutcome, NofError> {
        Ok(RoundOutcome::Send(BitString::new()))
    }

    fn bob(&self, _round: usize, _t: &BitVec, _i: usize, _u: &BitString, _pi_m: &BitString, _prefix: &[Message]) -> Result<RoundOutcome, NofError> {
        Ok(answer_message(true))
    }
}

// ---------------------------------------------------------------------------
// Exact transcript-distribution extraction
// ---------------------------------------------------------------------------

/// Exhaustive enumeration bound: at most this many input bits `n(k+1)`.
pub const MAX_ENUMERATION_BITS: usize = 20;

#[derive(Debug, Clone, Copy)]
pub struct EnumerationConfig {
    pub n: usize,
    pub k: usize,
    pub p: usize,
    /// Bernoulli weight per input bit (the hard distribution's γ by default).
    pub gamma: f64,
    /// Fix the tuple position `ℓ` (0-based) or average over it.
    pub ell: Option<usize>,
}

impl EnumerationConfig {
    pub fn hard(n: usize, k: usize, p: usize) -> Self {
        EnumerationConfig { n, k, p, gamma: crate::instance::hard_gamma(n), ell: None }
    }

    pub fn with_gamma(n: usize, k: usize, p: usize, gamma: f64) -> Self {
        EnumerationConfig { n, k, p, gamma, ell: None }
    }

    fn input_bits(&self) -> usize {
        self.n * (self.k + 1)
    }

    fn check(&self) -> Result<(), NofError> {
        let bits = self.input_bits();
        if bits > MAX_ENUMERATION_BITS {
            return Err(NofError::EnumerationTooLarge { bits });
        }
        if self.p == 0 || self.p > self.k {
            return Err(NofError::QueryOutOfRange { i: self.p, k: self.k });
        }
        if let Some(ell) = self.ell {
            if ell >= self.p {
                return Err(NofError::QueryOutOfRange { i: ell, k: self.p });
            }
        }
        Ok(())
    }
}

#[derive(Default)]
struct Dict {
    map: BTreeMap<Vec<u64>, usize>,
}

impl Dict {
    fn intern(&mut self, key: Vec<u64>) -> usize {
        let next = self.map.len();
        *self.map.entry(key).or_insert(next)
    }

    fn len(&self) -> usize {
        self.map.len()
    }
}

pub(crate) fn encode_bits(key: &mut Vec<u64>, bits: &BitString) {
    key.push(bits.len() as u64);
    let mut acc = 0u64;
    let mut filled = 0;
    for b in bits.iter() {
        acc |= (b as u64) << filled;
        filled += 1;
        if filled == 64 {
            key.push(acc);
            acc = 0;
            filled = 0;
        }
    }
    if filled > 0 {
        key.push(acc);
    }
}

pub(crate) fn encode_transcript(key: &mut Vec<u64>, tx: &Transcript) {
    encode_bits(key, &tx.megan);
    key.push(tx.rounds.len() as u64);
    for m in &tx.rounds {
        encode_bits(key, &m.bits);
    }
    key.push(tx.answer as u64);
}

/// Exact joint distribution over the embedding variables, with dictionary
/// coding for the transcript-valued ones.
pub struct ProtocolDistribution {
    /// Joint over `(S_sel, T, Z, U)`.
    pub table: JointTable,
    pub z_values: usize,
    pub u_values: usize,
    /// `C`: max `|Π_i|` in bits over all inputs and all `i ∈ [k]`.
    pub c_bits: usize,
    pub u_bits_max: usize,
    /// Protocol answer equals `DISJ` on every (input, index).
    pub zero_error: bool,
}

/// Sparse masses for every table the bound verification needs, accumulated
/// in a single enumeration pass.
struct Accumulated {
    c_bits: usize,
    u_bits_max: usize,
    zero_error: bool,
    z_dict: Dict,
    u_dict: Dict,
    w_dict: Dict,
    a_dict: Dict,
    b_dict: Dict,
    g_dict: Dict,
    /// (s_sel, t, z, u) -> mass
    main: BTreeMap<(u64, u64, usize, usize), f64>,
    /// (s_sel, w, t) -> mass
    path: BTreeMap<(u64, usize, u64), f64>,
    /// (a, b, w) -> mass for the chain-rule intermediate
    chain: BTreeMap<(usize, usize, usize), f64>,
    /// (t, g) -> mass for Megan's T-independence
    t_ind: BTreeMap<(u64, usize), f64>,
    /// exact-rational numerators when γ = 1/2
    t_ind_exact: Option<BTreeMap<(u64, usize), u128>>,
    round_elim_ok: bool,
}

fn enumerate_family(family: &dyn ProtocolFamily, cfg: &EnumerationConfig) -> Result<Accumulated, NofError> {
    cfg.check()?;
    let n = cfg.n;
    let k = cfg.k;
    let total_bits = cfg.input_bits();
    let tuples = all_ordered_tuples(k, cfg.p);
    let ells: Vec<usize> = match cfg.ell {
        Some(e) => vec![e],
        None => (0..cfg.p).collect(),
    };
    let sel_weight = 1.0 / (tuples.len() as f64 * ells.len() as f64);
    let exact_half = cfg.gamma == 0.5;

    // Bernoulli weight by popcount
    let mut pow_g = vec![1.0f64; total_bits + 1];
    let mut pow_1mg = vec![1.0f64; total_bits + 1];
    for e in 1..=total_bits {
        pow_g[e] = pow_g[e - 1] * cfg.gamma;
        pow_1mg[e] = pow_1mg[e - 1] * (1.0 - cfg.gamma);
    }

    let mut acc = Accumulated {
        c_bits: 0,
        u_bits_max: 0,
        zero_error: true,
        z_dict: Dict::default(),
        u_dict: Dict::default(),
        w_dict: Dict::default(),
        a_dict: Dict::default(),
        b_dict: Dict::default(),
        g_dict: Dict::default(),
        main: BTreeMap::new(),
        path: BTreeMap::new(),
        chain: BTreeMap::new(),
        t_ind: BTreeMap::new(),
        t_ind_exact: if exact_half { Some(BTreeMap::new()) } else { None },
        round_elim_ok: true,
    };

    // determinism witnesses for the round-elimination hypotheses
    let mut alice_det: BTreeMap<Vec<u64>, BitString> = BTreeMap::new();
    let mut bob_det: BTreeMap<Vec<u64>, BitString> = BTreeMap::new();

    let field_mask = |assignment: u64, field: usize| -> u64 {
        assignment >> (field * n) & ((1u64 << n) - 1)
    };

    let mut inst = MultiphaseInstance::from_masks(n, &vec![0u64; k], 0, cfg.gamma);
    let mut set_masks = vec![0u64; k];

    for assignment in 0..1u64 << total_bits {
        for (f, m) in set_masks.iter_mut().enumerate() {
            *m = field_mask(assignment, f);
        }
        let t_mask = field_mask(assignment, k);
        inst.overwrite_masks(&set_masks, t_mask);
        let weight = {
            let ones = assignment.count_ones() as usize;
            pow_g[ones] * pow_1mg[total_bits - ones]
        };

        let proto = family.build(&inst)?;
        let mut txs: Vec<Transcript> = Vec::with_capacity(k);
        for i in 0..k {
            let tx = run_protocol(proto.as_ref(), &inst, i)?;
            acc.c_bits = acc.c_bits.max(tx.pi_bits());
            acc.u_bits_max = acc.u_bits_max.max(tx.u_bits());
            if tx.answer != inst.answer(i) {
                acc.zero_error = false;
            }
            // round-elimination hypotheses: Alice's rounds are determined by
            // (S_i, Π^M, prefix); Bob's by (U, T, Π^M, prefix)
            for (r, m) in tx.rounds.iter().enumerate() {
                let mut key = vec![r as u64];
                let det = match m.speaker {
                    Speaker::Alice => {
                        key.push(set_masks[i]);
                        &mut alice_det
                    }
                    Speaker::Bob => {
                        encode_bits(&mut key, &tx.u);
                        key.push(t_mask);
                        &mut bob_det
                    }
                };
                encode_bits(&mut key, &tx.megan);
                for pm in &tx.rounds[..r] {
                    encode_bits(&mut key, &pm.bits);
                }
                if let Some(prev) = det.get(&key) {
                    if prev != &m.bits {
                        acc.round_elim_ok = false;
                    }
                } else {
                    det.insert(key, m.bits.clone());
                }
            }
            txs.push(tx);
        }

        let mut u_key = Vec::new();
        encode_bits(&mut u_key, &txs[0].u);
        let u_idx = acc.u_dict.intern(u_key);

        for tuple in &tuples {
            // Megan's broadcasts across the whole tuple (T-independence)
            let mut g_key = vec![tuple.len() as u64];
            for &idx in tuple {
                g_key.push(idx as u64);
                g_key.push(set_masks[idx]);
                encode_bits(&mut g_key, &txs[idx].megan);
            }
            let g_idx = acc.g_dict.intern(g_key);
            let gw = weight / tuples.len() as f64;
            *acc.t_ind.entry((t_mask, g_idx)).or_insert(0.0) += gw;
            if let Some(exact) = acc.t_ind_exact.as_mut() {
                *exact.entry((t_mask, g_idx)).or_insert(0) += 1;
            }

            for &ell in &ells {
                let chosen = tuple[ell];
                let s_sel = set_masks[chosen];
                let ev_weight = weight * sel_weight;

                // W = (S_{<ℓ}, Π^M_{<ℓ}, P, ℓ)
                let mut w_key = vec![ell as u64, tuple.len() as u64];
                w_key.extend(tuple.iter().map(|&x| x as u64));
                for &idx in &tuple[..ell] {
                    w_key.push(set_masks[idx]);
                    encode_bits(&mut w_key, &txs[idx].megan);
                }
                let w_idx = acc.w_dict.intern(w_key.clone());

                // Z = (Π_{I_ℓ}, S_{<ℓ}, Π^M_{<ℓ}, P, ℓ)
                let mut z_key = w_key;
                encode_transcript(&mut z_key, &txs[chosen]);
                let z_idx = acc.z_dict.intern(z_key);

                // A = (S_{I_ℓ}, Π^M_{I_ℓ}); B = (U, T)
                let mut a_key = vec![s_sel];
                encode_bits(&mut a_key, &txs[chosen].megan);
                let a_idx = acc.a_dict.intern(a_key);
                let mut b_key = vec![t_mask];
                encode_bits(&mut b_key, &txs[chosen].u);
                let b_idx = acc.b_dict.intern(b_key);

                *acc.main.entry((s_sel, t_mask, z_idx, u_idx)).or_insert(0.0) += ev_weight;
                *acc.path.entry((s_sel, w_idx, t_mask)).or_insert(0.0) += ev_weight;
                *acc.chain.entry((a_idx, b_idx, w_idx)).or_insert(0.0) += ev_weight;
            }
        }
    }
    Ok(acc)
}

fn normalize(probs: &mut [f64]) {
    let total: f64 = probs.iter().sum();
    if total > 0.0 {
        for p in probs.iter_mut() {
            *p /= total;
        }
    }
}

fn dense_table(vars: Vec<(String, usize)>, fill: impl FnOnce(&mut [f64])) -> Result<JointTable, NofError> {
    let entries: usize = vars.iter().map(|(_, s)| *s).product();
    if entries > crate::info::MAX_ENTRIES {
        return Err(NofError::Info(InfoError::TooLarge { entries }));
    }
    let mut probs = vec![0.0f64; entries];
    fill(&mut probs);
    normalize(&mut probs);
    JointTable::new(vars, probs).map_err(NofError::Info)
}

/// Exact joint distribution over `(S_{I_ℓ}, T, Z, U)` under the configured
/// input distribution, by full enumeration.
pub fn protocol_joint_distribution(
    family: &dyn ProtocolFamily,
    cfg: &EnumerationConfig,
) -> Result<ProtocolDistribution, NofError> {
    let acc = enumerate_family(family, cfg)?;
    let s_sz = 1usize << cfg.n;
    let (z_len, u_len) = (acc.z_dict.len(), acc.u_dict.len());
    let table = dense_table(
        vec![
            ("S".to_string(), s_sz),
            ("T".to_string(), s_sz),
            ("Z".to_string(), z_len),
            ("U".to_string(), u_len),
        ],
        |probs| {
            for (&(s, t, z, u), &m) in &acc.main {
                probs[((s as usize * s_sz + t as usize) * z_len + z) * u_len + u] += m;
            }
        },
    )?;
    Ok(ProtocolDistribution {
        table,
        z_values: z_len,
        u_values: u_len,
        c_bits: acc.c_bits,
        u_bits_max: acc.u_bits_max,
        zero_error: acc.zero_error,
    })
}

/// The exactly-computed quantities of the information-cost bounds, each next
/// to the bound it is asserted against (asymptotic constants = 1).
#[derive(Debug, Clone, PartialEq)]
pub struct GoodqReport {
    pub protocol: String,
    pub c_bits: usize,
    pub u_bits_max: usize,
    pub t_bits: usize,
    /// `I(S_{I_ℓ} ; S_{<ℓ} Π^M_{<ℓ} T, P, ℓ)` vs `p·C/(k-p)`.
    pub path_info: f64,
    /// The same quantity with `T` left out (both displays appear in the
    /// source statements; both are reported).
    pub path_info_no_t: f64,
    pub path_bound: f64,
    /// `I(Z ; T)` vs `C`.
    pub z_t_info: f64,
    /// `I(Z T ; S_{I_ℓ})` vs `C + p·C/(k-p)`.
    pub zt_s_info: f64,
    /// `I(S_{I_ℓ} ; T | Z)` vs `(|U| + |T|)/p`.
    pub correlation: f64,
    pub correlation_bound: f64,
    /// `E_ℓ[I(S_ℓ Π^M_ℓ ; U T | S_{<ℓ} Π^M_{<ℓ}, P, ℓ)]`, the chain-rule
    /// intermediate behind the correlation bound.
    pub chain_intermediate: f64,
    /// `I(T ; S_P Π^M_P, P)`; zero for audited protocols.
    pub t_independence: f64,
    /// Exact-rational verdict of that independence when γ = 1/2.
    pub t_independence_exact: Option<bool>,
    /// Determinism of every round given its speaker's declared view.
    pub round_elim_ok: bool,
    pub zero_error: bool,
    pub pass: bool,
}

const BOUND_TOL: f64 = 1e-9;

/// Runs the visibility audit, enumerates the protocol exactly, and checks
/// the four information bounds plus the structural zero-information and
/// determinism facts.
pub fn verify_goodq_bounds(
    family: &dyn ProtocolFamily,
    cfg: &EnumerationConfig,
    audit_trials: u32,
) -> Result<GoodqReport, NofError> {
    cfg.check()?;
    // restricted-model audit precondition
    let audit_inst =
        MultiphaseInstance::sample_with_gamma(cfg.n, cfg.k, 0.5, 0xA0D1).expect("valid toy instance");
    let report = visibility_audit(family, &audit_inst, 0, audit_trials, 0xFEED)?;
    if !report.clean() {
        let c = report.first_failure().expect("violation recorded");
        return Err(NofError::AuditFailed { constraint: c.constraint.to_string() });
    }

    let acc = enumerate_family(family, cfg)?;
    let s_sz = 1usize << cfg.n;
    let (z_len, w_len) = (acc.z_dict.len(), acc.w_dict.len());
    let (a_len, b_len, g_len) = (acc.a_dict.len(), acc.b_dict.len(), acc.g_dict.len());

    let main = dense_table(
        vec![("S".to_string(), s_sz), ("T".to_string(), s_sz), ("Z".to_string(), z_len)],
        |probs| {
            for (&(s, t, z, _u), &m) in &acc.main {
                probs[(s as usize * s_sz + t as usize) * z_len + z] += m;
            }
        },
    )?;
    let z_t_info = main.mutual_information(&["Z"], &["T"], &[])?;
    let zt_s_info = main.mutual_information(&["Z", "T"], &["S"], &[])?;
    let correlation = main.mutual_information(&["S"], &["T"], &["Z"])?;

    let path = dense_table(
        vec![("S".to_string(), s_sz), ("W".to_string(), w_len), ("T".to_string(), s_sz)],
        |probs| {
            for (&(s, w, t), &m) in &acc.path {
                probs[(s as usize * w_len + w) * s_sz + t as usize] += m;
            }
        },
    )?;
    let path_info = path.mutual_information(&["S"], &["W", "T"], &[])?;
    let path_info_no_t = path.mutual_information(&["S"], &["W"], &[])?;

    let chain = dense_table(
        vec![("A".to_string(), a_len), ("B".to_string(), b_len), ("W".to_string(), w_len)],
        |probs| {
            for (&(a, b, w), &m) in &acc.chain {
                probs[(a * b_len + b) * w_len + w] += m;
            }
        },
    )?;
    let chain_intermediate = chain.mutual_information(&["A"], &["B"], &["W"])?;

    let t_ind = dense_table(
        vec![("T".to_string(), s_sz), ("G".to_string(), g_len)],
        |probs| {
            for (&(t, g), &m) in &acc.t_ind {
                probs[t as usize * g_len + g] += m;
            }
        },
    )?;
    let t_independence = t_ind.mutual_information(&["T"], &["G"], &[])?;
    let t_independence_exact = match &acc.t_ind_exact {
        Some(exact) => {
            let mut nums = vec![0u128; s_sz * g_len];
            let mut den = 0u128;
            for (&(t, g), &c) in exact {
                nums[t as usize * g_len + g] += c;
                den += c;
            }
            let rt = RationalTable::new(
                vec![("T".to_string(), s_sz), ("G".to_string(), g_len)],
                nums,
                den,
            )?;
            Some(rt.is_conditionally_independent(&["T"], &["G"], &[])?)
        }
        None => None,
    };

    let c = acc.c_bits as f64;
    let path_bound = cfg.p as f64 * c / (cfg.k - cfg.p) as f64;
    let correlation_bound = (acc.u_bits_max + cfg.n) as f64 / cfg.p as f64;
    let pass = path_info <= path_bound + BOUND_TOL
        && z_t_info <= c + BOUND_TOL
        && zt_s_info <= c + path_bound + BOUND_TOL
        && correlation <= correlation_bound + BOUND_TOL
        && t_independence.abs() <= BOUND_TOL
        && t_independence_exact.unwrap_or(true)
        && acc.round_elim_ok
        && acc.zero_error;

    Ok(GoodqReport {
        protocol: family.name().to_string(),
        c_bits: acc.c_bits,
        u_bits_max: acc.u_bits_max,
        t_bits: cfg.n,
        path_info,
        path_info_no_t,
        path_bound,
        z_t_info,
        zt_s_info,
        correlation,
        correlation_bound,
        chain_intermediate,
        t_independence,
        t_independence_exact,
        round_elim_ok: acc.round_elim_ok,
        zero_error: acc.zero_error,
        pass,
    })
}

// ---------------------------------------------------------------------------
// Planted-bug protocol families for the audit tests
// ---------------------------------------------------------------------------

/// Alice's second round illegally reads `S_{i+1}` (captured at build time).
pub struct CheatingAliceFamily;

struct CheatingAlice {
    sets: Vec<BitVec>,
}

impl ProtocolFamily for CheatingAliceFamily {
    fn name(&self) -> &'static str {
        "cheating-alice"
    }

    fn build<'a>(&'a self, inst: &MultiphaseInstance) -> Result<Box<dyn FourParty + 'a>, NofError> {
        Ok(Box::new(CheatingAlice { sets: inst.sets().to_vec() }))
    }
}

impl FourParty for CheatingAlice {
    fn name(&self) -> &'static str {
        "cheating-alice"
    }

    fn charlie(&self, _sets: &[BitVec], _t: &BitVec) -> Result<BitString, NofError> {
        Ok(BitString::new())
    }

    fn megan(&self, _sets: &[BitVec], _i: usize, _u_prime: Option<&BitString>) -> Result<BitString, NofError> {
        Ok(BitString::new())
    }

    fn alice(&self, round: usize, s_i: &BitVec, i: usize, _pi_m: &BitString, _prefix: &[Message]) -> Result<RoundOutcome, NofError> {
        let mut out = BitString::new();
        if round == 2 {
            // the planted bug: a later Alice round reads a neighbor set
            let neighbor = &self.sets[(i + 1) % self.sets.len()];
            out.push(neighbor.get(0));
            return Ok(RoundOutcome::Send(out));
        }
        out.push_bitvec(s_i);
        Ok(RoundOutcome::Send(out))
    }

    fn bob(&self, round: usize, t: &BitVec, _i: usize, _u: &BitString, _pi_m: &BitString, prefix: &[Message]) -> Result<RoundOutcome, NofError> {
        if round == 1 {
            return Ok(RoundOutcome::Send(BitString::new()));
        }
        Ok(answer_message(!intersect_bits(&prefix[0].bits, 0, t)))
    }
}

/// Megan's broadcast illegally includes a bit of `T` (captured at build
/// time).
pub struct CheatingMeganFamily;

struct CheatingMegan {
    t_first: bool,
}

impl ProtocolFamily for CheatingMeganFamily {
    fn name(&self) -> &'static str {
        "cheating-megan"
    }

    fn build<'a>(&'a self, inst: &MultiphaseInstance) -> Result<Box<dyn FourParty + 'a>, NofError> {
        Ok(Box::new(CheatingMegan { t_first: inst.t().get(0) }))
    }
}

impl FourParty for CheatingMegan {
    fn name(&self) -> &'static str {
        "cheating-megan"
    }

    fn charlie(&self, _sets: &[BitVec], _t: &BitVec) -> Result<BitString, NofError> {
        Ok(BitString::new())
    }

    fn megan(&self, sets: &[BitVec], i: usize, _u_prime: Option<&BitString>) -> Result<BitString, NofError> {
        let mut out = BitString::new();
        out.push(self.t_first); // the planted bug
        out.push_bitvec(&sets[i]);
        Ok(out)
    }

    fn alice(&self, _round: usize, _s_i: &BitVec, _i: usize, _pi_m: &BitString, _prefix: &[Message]) -> Result<RoundOutcome, NofError> {
        Ok(RoundOutcome::Send(BitString::new()))
    }

    fn bob(&self, _round: usize, t: &BitVec, _i: usize, _u: &BitString, pi_m: &BitString, _prefix: &[Message]) -> Result<RoundOutcome, NofError> {
        Ok(answer_message(!intersect_bits(pi_m, 1, t)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cellprobe::{PrecomputeAnswers, SqrtScheme, StoreT, ExplicitTAdvice};
    use crate::circuits::{AnswerTable, StaticDisjProblem};
    use crate::instance::disj;
    use crate::rng::CounterRng;

    fn toy_instance(n: usize, k: usize, seed: u64) -> MultiphaseInstance {
        MultiphaseInstance::sample_with_gamma(n, k, 0.4, seed).unwrap()
    }

    #[test]
    fn megan_broadcast_protocol_is_correct() {
        for seed in 0..50 {
            let inst = toy_instance(6, 3, seed);
            for i in 0..3 {
                let tx = run_protocol(&MeganSendsSi, &inst, i).unwrap();
                assert_eq!(tx.answer, inst.answer(i));
                assert_eq!(tx.megan.len(), 6);
                assert_eq!(tx.pi_bits(), 6 + 1);
            }
        }
    }

    #[test]
    fn zero_communication_protocol_on_empty_t() {
        let inst = MultiphaseInstance::from_masks(5, &[0b10101, 0b00111], 0, 0.3);
        for i in 0..2 {
            let tx = run_protocol(&AlwaysDisjoint, &inst, i).unwrap();
            assert!(tx.answer);
            assert_eq!(tx.answer, inst.answer(i));
            assert_eq!(tx.pi_bits(), 1);
        }
    }

    #[test]
    fn transcripts_are_deterministic() {
        let inst = toy_instance(5, 3, 7);
        let a = run_protocol(&UForwardsFirstBit, &inst, 2).unwrap();
        let b = run_protocol(&UForwardsFirstBit, &inst, 2).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn budget_overflow_is_reported() {
        #[derive(Clone)]
        struct Chatty;
        impl FourParty for Chatty {
            fn name(&self) -> &'static str {
                "chatty"
            }
            fn limits(&self) -> ProtocolLimits {
                ProtocolLimits { pi_budget_bits: 4, ..ProtocolLimits::generous() }
            }
            fn charlie(&self, _: &[BitVec], _: &BitVec) -> Result<BitString, NofError> {
                Ok(BitString::new())
            }
            fn megan(&self, _: &[BitVec], _: usize, _: Option<&BitString>) -> Result<BitString, NofError> {
                Ok(BitString::new())
            }
            fn alice(&self, _: usize, s_i: &BitVec, _: usize, _: &BitString, _: &[Message]) -> Result<RoundOutcome, NofError> {
                let mut out = BitString::new();
                out.push_bitvec(s_i);
                Ok(RoundOutcome::Send(out))
            }
            fn bob(&self, _: usize, _: &BitVec, _: usize, _: &BitString, _: &BitString, _: &[Message]) -> Result<RoundOutcome, NofError> {
                Ok(answer_message(true))
            }
        }
        let inst = toy_instance(8, 2, 1);
        assert!(matches!(
            run_protocol(&Chatty, &inst, 0),
            Err(NofError::CostOverflow { .. })
        ));
    }

    #[test]
    fn audit_passes_honest_protocols() {
        let inst = toy_instance(5, 3, 3);
        for family in [
            &Stateless(MeganSendsSi) as &dyn ProtocolFamily,
            &Stateless(AliceSendsSi),
            &Stateless(AdversarialFullT),
            &Stateless(UForwardsFirstBit),
        ] {
            let report = visibility_audit(family, &inst, 1, 50, 99).unwrap();
            assert!(report.clean(), "{}: {:?}", family.name(), report.first_failure());
        }
    }

    #[test]
    fn audit_flags_planted_alice_bug() {
        let inst = toy_instance(5, 3, 3);
        let report = visibility_audit(&CheatingAliceFamily, &inst, 1, 80, 5).unwrap();
        assert!(!report.clean());
        let bad = report.first_failure().unwrap();
        assert_eq!(bad.constraint, AuditConstraint::AliceRound(2), "{report:?}");
    }

    #[test]
    fn audit_flags_planted_megan_bug() {
        let inst = toy_instance(5, 3, 3);
        let report = visibility_audit(&CheatingMeganFamily, &inst, 1, 80, 5).unwrap();
        assert!(!report.clean());
        let bad = report.first_failure().unwrap();
        assert_eq!(bad.constraint, AuditConstraint::MeganIgnoresT);
    }

    #[test]
    fn ds_protocol_matches_data_structure_exhaustively() {
        // all instances at n = 3, k = 2
        let n = 3;
        let k = 2;
        for family in [
            ds_to_4party(StoreT::new(n, k)),
        ] {
            let mut inst = MultiphaseInstance::from_masks(n, &[0, 0], 0, 0.5);
            for s0 in 0..1u64 << n {
                for s1 in 0..1u64 << n {
                    for t in 0..1u64 << n {
                        inst.overwrite_masks(&[s0, s1], t);
                        for i in 0..k {
                            let run = family.run(&inst, i).unwrap();
                            assert_eq!(run.transcript.answer, inst.answer(i));
                            assert!(run.within_bounds, "{run:?}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn ds_protocol_bounds_for_all_schemes() {
        let n = 16;
        let k = 8;
        for seed in 0..40 {
            let inst = toy_instance(n, k, seed);
            let pre = ds_to_4party(PrecomputeAnswers::new(n, k));
            let st = ds_to_4party(StoreT::new(n, k));
            let sq = ds_to_4party(SqrtScheme::new(n, k, ExplicitTAdvice::direct()));
            for i in 0..k {
                for run in [pre.run(&inst, i).unwrap(), st.run(&inst, i).unwrap(), sq.run(&inst, i).unwrap()] {
                    assert!(run.within_bounds, "seed {seed} i {i}: {run:?}");
                    assert_eq!(run.transcript.answer, inst.answer(i));
                }
            }
        }
    }

    /// Thousand-run reduction check for the sqrt scheme at n = 2^12: the
    /// transcript stays within 4*t_q*w bits with the measured t_q.
    #[test]
    fn sqrt_reduction_bound_at_larger_n() {
        let n = 1 << 12;
        let k = 8;
        let family = ds_to_4party(SqrtScheme::new(n, k, ExplicitTAdvice::direct()));
        let mut max_pi = 0;
        for seed in 0..125u64 {
            let inst = MultiphaseInstance::sample_hard(n, k, seed).unwrap();
            for i in 0..k {
                let run = family.run(&inst, i).unwrap();
                assert!(run.within_bounds, "seed {seed} i {i}: {:?}", run.pi_bits);
                max_pi = max_pi.max(run.pi_bits);
            }
        }
        assert!(max_pi > 0);
    }

    #[test]
    fn precompute_protocol_fits_four_words() {
        // |Π_i| <= 4·t_q·w with t_q = 1 for the answer-table scheme
        let n = 16;
        let k = 8;
        let family = ds_to_4party(PrecomputeAnswers::new(n, k));
        let inst = toy_instance(n, k, 11);
        let w = family.data_structure().word_size() as usize;
        for i in 0..k {
            let run = family.run(&inst, i).unwrap();
            assert_eq!(run.t1 + run.t2, 1);
            assert!(run.pi_bits <= 4 * w, "pi = {}, 4w = {}", run.pi_bits, 4 * w);
        }
    }

    #[test]
    fn ds_protocol_audit_is_clean() {
        let inst = toy_instance(6, 3, 21);
        let family = ds_to_4party(StoreT::new(6, 3));
        let report = visibility_audit(&family, &inst, 1, 60, 13).unwrap();
        assert!(report.clean(), "{:?}", report.first_failure());
        let family = ds_to_4party(SqrtScheme::new(6, 3, ExplicitTAdvice::direct()));
        let report = visibility_audit(&family, &inst, 2, 60, 13).unwrap();
        assert!(report.clean(), "{:?}", report.first_failure());
    }

    #[test]
    fn static_reduction_answer_table() {
        let mut rng = CounterRng::new(17);
        let rows = crate::circuits::random_matrix(8, 6, 0.3, &mut rng);
        let prob = StaticDisjProblem::new(rows.clone());
        let family = static_ds_to_3round(prob.answer_table(4)).unwrap();
        for mask in 0..1u64 << 6 {
            let x = BitVec::from_mask(6, mask);
            for i in 0..8 {
                let run = family.run(&x, i).unwrap();
                assert_eq!(run.answer, disj(&rows[i], &x).unwrap());
                assert!(run.within_2tw, "{run:?}");
                assert_eq!(run.u_bits, run.u_bits); // U = s*w bits
            }
        }
    }

    #[test]
    fn static_reduction_translated_circuit() {
        let mut rng = CounterRng::new(3);
        let rows = crate::circuits::random_matrix(6, 20, 0.2, &mut rng);
        let prob = StaticDisjProblem::new(rows.clone());
        // n = 20 is not a power of two, so the answer bit fits under 2tw
        let family = static_ds_to_3round(prob.translated(6).unwrap()).unwrap();
        for trial in 0..40 {
            let x = BitVec::from_mask(20, CounterRng::new(trial).next_u64());
            for i in 0..6 {
                let run = family.run(&x, i).unwrap();
                assert_eq!(run.answer, disj(&rows[i], &x).unwrap());
                assert!(run.within_2tw, "{run:?}");
            }
        }
    }

    #[test]
    fn adaptive_static_structure_is_refused() {
        /// Probes cell 0, then uses its content as the next address.
        struct Planted;
        impl StaticDataStructure for Planted {
            fn name(&self) -> &'static str {
                "planted-adaptive"
            }
            fn space(&self) -> u64 {
                4
            }
            fn word_size(&self) -> u32 {
                2
            }
            fn n_inputs(&self) -> usize {
                4
            }
            fn n_queries(&self) -> usize {
                2
            }
            fn preprocess(&self, x: &BitVec) -> Result<Vec<u64>, CircuitError> {
                Ok((0..4).map(|j| x.get(j) as u64).collect())
            }
            fn query(
                &self,
                _i: usize,
                probe: &mut dyn FnMut(u64) -> Result<u64, ProbeError>,
            ) -> Result<bool, ProbeError> {
                let first = probe(0)?;
                let second = probe(1 + (first & 1))?; // adaptive hop
                Ok(second == 1)
            }
        }
        assert!(matches!(
            static_ds_to_3round(Planted),
            Err(NofError::AdaptiveStatic { .. })
        ));
    }

    #[test]
    fn one_point_five_simulation_matches_and_fits_2c() {
        #[derive(Clone)]
        struct TrivialForward;
        impl OnePointFive for TrivialForward {
            fn name(&self) -> &'static str {
                "forward-nothing"
            }
            fn charlie(&self, _sets: &[BitVec], t: &BitVec) -> BitString {
                let mut u = BitString::new();
                u.push_bitvec(t);
                u
            }
            fn forward(&self, _u: &BitString) -> BitString {
                BitString::new()
            }
            fn alice_msg(&self, _u_prime: &BitString, sets: &[BitVec], i: usize) -> BitString {
                let mut m = BitString::new();
                m.push_bitvec(&sets[i]);
                m
            }
            fn bob_answer(&self, _u: &BitString, t: &BitVec, _i: usize, alice: &BitString) -> bool {
                !intersect_bits(alice, 0, t)
            }
        }
        #[derive(Clone)]
        struct PrefixForward;
        impl OnePointFive for PrefixForward {
            fn name(&self) -> &'static str {
                "forward-prefix"
            }
            fn charlie(&self, _sets: &[BitVec], t: &BitVec) -> BitString {
                let mut u = BitString::new();
                u.push_bitvec(t);
                u
            }
            fn forward(&self, u: &BitString) -> BitString {
                let mut out = BitString::new();
                for pos in 0..u.len() / 2 {
                    out.push(u.get(pos));
                }
                out
            }
            fn alice_msg(&self, u_prime: &BitString, sets: &[BitVec], i: usize) -> BitString {
                // hit in the forwarded prefix -> announce; else send suffix
                let s_i = &sets[i];
                let mut out = BitString::new();
                let hit = (0..u_prime.len()).any(|j| u_prime.get(j) && s_i.get(j));
                out.push(hit);
                if !hit {
                    for j in u_prime.len()..s_i.len() {
                        out.push(s_i.get(j));
                    }
                }
                out
            }
            fn bob_answer(&self, _u: &BitString, t: &BitVec, _i: usize, alice: &BitString) -> bool {
                if alice.get(0) {
                    return false;
                }
                let split = t.len() / 2;
                for (off, j) in (split..t.len()).enumerate() {
                    if alice.get(1 + off) && t.get(j) {
                        return false;
                    }
                }
                true
            }
        }

        fn check<P: OnePointFive + Clone + 'static>(proto: P) {
            let n = 4;
            let k = 2;
            let wrapped = ModifiedFromOnePointFive { inner: proto.clone() };
            let mut inst = MultiphaseInstance::from_masks(n, &[0, 0], 0, 0.5);
            for s0 in 0..1u64 << n {
                for s1 in 0..1u64 << n {
                    for t in 0..1u64 << n {
                        inst.overwrite_masks(&[s0, s1], t);
                        for i in 0..k {
                            let direct = run_one_point_five(&proto, &inst, i);
                            assert_eq!(direct.answer, inst.answer(i), "1.5-round protocol is zero-error");
                            let tx = run_protocol(&wrapped, &inst, i).unwrap();
                            assert_eq!(tx.answer, direct.answer);
                            assert!(
                                tx.megan.len() <= 2 * direct.c_bits,
                                "megan {} > 2C {}",
                                tx.megan.len(),
                                2 * direct.c_bits
                            );
                        }
                    }
                }
            }
        }
        check(TrivialForward);
        check(PrefixForward);
    }

    #[test]
    fn restricted_three_party_embedding_runs() {
        #[derive(Clone)]
        struct Restricted;
        impl RestrictedThreeParty for Restricted {
            fn name(&self) -> &'static str {
                "restricted-send-si"
            }
            fn charlie(&self, _sets: &[BitVec], _t: &BitVec) -> BitString {
                BitString::new()
            }
            fn alice_first(&self, sets: &[BitVec], i: usize) -> BitString {
                let mut out = BitString::new();
                out.push_bitvec(&sets[i]);
                out
            }
            fn alice_later(&self, _round: usize, _s_i: &BitVec, _i: usize, _first: &BitString, _prefix: &[Message]) -> RoundOutcome {
                RoundOutcome::Send(BitString::new())
            }
            fn bob(&self, _round: usize, t: &BitVec, _i: usize, _u: &BitString, first: &BitString, _prefix: &[Message]) -> RoundOutcome {
                answer_message(!intersect_bits(first, 0, t))
            }
        }
        let inst = toy_instance(6, 3, 9);
        for i in 0..3 {
            let tx = run_protocol(&AsFourParty(Restricted), &inst, i).unwrap();
            assert_eq!(tx.answer, inst.answer(i));
        }
    }

    #[test]
    fn enumeration_normalizes_and_bounds_hold_tiny() {
        // n = 1, k = 2, p = 1, constant-message protocol: product structure
        let cfg = EnumerationConfig { n: 1, k: 2, p: 1, gamma: 0.3, ell: None };
        let dist = protocol_joint_distribution(&Stateless(MeganSendsSi), &cfg).unwrap();
        let total: f64 = dist.table.masses().iter().sum();
        assert!((total - 1.0).abs() < 1e-9);
        assert!(dist.zero_error);
        // without advice, conditioning on the transcript keeps the inputs
        // independent (the broadcast pins S_sel outright)
        let corr = dist.table.mutual_information(&["S"], &["T"], &["Z"]).unwrap();
        assert!(corr.abs() <= 1e-9, "I(S;T|Z) = {corr}");

        // n = 2, k = 2: normalization again
        let cfg = EnumerationConfig { n: 2, k: 2, p: 1, gamma: 0.25, ell: None };
        let dist = protocol_joint_distribution(&Stateless(AliceSendsSi), &cfg).unwrap();
        let total: f64 = dist.table.masses().iter().sum();
        assert!((total - 1.0).abs() < 1e-9);
    }

    /// Hand-computed check on the 2x2 case (n = 1, k = 2, p = 1, ell = 0,
    /// gamma = 1/2): for the protocol where U is T's only bit and Bob
    /// forwards it, Z determines T, and S stays independent of T given Z, so
    /// I(S;T|Z) = 0 while I(Z;T) = 1 bit.
    #[test]
    fn forwarded_bit_joint_distribution_matches_hand_calculation() {
        let cfg = EnumerationConfig { n: 1, k: 2, p: 1, gamma: 0.5, ell: Some(0) };
        let dist = protocol_joint_distribution(&Stateless(UForwardsFirstBit), &cfg).unwrap();
        let t = &dist.table;
        let i_st_z = t.mutual_information(&["S"], &["T"], &["Z"]).unwrap();
        assert!(i_st_z.abs() < 1e-9, "I(S;T|Z) = {i_st_z}");
        let i_zt = t.mutual_information(&["Z"], &["T"], &[]).unwrap();
        assert!((i_zt - 1.0).abs() < 1e-9, "I(Z;T) = {i_zt}");
        // and S_sel itself carries one bit against Z (alice sends S_i)
        let i_zs = t.mutual_information(&["Z"], &["S"], &[]).unwrap();
        assert!(i_zs > 0.9);
    }

    #[test]
    fn goodq_bounds_hold_for_registered_protocols() {
        let cfg = EnumerationConfig::with_gamma(2, 3, 2, 0.5);
        for family in [
            &Stateless(MeganSendsSi) as &dyn ProtocolFamily,
            &Stateless(AliceSendsSi),
            &Stateless(AdversarialFullT),
        ] {
            let report = verify_goodq_bounds(family, &cfg, 20).unwrap();
            assert!(report.pass, "{}: {report:?}", family.name());
            assert!(report.t_independence_exact.unwrap(), "exact referee agrees");
        }
        let family = ds_to_4party(StoreT::new(2, 3));
        let report = verify_goodq_bounds(&family, &cfg, 20).unwrap();
        assert!(report.pass, "store-t: {report:?}");
    }

    #[test]
    fn goodq_with_hard_gamma() {
        let cfg = EnumerationConfig::hard(2, 3, 2);
        let report = verify_goodq_bounds(&Stateless(AdversarialFullT), &cfg, 10).unwrap();
        assert!(report.pass, "{report:?}");
        assert!(report.t_independence_exact.is_none(), "hard gamma is not dyadic");
    }

    #[test]
    fn goodq_refuses_cheaters() {
        let cfg = EnumerationConfig::with_gamma(2, 3, 2, 0.5);
        assert!(matches!(
            verify_goodq_bounds(&CheatingMeganFamily, &cfg, 40),
            Err(NofError::AuditFailed { .. })
        ));
    }

    #[test]
    fn enumeration_bound_is_enforced() {
        let cfg = EnumerationConfig::with_gamma(4, 5, 2, 0.5);
        assert!(matches!(
            protocol_joint_distribution(&Stateless(MeganSendsSi), &cfg),
            Err(NofError::EnumerationTooLarge { .. })
        ));
    }

    #[test]
    fn answer_table_static_example_bits() {
        // s = ceil(k/w) answer table: U = s*w >= k bits, |Π_i| <= 2w
        let rows: Vec<BitVec> = (0..8).map(|i| BitVec::from_indices(8, &[i])).collect();
        let prob = StaticDisjProblem::new(rows);
        let w = crate::bits::default_word_size(8, 8);
        let family = static_ds_to_3round(AnswerTable::new(prob.rows().to_vec(), w)).unwrap();
        let x = BitVec::from_mask(8, 0b1001_0110);
        for i in 0..8 {
            let run = family.run(&x, i).unwrap();
            assert_eq!(run.probes, 1);
            assert!(run.pi_bits <= 2 * w as usize, "{run:?}");
            assert_eq!(run.u_bits, (8f64 / w as f64).ceil() as usize * w as usize);
        }
    }
}
