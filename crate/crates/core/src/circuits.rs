//! Circuits with arbitrary gates and unbounded fan-in, wire counting, the
//! static problem family `P^f_A`, and the translation from a depth-`d`,
//! `l`-wire circuit to a non-adaptive static data structure with space
//! `n + r`, query time `(l/r)^d` and word size `max{log n, log r} + 1`.
//!
//! The cost measure is the number of wires (total in-edge count). Gates are
//! arbitrary boolean functions: small ones as explicit truth tables, wide
//! ones via symbolic forms (OR / AND / NOR of a subset, thresholds).

use crate::bits::{ceil_log2, BitVec};
use crate::cellprobe::{Layer, Op, Phase, ProbeEntry, ProbeError, ProbeLog};
use crate::instance::disj;
use crate::rng::CounterRng;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

/// Truth-table gates are refused above this fan-in; wide gates must use a
/// symbolic kind.
pub const MAX_TABLE_FANIN: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CircuitError {
    ForwardReference { gate: usize },
    InputOutOfRange { gate: usize, input: usize },
    TableTooWide { gate: usize, fanin: usize },
    TableSizeMismatch { gate: usize, expected: usize, got: usize },
    NoOutputs,
    OutputOutOfRange,
    QueryOutOfRange { i: usize, k: usize },
    InputLengthMismatch { expected: usize, got: usize },
}

impl fmt::Display for CircuitError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CircuitError::ForwardReference { gate } => {
                write!(f, "gate {gate} references a later gate (not a DAG in topological order)")
            }
            CircuitError::InputOutOfRange { gate, input } => {
                write!(f, "gate {gate} reads input {input} outside the input range")
            }
            CircuitError::TableTooWide { gate, fanin } => {
                write!(f, "gate {gate} has fan-in {fanin} > {MAX_TABLE_FANIN}; use a symbolic kind")
            }
            CircuitError::TableSizeMismatch { gate, expected, got } => {
                write!(f, "gate {gate} truth table has {got} rows, expected {expected}")
            }
            CircuitError::NoOutputs => write!(f, "circuit has no outputs"),
            CircuitError::OutputOutOfRange => write!(f, "output references a missing gate"),
            CircuitError::QueryOutOfRange { i, k } => write!(f, "query {i} out of range [0, {k})"),
            CircuitError::InputLengthMismatch { expected, got } => {
                write!(f, "input has {got} bits, circuit expects {expected}")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for CircuitError {}

/// Reference to an input bit or an earlier gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeId {
    Input(usize),
    Gate(usize),
}

/// A packed truth table over `fanin <= 20` inputs; row index is the
/// little-endian packing of child values in input order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruthTable {
    rows: usize,
    bits: Vec<u64>,
}

impl TruthTable {
    pub fn from_fn(fanin: usize, f: impl Fn(usize) -> bool) -> Self {
        let rows = 1usize << fanin;
        let mut bits = vec![0u64; rows.div_ceil(64)];
        for row in 0..rows {
            if f(row) {
                bits[row / 64] |= 1 << (row % 64);
            }
        }
        TruthTable { rows, bits }
    }

    pub fn from_bits(fanin: usize, bits: Vec<u64>) -> Option<Self> {
        let rows = 1usize << fanin;
        if bits.len() != rows.div_ceil(64) {
            return None;
        }
        Some(TruthTable { rows, bits })
    }

    pub fn row(&self, idx: usize) -> bool {
        self.bits[idx / 64] >> (idx % 64) & 1 == 1
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn raw_bits(&self) -> &[u64] {
        &self.bits
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GateKind {
    Table(TruthTable),
    /// OR of all in-edges (empty OR is 0).
    Or,
    /// AND of all in-edges (empty AND is 1).
    And,
    /// NOR of all in-edges (empty NOR is 1).
    Nor,
    /// 1 iff at least `t` in-edges are 1.
    Threshold(usize),
}

impl GateKind {
    fn apply(&self, values: &[bool]) -> bool {
        match self {
            GateKind::Table(t) => {
                let mut idx = 0usize;
                for (pos, &v) in values.iter().enumerate() {
                    idx |= (v as usize) << pos;
                }
                t.row(idx)
            }
            GateKind::Or => values.iter().any(|&v| v),
            GateKind::And => values.iter().all(|&v| v),
            GateKind::Nor => !values.iter().any(|&v| v),
            GateKind::Threshold(t) => values.iter().filter(|&&v| v).count() >= *t,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gate {
    pub inputs: Vec<NodeId>,
    pub kind: GateKind,
}

/// A DAG of arbitrary gates in topological order.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    n_inputs: usize,
    gates: Vec<Gate>,
    outputs: Vec<NodeId>,
    levels: Vec<u32>,
    wires: u64,
    depth: u32,
}

impl Circuit {
    /// Validates the DAG (gates may only reference inputs and earlier gates)
    /// and caches levels, depth and wire count.
    pub fn new(n_inputs: usize, gates: Vec<Gate>, outputs: Vec<NodeId>) -> Result<Self, CircuitError> {
        if outputs.is_empty() {
            return Err(CircuitError::NoOutputs);
        }
        let mut levels = Vec::with_capacity(gates.len());
        let mut wires = 0u64;
        for (gi, gate) in gates.iter().enumerate() {
            let mut level = 1u32;
            for &inp in &gate.inputs {
                match inp {
                    NodeId::Input(j) => {
                        if j >= n_inputs {
                            return Err(CircuitError::InputOutOfRange { gate: gi, input: j });
                        }
                    }
                    NodeId::Gate(h) => {
                        if h >= gi {
                            return Err(CircuitError::ForwardReference { gate: gi });
                        }
                        level = level.max(levels[h] + 1);
                    }
                }
            }
            if let GateKind::Table(t) = &gate.kind {
                if gate.inputs.len() > MAX_TABLE_FANIN {
                    return Err(CircuitError::TableTooWide { gate: gi, fanin: gate.inputs.len() });
                }
                let expected = 1usize << gate.inputs.len();
                if t.rows() != expected {
                    return Err(CircuitError::TableSizeMismatch { gate: gi, expected, got: t.rows() });
                }
            }
            wires += gate.inputs.len() as u64;
            levels.push(level);
        }
        let mut depth = 0u32;
        for &out in &outputs {
            match out {
                NodeId::Input(j) if j < n_inputs => {}
                NodeId::Gate(g) if g < gates.len() => depth = depth.max(levels[g]),
                _ => return Err(CircuitError::OutputOutOfRange),
            }
        }
        Ok(Circuit { n_inputs, gates, outputs, levels, wires, depth })
    }

    pub fn n_inputs(&self) -> usize {
        self.n_inputs
    }

    pub fn n_outputs(&self) -> usize {
        self.outputs.len()
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn outputs(&self) -> &[NodeId] {
        &self.outputs
    }

    /// Longest path from the inputs to gate `g` (inputs are level 0).
    pub fn level(&self, g: usize) -> u32 {
        self.levels[g]
    }

    /// Total in-edge count.
    pub fn wires(&self) -> u64 {
        self.wires
    }

    /// Longest input-to-output path.
    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// Recomputes depth and wires from scratch; construction caches must
    /// match.
    pub fn recount_consistent(&self) -> bool {
        let recomputed = Circuit::new(self.n_inputs, self.gates.clone(), self.outputs.clone());
        match recomputed {
            Ok(c) => c.wires == self.wires && c.depth == self.depth && c.levels == self.levels,
            Err(_) => false,
        }
    }

    /// Topological evaluation.
    pub fn eval(&self, x: &BitVec) -> Result<BitVec, CircuitError> {
        if x.len() != self.n_inputs {
            return Err(CircuitError::InputLengthMismatch { expected: self.n_inputs, got: x.len() });
        }
        let mut values = Vec::with_capacity(self.gates.len());
        let mut scratch: Vec<bool> = Vec::new();
        for gate in &self.gates {
            scratch.clear();
            for &inp in &gate.inputs {
                scratch.push(match inp {
                    NodeId::Input(j) => x.get(j),
                    NodeId::Gate(h) => values[h],
                });
            }
            values.push(gate.kind.apply(&scratch));
        }
        let mut out = BitVec::zeros(self.outputs.len());
        for (oi, &o) in self.outputs.iter().enumerate() {
            let v = match o {
                NodeId::Input(j) => x.get(j),
                NodeId::Gate(g) => values[g],
            };
            out.set(oi, v);
        }
        Ok(out)
    }
}

/// Depth-1 circuit computing `x -> Ax` over the boolean semiring (addition
/// = OR, multiplication = AND): output `i` is the OR of `x_j` over the
/// support of row `i`. Wire count equals the popcount of `A`.
pub fn linear_operator_circuit(rows: &[BitVec]) -> Result<Circuit, CircuitError> {
    let n = rows.first().map(|r| r.len()).unwrap_or(0);
    let mut gates = Vec::with_capacity(rows.len());
    let mut outputs = Vec::with_capacity(rows.len());
    for row in rows {
        let inputs: Vec<NodeId> = row.iter_ones().map(NodeId::Input).collect();
        gates.push(Gate { inputs, kind: GateKind::Or });
        outputs.push(NodeId::Gate(gates.len() - 1));
    }
    Circuit::new(n, gates, outputs)
}

/// Depth-1 circuit answering `DISJ(A_i, x)`: output `i` is the NOR of `x_j`
/// over the support of row `i`.
pub fn disj_operator_circuit(rows: &[BitVec]) -> Result<Circuit, CircuitError> {
    let n = rows.first().map(|r| r.len()).unwrap_or(0);
    let mut gates = Vec::with_capacity(rows.len());
    let mut outputs = Vec::with_capacity(rows.len());
    for row in rows {
        let inputs: Vec<NodeId> = row.iter_ones().map(NodeId::Input).collect();
        gates.push(Gate { inputs, kind: GateKind::Nor });
        outputs.push(NodeId::Gate(gates.len() - 1));
    }
    Circuit::new(n, gates, outputs)
}

// ---------------------------------------------------------------------------
// Static data structures
// ---------------------------------------------------------------------------

/// A static structure: preprocess a database `x` into a memory image, then
/// answer queries through word probes. Query procedures receive only the
/// probe callback, never `x`.
pub trait StaticDataStructure {
    fn name(&self) -> &'static str;
    /// Space in cells.
    fn space(&self) -> u64;
    fn word_size(&self) -> u32;
    fn n_inputs(&self) -> usize;
    fn n_queries(&self) -> usize;
    fn preprocess(&self, x: &BitVec) -> Result<Vec<u64>, CircuitError>;
    fn query(
        &self,
        i: usize,
        probe: &mut dyn FnMut(u64) -> Result<u64, ProbeError>,
    ) -> Result<bool, ProbeError>;
}

/// Runs one static query against a preprocessed image, recording every probe.
pub fn run_static(
    sds: &dyn StaticDataStructure,
    image: &[u64],
    i: usize,
    log: &mut ProbeLog,
) -> Result<bool, ProbeError> {
    let space = sds.space();
    if i >= sds.n_queries() {
        return Err(ProbeError::OutOfRange { addr: i as u64, space: sds.n_queries() as u64 });
    }
    let mut probe = |addr: u64| -> Result<u64, ProbeError> {
        if addr >= space {
            return Err(ProbeError::OutOfRange { addr, space });
        }
        let word = image[addr as usize];
        log.push(ProbeEntry::new(Phase::Query, Layer::M, Op::Read, addr, Some(word)));
        Ok(word)
    };
    sds.query(i, &mut probe)
}

/// The probe addresses of query `i`. Values are irrelevant for non-adaptive
/// structures; this feeds the zero word to every probe.
pub fn probe_plan(sds: &dyn StaticDataStructure, i: usize) -> Result<Vec<u64>, ProbeError> {
    let mut plan = Vec::new();
    let mut probe = |addr: u64| -> Result<u64, ProbeError> {
        plan.push(addr);
        Ok(0)
    };
    sds.query(i, &mut probe)?;
    Ok(plan)
}

/// Replay audit for non-adaptivity: for `trials` random databases, the probe
/// address sequence of every query must match the plan extracted on the
/// zero image. Returns the offending (query, probe index) on failure.
pub fn audit_non_adaptive(
    sds: &dyn StaticDataStructure,
    trials: u32,
    seed: u64,
) -> Result<(), (usize, usize)> {
    let n = sds.n_inputs();
    let mut rng = CounterRng::new(seed);
    let mut plans = Vec::with_capacity(sds.n_queries());
    for i in 0..sds.n_queries() {
        plans.push(probe_plan(sds, i).map_err(|_| (i, 0))?);
    }
    for _ in 0..trials {
        let mut x = BitVec::zeros(n);
        for j in 0..n {
            if rng.bernoulli(0.5) {
                x.set(j, true);
            }
        }
        let image = sds.preprocess(&x).map_err(|_| (0, 0))?;
        for (i, plan) in plans.iter().enumerate() {
            let mut at = 0usize;
            let mut mismatch = None;
            let mut probe = |addr: u64| -> Result<u64, ProbeError> {
                if at >= plan.len() || plan[at] != addr {
                    mismatch = Some(at);
                    return Err(ProbeError::ReplayMismatch { expected: plan.get(at).copied().unwrap_or(u64::MAX), got: addr });
                }
                at += 1;
                Ok(image[addr as usize])
            };
            match sds.query(i, &mut probe) {
                Ok(_) if at == plan.len() => {}
                _ => return Err((i, mismatch.unwrap_or(at))),
            }
        }
    }
    Ok(())
}

/// Answer-table structure for `P^DISJ_A`: preprocessing stores the answer to
/// every query packed `w` bits per cell; a query costs one probe.
pub struct AnswerTable {
    rows: Vec<BitVec>,
    w: u32,
}

impl AnswerTable {
    pub fn new(rows: Vec<BitVec>, w: u32) -> Self {
        AnswerTable { rows, w }
    }
}

impl StaticDataStructure for AnswerTable {
    fn name(&self) -> &'static str {
        "answer-table"
    }

    fn space(&self) -> u64 {
        self.rows.len().div_ceil(self.w as usize) as u64
    }

    fn word_size(&self) -> u32 {
        self.w
    }

    fn n_inputs(&self) -> usize {
        self.rows.first().map(|r| r.len()).unwrap_or(0)
    }

    fn n_queries(&self) -> usize {
        self.rows.len()
    }

    fn preprocess(&self, x: &BitVec) -> Result<Vec<u64>, CircuitError> {
        let mut image = vec![0u64; self.space() as usize];
        for (i, row) in self.rows.iter().enumerate() {
            if disj(row, x).map_err(|_| CircuitError::InputLengthMismatch {
                expected: self.n_inputs(),
                got: x.len(),
            })? {
                image[i / self.w as usize] |= 1 << (i % self.w as usize);
            }
        }
        Ok(image)
    }

    fn query(
        &self,
        i: usize,
        probe: &mut dyn FnMut(u64) -> Result<u64, ProbeError>,
    ) -> Result<bool, ProbeError> {
        let word = probe((i / self.w as usize) as u64)?;
        Ok(word >> (i % self.w as usize) & 1 == 1)
    }
}

/// Result of translating a circuit: a non-adaptive static structure with
/// space `n + |G|` (`|G| < r`), plus the translation metadata.
pub struct TranslatedDs {
    circuit: Circuit,
    r: u64,
    w: u32,
    /// Gates with fan-in strictly above `wires / r`, in index order.
    stored: Vec<usize>,
    /// gate index -> slot in the stored region
    slot: Vec<Option<usize>>,
}

impl TranslatedDs {
    pub fn stored_gates(&self) -> usize {
        self.stored.len()
    }

    pub fn r(&self) -> u64 {
        self.r
    }

    pub fn circuit(&self) -> &Circuit {
        &self.circuit
    }

    /// The probe-count bound `(l/r)^d`.
    pub fn probe_bound(&self) -> f64 {
        let ratio = self.circuit.wires() as f64 / self.r as f64;
        libm::pow(ratio, self.circuit.depth() as f64)
    }

    fn resolve(
        &self,
        node: NodeId,
        probe: &mut dyn FnMut(u64) -> Result<u64, ProbeError>,
    ) -> Result<bool, ProbeError> {
        match node {
            NodeId::Input(j) => Ok(probe(j as u64)? & 1 == 1),
            NodeId::Gate(g) => {
                if let Some(slot) = self.slot[g] {
                    return Ok(probe((self.circuit.n_inputs() + slot) as u64)? & 1 == 1);
                }
                let gate = &self.circuit.gates()[g];
                // no short-circuiting: probe addresses must not depend on values
                let mut values = Vec::with_capacity(gate.inputs.len());
                for &inp in &gate.inputs {
                    values.push(self.resolve(inp, probe)?);
                }
                Ok(gate.kind.apply(&values))
            }
        }
    }
}

impl StaticDataStructure for TranslatedDs {
    fn name(&self) -> &'static str {
        "circuit-translation"
    }

    fn space(&self) -> u64 {
        (self.circuit.n_inputs() + self.stored.len()) as u64
    }

    fn word_size(&self) -> u32 {
        self.w
    }

    fn n_inputs(&self) -> usize {
        self.circuit.n_inputs()
    }

    fn n_queries(&self) -> usize {
        self.circuit.n_outputs()
    }

    fn preprocess(&self, x: &BitVec) -> Result<Vec<u64>, CircuitError> {
        if x.len() != self.circuit.n_inputs() {
            return Err(CircuitError::InputLengthMismatch {
                expected: self.circuit.n_inputs(),
                got: x.len(),
            });
        }
        // input bits one per cell, then the stored-gate values one per cell
        let mut image = Vec::with_capacity(self.circuit.n_inputs() + self.stored.len());
        for j in 0..x.len() {
            image.push(x.get(j) as u64);
        }
        let mut values = Vec::with_capacity(self.circuit.gates().len());
        let mut scratch: Vec<bool> = Vec::new();
        for gate in self.circuit.gates() {
            scratch.clear();
            for &inp in &gate.inputs {
                scratch.push(match inp {
                    NodeId::Input(j) => x.get(j),
                    NodeId::Gate(h) => values[h],
                });
            }
            values.push(gate.kind.apply(&scratch));
        }
        for &g in &self.stored {
            image.push(values[g] as u64);
        }
        Ok(image)
    }

    fn query(
        &self,
        i: usize,
        probe: &mut dyn FnMut(u64) -> Result<u64, ProbeError>,
    ) -> Result<bool, ProbeError> {
        self.resolve(self.circuit.outputs()[i], probe)
    }
}

/// Translation: `G` is the set of gates with fan-in strictly greater than
/// `wires/r` (ties stay outside `G`); their values are stored one per cell
/// after the `n` input cells. `|G| < r` by pigeonhole, asserted here.
pub fn translate(circuit: Circuit, r: u64) -> TranslatedDs {
    assert!(r >= 1, "r must be positive");
    let wires = circuit.wires();
    let mut stored = Vec::new();
    let mut slot = vec![None; circuit.gates().len()];
    for (g, gate) in circuit.gates().iter().enumerate() {
        // fan_in > wires / r  <=>  fan_in * r > wires, exactly in integers
        if (gate.inputs.len() as u64).saturating_mul(r) > wires {
            slot[g] = Some(stored.len());
            stored.push(g);
        }
    }
    assert!(
        (stored.len() as u64) < r,
        "pigeonhole violated: {} stored gates with r = {r}",
        stored.len()
    );
    let w = ceil_log2(circuit.n_inputs()).max(ceil_log2(r as usize)) + 1;
    TranslatedDs { circuit, r, w, stored, slot }
}

// ---------------------------------------------------------------------------
// Random circuit corpus
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
pub struct RandomCircuitParams {
    pub n_inputs: usize,
    pub n_outputs: usize,
    pub depth: u32,
    /// Approximate wire budget; the generator stays at or below it.
    pub wire_budget: u64,
    pub max_fanin: usize,
}

/// Seeded random layered circuit with mixed gate kinds. Every gate at level
/// `m` has at least one in-edge from level `m-1`, so the declared depth is
/// achieved exactly (outputs sit at the top level).
pub fn random_circuit(params: &RandomCircuitParams, rng: &mut CounterRng) -> Circuit {
    let d = params.depth.max(1) as usize;
    let mut gates: Vec<Gate> = Vec::new();
    let mut level_members: Vec<Vec<NodeId>> = Vec::with_capacity(d + 1);
    level_members.push((0..params.n_inputs).map(NodeId::Input).collect());
    let mut wires_left = params.wire_budget;

    for level in 1..=d {
        let remaining_levels = (d - level + 1) as u64;
        let gates_here = if level == d {
            params.n_outputs
        } else {
            // spread the budget; at least one gate per level
            let est = (wires_left / remaining_levels / (params.max_fanin as u64 / 2 + 1)).max(1);
            est.min(64) as usize
        };
        let mut members = Vec::with_capacity(gates_here);
        for _ in 0..gates_here {
            let reserve = (d - level) as u64 + (params.n_outputs as u64);
            let cap = params
                .max_fanin
                .min(wires_left.saturating_sub(reserve).max(1) as usize)
                .max(1);
            let fanin = 1 + rng.gen_range(cap as u64) as usize;
            let mut inputs = Vec::with_capacity(fanin);
            // pin the level with one edge from the previous level
            let prev = &level_members[level - 1];
            inputs.push(prev[rng.gen_range(prev.len() as u64) as usize]);
            for _ in 1..fanin {
                let from_level = rng.gen_range(level as u64) as usize;
                let pool = &level_members[from_level];
                inputs.push(pool[rng.gen_range(pool.len() as u64) as usize]);
            }
            wires_left = wires_left.saturating_sub(inputs.len() as u64);
            let kind = match rng.gen_range(5) {
                0 => GateKind::Or,
                1 => GateKind::And,
                2 => GateKind::Nor,
                3 => GateKind::Threshold(1 + rng.gen_range(inputs.len() as u64) as usize),
                _ => {
                    let fi = inputs.len().min(MAX_TABLE_FANIN);
                    inputs.truncate(fi);
                    let mask = rng.next_u64();
                    GateKind::Table(TruthTable::from_fn(fi, |row| mask >> (row % 64) & 1 == 1))
                }
            };
            gates.push(Gate { inputs, kind });
            members.push(NodeId::Gate(gates.len() - 1));
        }
        level_members.push(members);
    }
    let outputs = level_members[d].clone();
    Circuit::new(params.n_inputs, gates, outputs).expect("generator builds valid circuits")
}

/// The static disjointness problem `P^DISJ_A` for a fixed query matrix `A`:
/// preprocess `x`, then answer `DISJ(A_i, x)` for query `i`.
pub struct StaticDisjProblem {
    rows: Vec<BitVec>,
}

impl StaticDisjProblem {
    pub fn new(rows: Vec<BitVec>) -> Self {
        StaticDisjProblem { rows }
    }

    pub fn rows(&self) -> &[BitVec] {
        &self.rows
    }

    pub fn n(&self) -> usize {
        self.rows.first().map(|r| r.len()).unwrap_or(0)
    }

    pub fn k(&self) -> usize {
        self.rows.len()
    }

    /// Ground truth.
    pub fn answer(&self, x: &BitVec, i: usize) -> Result<bool, CircuitError> {
        if i >= self.k() {
            return Err(CircuitError::QueryOutOfRange { i, k: self.k() });
        }
        disj(&self.rows[i], x)
            .map_err(|_| CircuitError::InputLengthMismatch { expected: self.n(), got: x.len() })
    }

    /// One-probe answer-table structure with word size `w`.
    pub fn answer_table(&self, w: u32) -> AnswerTable {
        AnswerTable::new(self.rows.clone(), w)
    }

    /// NOR-gate circuit computing all answers, for the translation pipeline.
    pub fn circuit(&self) -> Result<Circuit, CircuitError> {
        disj_operator_circuit(&self.rows)
    }

    /// Translated structure at space parameter `r`.
    pub fn translated(&self, r: u64) -> Result<TranslatedDs, CircuitError> {
        Ok(translate(self.circuit()?, r))
    }
}

/// Boolean matrix as dense bit rows, used by the operator constructions.
pub fn random_matrix(k: usize, n: usize, density: f64, rng: &mut CounterRng) -> Vec<BitVec> {
    (0..k)
        .map(|_| {
            let mut row = BitVec::zeros(n);
            for j in 0..n {
                if rng.bernoulli(density) {
                    row.set(j, true);
                }
            }
            row
        })
        .collect()
}
