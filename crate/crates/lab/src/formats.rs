//! Self-describing structured text formats. All of them round-trip
//! bit-exactly: bit vectors as little-endian base-16 payloads, f64 values in
//! shortest-round-trip decimal.

use multiphase_core::bits::{BitString, BitVec};
use multiphase_core::cellprobe::{Layer, Op, Phase, ProbeLog};
use multiphase_core::circuits::{Circuit, Gate, GateKind, NodeId, TruthTable};
use multiphase_core::info::JointTable;
use multiphase_core::instance::MultiphaseInstance;
use multiphase_core::nof::{Speaker, Transcript};
use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl std::fmt::Display for ParseError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for ParseError {}

fn err(line: usize, message: impl Into<String>) -> ParseError {
    ParseError { line, message: message.into() }
}

// ---------------------------------------------------------------------------
// Bit-vector payloads
// ---------------------------------------------------------------------------

/// Little-endian hex: byte `b` holds bits `[8b, 8b+8)`, low bit first.
pub fn bits_to_hex(v: &BitVec) -> String {
    let nbytes = v.len().div_ceil(8);
    let mut out = String::with_capacity(nbytes * 2);
    for b in 0..nbytes {
        let byte = v.extract(8 * b, 8) as u8;
        let _ = write!(out, "{byte:02x}");
    }
    out
}

pub fn bits_from_hex(len: usize, hex: &str, line: usize) -> Result<BitVec, ParseError> {
    let nbytes = len.div_ceil(8);
    if hex.len() != nbytes * 2 {
        return Err(err(line, format!("expected {} hex digits, found {}", nbytes * 2, hex.len())));
    }
    let mut v = BitVec::zeros(len);
    for b in 0..nbytes {
        let byte = u8::from_str_radix(&hex[2 * b..2 * b + 2], 16)
            .map_err(|e| err(line, format!("bad hex byte: {e}")))?;
        for bit in 0..8 {
            let idx = 8 * b + bit;
            if idx < len {
                v.set(idx, byte >> bit & 1 == 1);
            } else if byte >> bit & 1 == 1 {
                return Err(err(line, "set bit beyond declared length"));
            }
        }
    }
    Ok(v)
}

fn bitstring_to_hex(bits: &BitString) -> String {
    let mut v = BitVec::zeros(bits.len());
    for (i, b) in bits.iter().enumerate() {
        v.set(i, b);
    }
    bits_to_hex(&v)
}

// ---------------------------------------------------------------------------
// Instance files
// ---------------------------------------------------------------------------

pub fn instance_to_string(inst: &MultiphaseInstance) -> String {
    let mut out = String::new();
    out.push_str("multiphase-instance v1\n");
    let _ = writeln!(out, "n = {}", inst.n());
    let _ = writeln!(out, "k = {}", inst.k());
    let _ = writeln!(out, "gamma = {}", inst.gamma());
    let _ = writeln!(out, "seed = {}", inst.seed());
    let _ = writeln!(out, "generator = {}", inst.generator_id());
    let _ = writeln!(out, "hard = {}", inst.is_hard_tagged());
    for (i, s) in inst.sets().iter().enumerate() {
        let _ = writeln!(out, "set {} = {}", i, bits_to_hex(s));
    }
    let _ = writeln!(out, "t = {}", bits_to_hex(inst.t()));
    out
}

pub fn instance_from_string(text: &str) -> Result<MultiphaseInstance, ParseError> {
    let mut lines = text.lines().enumerate();
    let (ln, header) = lines.next().ok_or_else(|| err(1, "empty file"))?;
    if header.trim() != "multiphase-instance v1" {
        return Err(err(ln + 1, "expected header 'multiphase-instance v1'"));
    }
    let mut n = None;
    let mut k = None;
    let mut gamma = None;
    let mut seed = None;
    let mut hard = None;
    let mut sets: Vec<(usize, BitVec)> = Vec::new();
    let mut t = None;
    for (idx, raw) in lines {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .map(|(a, b)| (a.trim(), b.trim()))
            .ok_or_else(|| err(line_no, "expected 'key = value'"))?;
        match key {
            "n" => n = Some(value.parse().map_err(|e| err(line_no, format!("bad n: {e}")))?),
            "k" => k = Some(value.parse().map_err(|e| err(line_no, format!("bad k: {e}")))?),
            "gamma" => {
                gamma = Some(value.parse().map_err(|e| err(line_no, format!("bad gamma: {e}")))?)
            }
            "seed" => seed = Some(value.parse().map_err(|e| err(line_no, format!("bad seed: {e}")))?),
            "generator" => {
                if value != multiphase_core::rng::GENERATOR_ID {
                    return Err(err(line_no, format!("unknown generator '{value}'")));
                }
            }
            "hard" => hard = Some(value == "true"),
            "t" => {
                let n = n.ok_or_else(|| err(line_no, "t before n"))?;
                t = Some(bits_from_hex(n, value, line_no)?);
            }
            _ if key.starts_with("set ") => {
                let n = n.ok_or_else(|| err(line_no, "set before n"))?;
                let i: usize = key[4..]
                    .trim()
                    .parse()
                    .map_err(|e| err(line_no, format!("bad set index: {e}")))?;
                sets.push((i, bits_from_hex(n, value, line_no)?));
            }
            other => return Err(err(line_no, format!("unknown key '{other}'"))),
        }
    }
    let n = n.ok_or_else(|| err(0, "missing n"))?;
    let k = k.ok_or_else(|| err(0, "missing k"))?;
    let gamma = gamma.ok_or_else(|| err(0, "missing gamma"))?;
    let seed = seed.ok_or_else(|| err(0, "missing seed"))?;
    let hard = hard.ok_or_else(|| err(0, "missing hard flag"))?;
    let t = t.ok_or_else(|| err(0, "missing t"))?;
    sets.sort_by_key(|&(i, _)| i);
    if sets.iter().enumerate().any(|(pos, &(i, _))| pos != i) {
        return Err(err(0, "set indices must cover 0..k"));
    }
    let sets: Vec<BitVec> = sets.into_iter().map(|(_, v)| v).collect();
    MultiphaseInstance::from_parts(n, k, sets, t, gamma, seed, hard)
        .map_err(|e| err(0, format!("invalid instance: {e}")))
}

// ---------------------------------------------------------------------------
// Joint tables
// ---------------------------------------------------------------------------

pub fn joint_table_to_string(table: &JointTable) -> String {
    let mut out = String::new();
    out.push_str("joint-table v1\n");
    for v in table.variables() {
        let _ = writeln!(out, "var {} {}", v.name, v.size);
    }
    for (i, &m) in table.masses().iter().enumerate() {
        let _ = writeln!(out, "mass {i} {m}");
    }
    out
}

pub fn joint_table_from_string(text: &str) -> Result<JointTable, ParseError> {
    let mut lines = text.lines().enumerate();
    let (ln, header) = lines.next().ok_or_else(|| err(1, "empty file"))?;
    if header.trim() != "joint-table v1" {
        return Err(err(ln + 1, "expected header 'joint-table v1'"));
    }
    let mut vars: Vec<(String, usize)> = Vec::new();
    let mut masses: Vec<(usize, f64)> = Vec::new();
    for (idx, raw) in lines {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        match parts.next() {
            Some("var") => {
                let name = parts.next().ok_or_else(|| err(line_no, "var needs a name"))?;
                let size: usize = parts
                    .next()
                    .ok_or_else(|| err(line_no, "var needs a size"))?
                    .parse()
                    .map_err(|e| err(line_no, format!("bad size: {e}")))?;
                vars.push((name.to_string(), size));
            }
            Some("mass") => {
                let i: usize = parts
                    .next()
                    .ok_or_else(|| err(line_no, "mass needs an index"))?
                    .parse()
                    .map_err(|e| err(line_no, format!("bad index: {e}")))?;
                let m: f64 = parts
                    .next()
                    .ok_or_else(|| err(line_no, "mass needs a value"))?
                    .parse()
                    .map_err(|e| err(line_no, format!("bad mass: {e}")))?;
                masses.push((i, m));
            }
            Some(other) => return Err(err(line_no, format!("unknown record '{other}'"))),
            None => {}
        }
    }
    let entries: usize = vars.iter().map(|(_, s)| *s).product();
    let mut probs = vec![0.0f64; entries];
    for (i, m) in masses {
        if i >= entries {
            return Err(err(0, format!("mass index {i} out of range {entries}")));
        }
        probs[i] = m;
    }
    JointTable::new(vars, probs).map_err(|e| err(0, format!("invalid table: {e}")))
}

// ---------------------------------------------------------------------------
// Circuits
// ---------------------------------------------------------------------------

fn node_token(node: NodeId) -> String {
    match node {
        NodeId::Input(j) => format!("i{j}"),
        NodeId::Gate(g) => format!("g{g}"),
    }
}

fn parse_node(tok: &str, line: usize) -> Result<NodeId, ParseError> {
    let (kind, idx) = tok.split_at(1);
    let idx: usize = idx.parse().map_err(|e| err(line, format!("bad node '{tok}': {e}")))?;
    match kind {
        "i" => Ok(NodeId::Input(idx)),
        "g" => Ok(NodeId::Gate(idx)),
        _ => Err(err(line, format!("bad node '{tok}': expected i<j> or g<j>"))),
    }
}

fn table_hex(t: &TruthTable) -> String {
    let mut out = String::new();
    for &w in t.raw_bits() {
        let _ = write!(out, "{w:016x}");
    }
    out
}

pub fn circuit_to_string(c: &Circuit) -> String {
    let mut out = String::new();
    out.push_str("circuit v1\n");
    let _ = writeln!(out, "inputs {}", c.n_inputs());
    for (g, gate) in c.gates().iter().enumerate() {
        let kind = match &gate.kind {
            GateKind::Or => "or".to_string(),
            GateKind::And => "and".to_string(),
            GateKind::Nor => "nor".to_string(),
            GateKind::Threshold(t) => format!("threshold {t}"),
            GateKind::Table(t) => format!("table {}", table_hex(t)),
        };
        let inputs: Vec<String> = gate.inputs.iter().map(|&n| node_token(n)).collect();
        let _ = writeln!(out, "gate {} level {} {} {}", g, c.level(g), kind, inputs.join(" "));
    }
    let outputs: Vec<String> = c.outputs().iter().map(|&n| node_token(n)).collect();
    let _ = writeln!(out, "outputs {}", outputs.join(" "));
    out
}

pub fn circuit_from_string(text: &str) -> Result<Circuit, ParseError> {
    let mut lines = text.lines().enumerate();
    let (ln, header) = lines.next().ok_or_else(|| err(1, "empty file"))?;
    if header.trim() != "circuit v1" {
        return Err(err(ln + 1, "expected header 'circuit v1'"));
    }
    let mut n_inputs: Option<usize> = None;
    let mut gates: Vec<Gate> = Vec::new();
    let mut declared_levels: Vec<(usize, u32)> = Vec::new();
    let mut outputs: Option<Vec<NodeId>> = None;
    for (idx, raw) in lines {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace().peekable();
        match parts.next() {
            Some("inputs") => {
                n_inputs = Some(
                    parts
                        .next()
                        .ok_or_else(|| err(line_no, "inputs needs a count"))?
                        .parse()
                        .map_err(|e| err(line_no, format!("bad input count: {e}")))?,
                );
            }
            Some("gate") => {
                let gid: usize = parts
                    .next()
                    .ok_or_else(|| err(line_no, "gate needs an id"))?
                    .parse()
                    .map_err(|e| err(line_no, format!("bad gate id: {e}")))?;
                if gid != gates.len() {
                    return Err(err(line_no, format!("gate id {gid} out of order")));
                }
                if parts.next() != Some("level") {
                    return Err(err(line_no, "expected 'level'"));
                }
                let level: u32 = parts
                    .next()
                    .ok_or_else(|| err(line_no, "level needs a value"))?
                    .parse()
                    .map_err(|e| err(line_no, format!("bad level: {e}")))?;
                declared_levels.push((gid, level));
                let kind_tok = parts.next().ok_or_else(|| err(line_no, "gate needs a kind"))?;
                let kind_arg = match kind_tok {
                    "threshold" | "table" => {
                        Some(parts.next().ok_or_else(|| err(line_no, "kind needs an argument"))?)
                    }
                    _ => None,
                };
                let inputs: Vec<NodeId> = parts
                    .map(|tok| parse_node(tok, line_no))
                    .collect::<Result<_, _>>()?;
                let kind = match kind_tok {
                    "or" => GateKind::Or,
                    "and" => GateKind::And,
                    "nor" => GateKind::Nor,
                    "threshold" => GateKind::Threshold(
                        kind_arg
                            .unwrap()
                            .parse()
                            .map_err(|e| err(line_no, format!("bad threshold: {e}")))?,
                    ),
                    "table" => {
                        let hex = kind_arg.unwrap();
                        if hex.len() % 16 != 0 {
                            return Err(err(line_no, "table hex must be whole 64-bit words"));
                        }
                        let words: Vec<u64> = (0..hex.len() / 16)
                            .map(|w| u64::from_str_radix(&hex[16 * w..16 * w + 16], 16))
                            .collect::<Result<_, _>>()
                            .map_err(|e| err(line_no, format!("bad table hex: {e}")))?;
                        let table = TruthTable::from_bits(inputs.len(), words)
                            .ok_or_else(|| err(line_no, "table size does not match fan-in"))?;
                        GateKind::Table(table)
                    }
                    other => return Err(err(line_no, format!("unknown gate kind '{other}'"))),
                };
                gates.push(Gate { inputs, kind });
            }
            Some("outputs") => {
                outputs = Some(
                    parts
                        .map(|tok| parse_node(tok, line_no))
                        .collect::<Result<_, _>>()?,
                );
            }
            Some(other) => return Err(err(line_no, format!("unknown record '{other}'"))),
            None => {}
        }
    }
    let n_inputs = n_inputs.ok_or_else(|| err(0, "missing inputs line"))?;
    let outputs = outputs.ok_or_else(|| err(0, "missing outputs line"))?;
    let circuit =
        Circuit::new(n_inputs, gates, outputs).map_err(|e| err(0, format!("invalid circuit: {e}")))?;
    // declared levels are advisory but must match the recomputation
    for (gid, level) in declared_levels {
        if circuit.level(gid) != level {
            return Err(err(0, format!("gate {gid} declares level {level}, recomputed {}", circuit.level(gid))));
        }
    }
    Ok(circuit)
}

// ---------------------------------------------------------------------------
// Probe logs and transcripts
// ---------------------------------------------------------------------------

pub fn probe_log_to_string(log: &ProbeLog) -> String {
    let mut out = String::new();
    for e in log.entries() {
        let phase = match e.phase() {
            Phase::Preprocess => "I",
            Phase::Update => "II",
            Phase::Query => "III",
        };
        let layer = match e.layer() {
            Layer::M => "m",
            Layer::Delta => "delta",
            Layer::FreeSi => "free-si",
        };
        let op = match e.op() {
            Op::Read => "read",
            Op::Write => "write",
        };
        let word = match e.word() {
            Some(w) => format!("{w:#018x}"),
            None => "bottom".to_string(),
        };
        let _ = writeln!(out, "{phase} {layer} {op} {:#018x} {word}", e.addr());
    }
    out
}

/// Audit reports as structured text: one line per constraint with trial
/// counts and, for violations, the trial and first differing bit position.
pub fn audit_report_to_string(report: &multiphase_core::nof::AuditReport, seed: u64) -> String {
    let mut out = String::new();
    out.push_str("audit-report v1\n");
    let _ = writeln!(out, "protocol = {}", report.protocol);
    let _ = writeln!(out, "seed = {seed}");
    let _ = writeln!(out, "clean = {}", report.clean());
    for c in &report.constraints {
        match &c.first_violation {
            None => {
                let _ = writeln!(out, "constraint {} trials {} violations 0", c.constraint, c.trials);
            }
            Some((trial, pos)) => {
                let pos = match pos {
                    Some(p) => p.to_string(),
                    None => "length-or-kind".to_string(),
                };
                let _ = writeln!(
                    out,
                    "constraint {} trials {} violations {} first_trial {trial} diff {pos}",
                    c.constraint, c.trials, c.violations
                );
            }
        }
    }
    out
}

pub fn transcript_to_string(name: &str, i: usize, tx: &Transcript) -> String {
    let mut out = String::new();
    out.push_str("transcript v1\n");
    let _ = writeln!(out, "protocol = {name}");
    let _ = writeln!(out, "i = {i}");
    let _ = writeln!(out, "u = {} bits {}", tx.u.len(), bitstring_to_hex(&tx.u));
    if let Some(up) = &tx.u_prime {
        let _ = writeln!(out, "u' = {} bits {}", up.len(), bitstring_to_hex(up));
    }
    let _ = writeln!(out, "megan = {} bits {}", tx.megan.len(), bitstring_to_hex(&tx.megan));
    for (r, m) in tx.rounds.iter().enumerate() {
        let speaker = match m.speaker {
            Speaker::Alice => "alice",
            Speaker::Bob => "bob",
        };
        let _ = writeln!(out, "round {r} {speaker} {} bits {}", m.bits.len(), bitstring_to_hex(&m.bits));
    }
    let _ = writeln!(out, "answer = {}", tx.answer as u8);
    let _ = writeln!(out, "pi_bits = {}", tx.pi_bits());
    out
}
