//! Operation pools and placeholder circuits.
//!
//! A placeholder circuit is a fixed encoding block followed by
//! `placeholders * blocks` slots, each filled by one candidate from an
//! operation pool. A candidate is a gate kind plus the ordered qubit range
//! it works on: rotation kinds expand to one gate per qubit in the range,
//! two-qubit kinds to a chain of neighbouring pairs that closes into a
//! ring exactly when the range covers all qubits, and the identity
//! candidate expands to nothing.

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::{GateInstr, GateKind};

/// One entry of an operation pool.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpCandidate {
    pub kind: GateKind,
    pub working_range: Vec<usize>,
}

impl OpCandidate {
    pub fn new(kind: GateKind, working_range: Vec<usize>) -> Self {
        Self {
            kind,
            working_range,
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        if self.working_range.is_empty() {
            return Err(Error::InvalidCandidate(format!(
                "{} has an empty working range",
                self.kind.name()
            )));
        }
        let mut seen = vec![false; n];
        for &q in &self.working_range {
            if q >= n {
                return Err(Error::InvalidCandidate(format!(
                    "qubit {q} outside a {n}-qubit circuit"
                )));
            }
            if seen[q] {
                return Err(Error::InvalidCandidate(format!(
                    "qubit {q} repeated in working range"
                )));
            }
            seen[q] = true;
        }
        if self.kind.is_two_qubit() && self.working_range.len() < 2 {
            return Err(Error::InvalidCandidate(format!(
                "{} needs a working range of at least two qubits",
                self.kind.name()
            )));
        }
        Ok(())
    }

    /// Parameters one expansion of this candidate consumes.
    pub fn param_count(&self) -> usize {
        self.kind.param_count() * self.working_range.len()
    }
}

/// The per-placeholder search space.
#[derive(Debug, Clone, PartialEq)]
pub struct OperationPool {
    candidates: Vec<OpCandidate>,
}

impl OperationPool {
    pub fn new(candidates: Vec<OpCandidate>) -> Result<Self> {
        if candidates.len() < 2 {
            return Err(Error::InvalidCandidate(
                "a pool needs at least two candidates".into(),
            ));
        }
        for (i, a) in candidates.iter().enumerate() {
            for b in &candidates[i + 1..] {
                if a == b {
                    return Err(Error::InvalidCandidate(format!(
                        "duplicate candidate {} {:?}",
                        a.kind.name(),
                        a.working_range
                    )));
                }
            }
        }
        Ok(Self { candidates })
    }

    pub fn size(&self) -> usize {
        self.candidates.len()
    }

    pub fn candidates(&self) -> &[OpCandidate] {
        &self.candidates
    }

    pub fn candidate(&self, index: usize) -> &OpCandidate {
        &self.candidates[index]
    }

    pub fn position(&self, cand: &OpCandidate) -> Option<usize> {
        self.candidates.iter().position(|c| c == cand)
    }

    /// Largest per-candidate parameter demand; sizes the shared theta bank.
    pub fn max_param_count(&self) -> usize {
        self.candidates
            .iter()
            .map(OpCandidate::param_count)
            .max()
            .unwrap_or(0)
    }
}

/// Canonical pool names.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PoolName {
    Op1,
    Op2,
}

impl PoolName {
    pub fn name(self) -> &'static str {
        match self {
            PoolName::Op1 => "op1",
            PoolName::Op2 => "op2",
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        match text {
            "op1" => Ok(PoolName::Op1),
            "op2" => Ok(PoolName::Op2),
            other => Err(Error::UnknownPool(other.into())),
        }
    }
}

/// Build one of the two canonical pools. Both are defined for five qubits:
/// `ry` and `rz` on the ranges [0..4], [0..3] and [1..4], `cnot` on
/// [0..3], identity on all qubits, and (op1 only) `cz` on [0..3].
pub fn make_pool(name: PoolName, n: usize) -> Result<OperationPool> {
    if n != 5 {
        return Err(Error::InvalidCandidate(format!(
            "canonical pools are defined for 5 qubits, got {n}"
        )));
    }
    let full: Vec<usize> = (0..5).collect();
    let low: Vec<usize> = (0..4).collect();
    let high: Vec<usize> = (1..5).collect();

    let mut candidates = Vec::new();
    for kind in [GateKind::Ry, GateKind::Rz] {
        for range in [&full, &low, &high] {
            candidates.push(OpCandidate::new(kind, range.clone()));
        }
    }
    if name == PoolName::Op1 {
        candidates.push(OpCandidate::new(GateKind::Cz, low.clone()));
    }
    candidates.push(OpCandidate::new(GateKind::Cnot, low));
    candidates.push(OpCandidate::new(GateKind::Identity, full));
    OperationPool::new(candidates)
}

/// A circuit template: fixed encoding prefix plus placeholder slots.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaceholderCircuit {
    pub n: usize,
    pub encoding: Vec<GateInstr>,
    pub placeholders: usize,
    pub blocks: usize,
}

impl PlaceholderCircuit {
    /// Standard template: rx(pi) on every qubit, then `placeholders`
    /// slots per block.
    pub fn standard(n: usize, placeholders: usize, blocks: usize) -> Result<Self> {
        if placeholders == 0 || blocks == 0 {
            return Err(Error::InvalidArchitecture(
                "need at least one placeholder and one block".into(),
            ));
        }
        Ok(Self {
            n,
            encoding: encoding_block(n),
            placeholders,
            blocks,
        })
    }

    /// Total placeholder slots (`placeholders * blocks`).
    pub fn slots(&self) -> usize {
        self.placeholders * self.blocks
    }
}

/// The fixed rx(pi) state-preparation prefix.
pub fn encoding_block(n: usize) -> Vec<GateInstr> {
    (0..n).map(|q| GateInstr::rx(q, PI)).collect()
}

/// One candidate choice per placeholder slot.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ArchAssignment(pub Vec<usize>);

impl ArchAssignment {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn validate(&self, pc: &PlaceholderCircuit, pool: &OperationPool) -> Result<()> {
        if self.0.len() != pc.slots() {
            return Err(Error::InvalidArchitecture(format!(
                "assignment length {} for {} placeholder slots",
                self.0.len(),
                pc.slots()
            )));
        }
        for &c in &self.0 {
            if c >= pool.size() {
                return Err(Error::InvalidArchitecture(format!(
                    "candidate index {c} outside pool of size {}",
                    pool.size()
                )));
            }
        }
        Ok(())
    }
}

/// Expand a candidate into gates with parameter slots starting at
/// `slot_base`; returns the gates and the number of slots consumed.
fn expand_with_base(
    cand: &OpCandidate,
    n: usize,
    slot_base: usize,
) -> Result<(Vec<GateInstr>, usize)> {
    cand.validate(n)?;
    let mut gates = Vec::new();
    let mut next = slot_base;
    match cand.kind {
        GateKind::Identity => {}
        GateKind::Cnot | GateKind::Cz => {
            let range = &cand.working_range;
            for pair in range.windows(2) {
                gates.push(GateInstr::fixed(
                    cand.kind,
                    vec![pair[0], pair[1]],
                    Vec::new(),
                ));
            }
            if range.len() == n {
                // Full coverage closes the chain into a ring.
                gates.push(GateInstr::fixed(
                    cand.kind,
                    vec![range[n - 1], range[0]],
                    Vec::new(),
                ));
            }
        }
        kind => {
            let per_gate = kind.param_count();
            for &q in &cand.working_range {
                let slots: Vec<usize> = (next..next + per_gate).collect();
                next += per_gate;
                gates.push(GateInstr::slotted(kind, vec![q], slots));
            }
        }
    }
    Ok((gates, next - slot_base))
}

/// Expand a candidate over its working range; fresh parameter slots
/// numbered from zero.
pub fn expand_candidate(cand: &OpCandidate, n: usize) -> Result<Vec<GateInstr>> {
    expand_with_base(cand, n, 0).map(|(gates, _)| gates)
}

/// A fully bound circuit: gate list plus parameter bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct AssembledCircuit {
    pub gates: Vec<GateInstr>,
    /// Length of the theta vector the gate list needs.
    pub param_count: usize,
    /// Number of fixed encoding gates at the head of `gates`.
    pub encoding_len: usize,
    pub n: usize,
}

impl AssembledCircuit {
    /// Parameter slots actually referenced by the gates, ascending.
    pub fn active_slots(&self) -> Vec<usize> {
        let mut slots: Vec<usize> = self
            .gates
            .iter()
            .flat_map(|g| g.param_slots.iter().copied())
            .collect();
        slots.sort_unstable();
        slots.dedup();
        slots
    }
}

/// Bind an architecture to the template with contiguous parameter slots.
pub fn assemble_circuit(
    pc: &PlaceholderCircuit,
    pool: &OperationPool,
    arch: &ArchAssignment,
) -> Result<AssembledCircuit> {
    arch.validate(pc, pool)?;
    let mut gates = pc.encoding.clone();
    let encoding_len = gates.len();
    let mut next_slot = 0;
    for &choice in &arch.0 {
        let (expanded, used) = expand_with_base(pool.candidate(choice), pc.n, next_slot)?;
        gates.extend(expanded);
        next_slot += used;
    }
    Ok(AssembledCircuit {
        gates,
        param_count: next_slot,
        encoding_len,
        n: pc.n,
    })
}

/// Bind an architecture against the shared theta bank: placeholder slot
/// `i` reads the fixed bank window `[i * bank_width, ...)`, so one bank
/// serves every architecture sampled during search.
pub fn assemble_with_bank(
    pc: &PlaceholderCircuit,
    pool: &OperationPool,
    arch: &ArchAssignment,
    bank_width: usize,
) -> Result<AssembledCircuit> {
    arch.validate(pc, pool)?;
    let mut gates = pc.encoding.clone();
    let encoding_len = gates.len();
    for (slot, &choice) in arch.0.iter().enumerate() {
        let cand = pool.candidate(choice);
        if cand.param_count() > bank_width {
            return Err(Error::InvalidArchitecture(format!(
                "candidate needs {} parameters, bank window is {bank_width}",
                cand.param_count()
            )));
        }
        let (expanded, _) = expand_with_base(cand, pc.n, slot * bank_width)?;
        gates.extend(expanded);
    }
    Ok(AssembledCircuit {
        gates,
        param_count: pc.slots() * bank_width,
        encoding_len,
        n: pc.n,
    })
}

/// Gather the contiguous fine-tuning theta for `arch` out of the bank.
pub fn bank_to_contiguous(
    pc: &PlaceholderCircuit,
    pool: &OperationPool,
    arch: &ArchAssignment,
    bank: &[f64],
    bank_width: usize,
) -> Result<Vec<f64>> {
    arch.validate(pc, pool)?;
    let mut theta = Vec::new();
    for (slot, &choice) in arch.0.iter().enumerate() {
        let take = pool.candidate(choice).param_count();
        let base = slot * bank_width;
        if base + take > bank.len() {
            return Err(Error::ShapeMismatch {
                expected: base + take,
                got: bank.len(),
            });
        }
        theta.extend_from_slice(&bank[base..base + take]);
    }
    Ok(theta)
}

/// Count non-identity gate instructions, encoding included.
pub fn gate_count(gates: &[GateInstr]) -> usize {
    gates
        .iter()
        .filter(|g| g.kind != GateKind::Identity)
        .count()
}

/// The manually designed comparator circuit: encoding block plus two
/// layers of ry on every qubit followed by a cnot chain, 23 gates and 10
/// parameters at five qubits. Reconstructed from a hardware-efficient
/// layout; the pinned property is the 23-gate count.
pub fn baseline_circuit(n: usize) -> AssembledCircuit {
    let mut gates = encoding_block(n);
    let encoding_len = gates.len();
    let mut slot = 0;
    for _layer in 0..2 {
        for q in 0..n {
            gates.push(GateInstr::slotted(GateKind::Ry, vec![q], vec![slot]));
            slot += 1;
        }
        for q in 0..n - 1 {
            gates.push(GateInstr::cnot(q, q + 1));
        }
    }
    AssembledCircuit {
        gates,
        param_count: slot,
        encoding_len,
        n,
    }
}

/// Serialized form of one placeholder choice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateSpec {
    pub gate_kind: String,
    pub working_range: Vec<usize>,
}

/// Serialize an architecture as a list of `{gate_kind, working_range}`
/// entries, one per placeholder slot.
pub fn arch_to_specs(pool: &OperationPool, arch: &ArchAssignment) -> Vec<CandidateSpec> {
    arch.0
        .iter()
        .map(|&c| {
            let cand = pool.candidate(c);
            CandidateSpec {
                gate_kind: cand.kind.name().to_string(),
                working_range: cand.working_range.clone(),
            }
        })
        .collect()
}

/// Resolve serialized placeholder choices back to pool indices.
pub fn arch_from_specs(pool: &OperationPool, specs: &[CandidateSpec]) -> Result<ArchAssignment> {
    let mut indices = Vec::with_capacity(specs.len());
    for spec in specs {
        let kind = GateKind::parse(&spec.gate_kind)?;
        let cand = OpCandidate::new(kind, spec.working_range.clone());
        let idx = pool.position(&cand).ok_or_else(|| {
            Error::InvalidArchitecture(format!(
                "candidate {} {:?} not in pool",
                spec.gate_kind, spec.working_range
            ))
        })?;
        indices.push(idx);
    }
    Ok(ArchAssignment(indices))
}

/// Text diagram of a circuit, one row per qubit and one column per gate.
pub fn render_diagram(circuit: &AssembledCircuit) -> String {
    let width = 11;
    let dashes = "-".repeat(width);
    let cols: Vec<Vec<String>> = circuit
        .gates
        .iter()
        .map(|g| {
            let mut col = vec![dashes.clone(); circuit.n];
            match g.kind {
                GateKind::Cnot => {
                    col[g.targets[0]] = format!("{:-^width$}", "o");
                    col[g.targets[1]] = format!("{:-^width$}", "X");
                }
                GateKind::Cz => {
                    col[g.targets[0]] = format!("{:-^width$}", "o");
                    col[g.targets[1]] = format!("{:-^width$}", "Z");
                }
                GateKind::Identity => {}
                kind => {
                    let label = if g.param_slots.is_empty() {
                        format!("{}({:.2})", kind.name().to_uppercase(), g.params[0])
                    } else {
                        format!(
                            "{}[{}]",
                            kind.name().to_uppercase(),
                            g.param_slots
                                .iter()
                                .map(usize::to_string)
                                .collect::<Vec<_>>()
                                .join(",")
                        )
                    };
                    col[g.targets[0]] = format!("{label:-^width$}");
                }
            }
            col
        })
        .collect();

    let mut out = String::new();
    for q in 0..circuit.n {
        write!(out, "q{q}: ").unwrap();
        for col in &cols {
            out.push_str(&col[q]);
        }
        out.push('\n');
    }
    out
}
