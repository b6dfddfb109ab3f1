//! QUBO compilation and presolve.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::bits::Bitstring;
use crate::error::{Error, Result};
use crate::jssp::instance::{JsspInstance, Occupant, PenaltyWeights};

/// Largest variable count `build_qubo` accepts.
pub const VARIABLE_BUDGET: usize = 4096;

/// A binary decision variable of the scheduling QUBO.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum VarId {
    /// Job `job` on machine `machine` at slot `time` (all 0-based).
    X {
        machine: usize,
        job: usize,
        time: usize,
    },
    /// Dummy job on machine `machine` at slot `time`.
    Y { machine: usize, time: usize },
}

/// A quadratic binary objective in coefficient form.
///
/// The diagonal Hamiltonian it represents assigns basis state |b> the
/// eigenvalue `Q(b)`; measured `|1>` maps to binary 1.
#[derive(Debug, Clone, PartialEq)]
pub struct QuboProblem {
    vars: Vec<VarId>,
    index: BTreeMap<VarId, usize>,
    linear: Vec<f64>,
    quadratic: BTreeMap<(usize, usize), f64>,
    offset: f64,
    /// Variables substituted out by presolve, with their forced values.
    fixings: BTreeMap<VarId, bool>,
}

impl QuboProblem {
    fn new(vars: Vec<VarId>) -> Self {
        let index = vars.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let n = vars.len();
        Self {
            vars,
            index,
            linear: vec![0.0; n],
            quadratic: BTreeMap::new(),
            offset: 0.0,
            fixings: BTreeMap::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    /// Bit position -> variable id, the qubit order used downstream.
    pub fn variables(&self) -> &[VarId] {
        &self.vars
    }

    pub fn bit_of(&self, var: VarId) -> Option<usize> {
        self.index.get(&var).copied()
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn linear(&self) -> &[f64] {
        &self.linear
    }

    pub fn quadratic(&self) -> &BTreeMap<(usize, usize), f64> {
        &self.quadratic
    }

    /// Presolve fixings folded into this problem (empty before presolve).
    pub fn fixings(&self) -> &BTreeMap<VarId, bool> {
        &self.fixings
    }

    /// Assemble a problem directly from coefficients, with synthetic
    /// variable ids. Meant for engine tests and external QUBO tooling;
    /// scheduling semantics (decode/encode) need a real instance.
    pub fn from_parts(
        num_vars: usize,
        offset: f64,
        linear: Vec<f64>,
        quadratic: Vec<(usize, usize, f64)>,
    ) -> Result<Self> {
        if linear.len() != num_vars {
            return Err(Error::ShapeMismatch {
                expected: num_vars,
                got: linear.len(),
            });
        }
        let vars: Vec<VarId> = (0..num_vars)
            .map(|i| VarId::X {
                machine: 0,
                job: 0,
                time: i,
            })
            .collect();
        let mut qubo = Self::new(vars);
        qubo.offset = offset;
        qubo.linear = linear;
        for (a, b, c) in quadratic {
            if a >= num_vars || b >= num_vars || a == b {
                return Err(Error::InvalidInstance(format!(
                    "bad quadratic pair ({a}, {b})"
                )));
            }
            qubo.add_quadratic(a, b, c);
        }
        Ok(qubo)
    }

    /// Value of a variable under `bits`, looking through presolve fixings.
    pub fn value_of(&self, var: VarId, bits: &Bitstring) -> Option<bool> {
        if let Some(&fixed) = self.fixings.get(&var) {
            return Some(fixed);
        }
        self.index.get(&var).map(|&i| bits.bit(i))
    }

    fn add_linear(&mut self, var: usize, coeff: f64) {
        self.linear[var] += coeff;
    }

    fn add_quadratic(&mut self, a: usize, b: usize, coeff: f64) {
        debug_assert_ne!(a, b);
        let key = (a.min(b), a.max(b));
        *self.quadratic.entry(key).or_insert(0.0) += coeff;
    }

    /// Add `weight * (sum(vars) - 1)^2` expanded over binary variables.
    fn add_one_hot_penalty(&mut self, members: &[usize], weight: f64) {
        self.offset += weight;
        for (i, &a) in members.iter().enumerate() {
            self.add_linear(a, -weight);
            for &b in &members[i + 1..] {
                self.add_quadratic(a, b, 2.0 * weight);
            }
        }
    }

    /// Energy at a bitstring over the free variables.
    pub fn energy(&self, bits: &Bitstring) -> Result<f64> {
        if bits.len() != self.vars.len() {
            return Err(Error::LengthMismatch {
                expected: self.vars.len(),
                got: bits.len(),
            });
        }
        Ok(self.energy_of_index(bits.index()))
    }

    /// Energy at a packed basis-state index (bit `i` = variable `i`).
    pub fn energy_of_index(&self, index: u64) -> f64 {
        let mut e = self.offset;
        for (i, &c) in self.linear.iter().enumerate() {
            if (index >> i) & 1 == 1 {
                e += c;
            }
        }
        for (&(a, b), &c) in &self.quadratic {
            if (index >> a) & 1 == 1 && (index >> b) & 1 == 1 {
                e += c;
            }
        }
        e
    }

    /// Energies of all basis states, for small problems.
    pub fn energy_table(&self) -> Result<Vec<f64>> {
        if self.vars.len() > super::ENUMERATION_BUDGET {
            return Err(Error::EnumerationBudget {
                n: self.vars.len(),
                max: super::ENUMERATION_BUDGET,
            });
        }
        Ok((0..1u64 << self.vars.len())
            .map(|idx| self.energy_of_index(idx))
            .collect())
    }
}

/// Pure-function alias for [`QuboProblem::energy`].
pub fn evaluate_energy(qubo: &QuboProblem, bits: &Bitstring) -> Result<f64> {
    qubo.energy(bits)
}

/// Compile an instance into its full (un-presolved) QUBO.
pub fn build_qubo(instance: &JsspInstance, weights: &PenaltyWeights) -> Result<QuboProblem> {
    weights.validate()?;

    let mut vars = Vec::new();
    for m in 0..instance.num_machines() {
        let horizon = instance.horizon(m);
        for j in instance.jobs_on_machine(m) {
            for t in 0..horizon {
                vars.push(VarId::X {
                    machine: m,
                    job: j,
                    time: t,
                });
            }
        }
        for &t in instance.idle_positions(m) {
            vars.push(VarId::Y { machine: m, time: t });
        }
    }
    vars.sort_unstable();
    if vars.len() > VARIABLE_BUDGET {
        return Err(Error::VariableBudget {
            needed: vars.len(),
            budget: VARIABLE_BUDGET,
        });
    }

    let mut qubo = QuboProblem::new(vars);
    let bit = |qubo: &QuboProblem, var: VarId| -> usize {
        qubo.bit_of(var).expect("variable enumerated above")
    };

    // Cost: linear tardiness on each job's final machine.
    for j in 0..instance.num_jobs() {
        let m = instance.final_machine(j);
        for t in 0..instance.horizon(m) {
            let cost = instance.tardiness(j, t);
            if cost != 0.0 {
                let v = bit(&qubo, VarId::X { machine: m, job: j, time: t });
                qubo.add_linear(v, cost);
            }
        }
    }

    // a1: each job placed exactly once per machine it visits.
    for m in 0..instance.num_machines() {
        let horizon = instance.horizon(m);
        for j in instance.jobs_on_machine(m) {
            let members: Vec<usize> = (0..horizon)
                .map(|t| bit(&qubo, VarId::X { machine: m, job: j, time: t }))
                .collect();
            qubo.add_one_hot_penalty(&members, weights.a1);
        }
    }

    // a2: each slot holds exactly one real-or-dummy job.
    for m in 0..instance.num_machines() {
        for t in 0..instance.horizon(m) {
            let mut members: Vec<usize> = instance
                .jobs_on_machine(m)
                .into_iter()
                .map(|j| bit(&qubo, VarId::X { machine: m, job: j, time: t }))
                .collect();
            if instance.idle_positions(m).contains(&t) {
                members.push(bit(&qubo, VarId::Y { machine: m, time: t }));
            }
            qubo.add_one_hot_penalty(&members, weights.a2);
        }
    }

    // a3: process order between consecutive machines of each job; starting
    // on the next machine no later than on the previous one is penalized.
    for j in 0..instance.num_jobs() {
        let order = instance.processing_order(j);
        for pair in order.windows(2) {
            let (ma, mb) = (pair[0], pair[1]);
            for t in 0..instance.horizon(ma) {
                let va = bit(&qubo, VarId::X { machine: ma, job: j, time: t });
                for tp in 0..=t.min(instance.horizon(mb).saturating_sub(1)) {
                    let vb = bit(&qubo, VarId::X { machine: mb, job: j, time: tp });
                    qubo.add_quadratic(va, vb, weights.a3);
                }
            }
        }
    }

    // a4: idle slots contiguous from the start of the horizon, machines
    // 2..M, over positions where both dummy variables exist.
    for m in 1..instance.num_machines() {
        let idle = instance.idle_slots(m);
        for t in 0..idle.saturating_sub(1) {
            let has = |time: usize| instance.idle_positions(m).contains(&time);
            if has(t) && has(t + 1) {
                let y0 = bit(&qubo, VarId::Y { machine: m, time: t });
                let y1 = bit(&qubo, VarId::Y { machine: m, time: t + 1 });
                // y1 * (1 - y0) = y1 - y0*y1
                qubo.add_linear(y1, weights.a4);
                qubo.add_quadratic(y0, y1, -weights.a4);
            }
        }
    }

    Ok(qubo)
}

/// One-hot constraint rows used by presolve propagation.
fn constraint_rows(instance: &JsspInstance) -> Vec<Vec<VarId>> {
    let mut rows = Vec::new();
    for m in 0..instance.num_machines() {
        let horizon = instance.horizon(m);
        for j in instance.jobs_on_machine(m) {
            rows.push(
                (0..horizon)
                    .map(|t| VarId::X { machine: m, job: j, time: t })
                    .collect(),
            );
        }
        for t in 0..horizon {
            let mut row: Vec<VarId> = instance
                .jobs_on_machine(m)
                .into_iter()
                .map(|j| VarId::X { machine: m, job: j, time: t })
                .collect();
            if instance.idle_positions(m).contains(&t) {
                row.push(VarId::Y { machine: m, time: t });
            }
            rows.push(row);
        }
    }
    rows
}

/// Substitute out variables forced by the fixed assignments.
///
/// Propagation closes over three rules until fixpoint:
/// one-hot rows with a member fixed to 1 force the rest to 0; one-hot rows
/// with all but one member fixed to 0 force the survivor to 1; a job fixed
/// at slot `t` on one machine rules out slots `<= t` on the next machine
/// of its processing order (and symmetrically rules out late slots on the
/// previous machine). Conflicting forcings surface as infeasibility.
/// Energies of assignments consistent with the fixings are unchanged.
pub fn presolve(instance: &JsspInstance, qubo: &QuboProblem) -> Result<QuboProblem> {
    if instance.fixed_assignments().is_empty() {
        return Ok(qubo.clone());
    }
    let mut fixed: BTreeMap<VarId, bool> = BTreeMap::new();
    let force = |map: &mut BTreeMap<VarId, bool>, var: VarId, value: bool| -> Result<bool> {
        match map.get(&var) {
            Some(&old) if old != value => Err(Error::Infeasible(format!(
                "variable {var:?} forced to both values"
            ))),
            Some(_) => Ok(false),
            None => {
                map.insert(var, value);
                Ok(true)
            }
        }
    };

    for f in instance.fixed_assignments() {
        let var = match f.occupant {
            Occupant::Job(j) => VarId::X {
                machine: f.machine,
                job: j,
                time: f.time,
            },
            Occupant::Dummy => VarId::Y {
                machine: f.machine,
                time: f.time,
            },
        };
        force(&mut fixed, var, true)?;
    }

    let rows = constraint_rows(instance);
    loop {
        let mut changed = false;

        for row in &rows {
            let ones: Vec<&VarId> = row
                .iter()
                .filter(|v| fixed.get(v) == Some(&true))
                .collect();
            if ones.len() > 1 {
                return Err(Error::Infeasible(
                    "two occupants forced into one constraint row".into(),
                ));
            }
            if ones.len() == 1 {
                for v in row {
                    if fixed.get(v) != Some(&true) {
                        changed |= force(&mut fixed, *v, false)?;
                    }
                }
                continue;
            }
            let unfixed: Vec<&VarId> = row.iter().filter(|v| !fixed.contains_key(v)).collect();
            if unfixed.is_empty() {
                return Err(Error::Infeasible(
                    "constraint row with every member forced to 0".into(),
                ));
            }
            if unfixed.len() == 1 {
                changed |= force(&mut fixed, *unfixed[0], true)?;
            }
        }

        // Order windows against fixed placements.
        for j in 0..instance.num_jobs() {
            let order = instance.processing_order(j);
            for pair in order.windows(2) {
                let (ma, mb) = (pair[0], pair[1]);
                for t in 0..instance.horizon(ma) {
                    if fixed.get(&VarId::X { machine: ma, job: j, time: t }) == Some(&true) {
                        for tp in 0..=t.min(instance.horizon(mb).saturating_sub(1)) {
                            changed |=
                                force(&mut fixed, VarId::X { machine: mb, job: j, time: tp }, false)?;
                        }
                    }
                }
                for tp in 0..instance.horizon(mb) {
                    if fixed.get(&VarId::X { machine: mb, job: j, time: tp }) == Some(&true) {
                        for t in tp..instance.horizon(ma) {
                            changed |=
                                force(&mut fixed, VarId::X { machine: ma, job: j, time: t }, false)?;
                        }
                    }
                }
            }
        }

        if !changed {
            break;
        }
    }

    if fixed.is_empty() {
        return Ok(qubo.clone());
    }

    // Substitute the fixings into the coefficient form.
    let survivors: Vec<VarId> = qubo
        .vars
        .iter()
        .copied()
        .filter(|v| !fixed.contains_key(v))
        .collect();
    let mut reduced = QuboProblem::new(survivors);
    reduced.offset = qubo.offset;

    let value = |v: VarId| -> Option<f64> { fixed.get(&v).map(|&b| f64::from(u8::from(b))) };

    for (i, &coeff) in qubo.linear.iter().enumerate() {
        if coeff == 0.0 {
            continue;
        }
        let var = qubo.vars[i];
        match value(var) {
            Some(val) => reduced.offset += coeff * val,
            None => {
                let ni = reduced.bit_of(var).expect("survivor");
                reduced.add_linear(ni, coeff);
            }
        }
    }
    for (&(a, b), &coeff) in &qubo.quadratic {
        if coeff == 0.0 {
            continue;
        }
        let (va, vb) = (qubo.vars[a], qubo.vars[b]);
        match (value(va), value(vb)) {
            (Some(x), Some(y)) => reduced.offset += coeff * x * y,
            (Some(x), None) => {
                if x != 0.0 {
                    let ni = reduced.bit_of(vb).expect("survivor");
                    reduced.add_linear(ni, coeff * x);
                }
            }
            (None, Some(y)) => {
                if y != 0.0 {
                    let ni = reduced.bit_of(va).expect("survivor");
                    reduced.add_linear(ni, coeff * y);
                }
            }
            (None, None) => {
                let na = reduced.bit_of(va).expect("survivor");
                let nb = reduced.bit_of(vb).expect("survivor");
                reduced.add_quadratic(na, nb, coeff);
            }
        }
    }

    reduced.fixings = fixed;
    Ok(reduced)
}

/// Stable text export: `N`, `offset`, then sorted `i j coeff` lines with
/// `i == j` for linear terms. Zero coefficients are skipped.
pub fn write_qubo_text(qubo: &QuboProblem) -> String {
    let mut out = String::new();
    writeln!(out, "N {}", qubo.num_vars()).unwrap();
    writeln!(out, "offset {}", qubo.offset()).unwrap();
    let mut lines: Vec<(usize, usize, f64)> = Vec::new();
    for (i, &c) in qubo.linear.iter().enumerate() {
        if c != 0.0 {
            lines.push((i, i, c));
        }
    }
    for (&(a, b), &c) in &qubo.quadratic {
        if c != 0.0 {
            lines.push((a, b, c));
        }
    }
    lines.sort_by_key(|&(i, j, _)| (i, j));
    for (i, j, c) in lines {
        writeln!(out, "{i} {j} {c}").unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jssp::instance::desk_instance;

    fn degenerate_instance() -> JsspInstance {
        JsspInstance::new(1, 1, None, vec![0], None, vec![1], None, Vec::new(), 1.0).unwrap()
    }

    #[test]
    fn degenerate_single_variable() {
        let inst = degenerate_instance();
        let w = PenaltyWeights {
            a1: 2.0,
            a2: 3.0,
            a3: 5.0,
            a4: 7.0,
        };
        let qubo = build_qubo(&inst, &w).unwrap();
        assert_eq!(qubo.num_vars(), 1);
        let q1 = qubo.energy(&Bitstring::from_text("1").unwrap()).unwrap();
        let q0 = qubo.energy(&Bitstring::from_text("0").unwrap()).unwrap();
        assert_eq!(q1, 0.0);
        assert_eq!(q0, w.a1 + w.a2);
    }

    #[test]
    fn all_zeros_energy_is_penalty_floor() {
        let inst = JsspInstance::new(
            2,
            3,
            None,
            vec![1, 2],
            None,
            vec![1, 2, 3],
            None,
            Vec::new(),
            1.0,
        )
        .unwrap();
        let w = PenaltyWeights::uniform(4.0);
        let qubo = build_qubo(&inst, &w).unwrap();
        let zeros = Bitstring::zeros(qubo.num_vars());
        let horizon_sum: usize = (0..2).map(|m| inst.horizon(m)).sum();
        let expected = w.a1 * 2.0 * 3.0 + w.a2 * horizon_sum as f64;
        assert_eq!(qubo.energy(&zeros).unwrap(), expected);
    }

    #[test]
    fn rejects_non_positive_weights() {
        let inst = degenerate_instance();
        let w = PenaltyWeights {
            a1: 0.0,
            a2: 1.0,
            a3: 1.0,
            a4: 1.0,
        };
        assert!(build_qubo(&inst, &w).is_err());
    }

    #[test]
    fn presolve_without_fixings_is_identity() {
        let inst = degenerate_instance();
        let qubo = build_qubo(&inst, &inst.default_weights()).unwrap();
        let same = presolve(&inst, &qubo).unwrap();
        assert_eq!(qubo, same);
    }

    #[test]
    fn desk_instance_reduces_to_five_variables() {
        let d5 = desk_instance();
        let qubo = build_qubo(&d5, &d5.default_weights()).unwrap();
        assert_eq!(qubo.num_vars(), 14); // 2 jobs x 5 slots + 4 eligible dummy slots
        let reduced = presolve(&d5, &qubo).unwrap();
        assert_eq!(reduced.num_vars(), 5);
        let expected: Vec<VarId> = vec![
            VarId::X { machine: 0, job: 0, time: 1 },
            VarId::X { machine: 0, job: 0, time: 2 },
            VarId::X { machine: 0, job: 1, time: 1 },
            VarId::X { machine: 0, job: 1, time: 2 },
            VarId::Y { machine: 0, time: 1 },
        ];
        assert_eq!(reduced.variables(), expected.as_slice());
    }

    #[test]
    fn presolve_fixing_a_job_clears_its_row_and_column() {
        // Two jobs, two slots, no idles: fixing job 0 at slot 0 decides
        // everything by propagation.
        let inst = JsspInstance::new(
            1,
            2,
            None,
            vec![0],
            None,
            vec![1, 2],
            None,
            vec![crate::jssp::FixedAssignment {
                machine: 0,
                occupant: Occupant::Job(0),
                time: 0,
            }],
            1.0,
        )
        .unwrap();
        let qubo = build_qubo(&inst, &inst.default_weights()).unwrap();
        let reduced = presolve(&inst, &qubo).unwrap();
        assert_eq!(reduced.num_vars(), 0);
        assert_eq!(reduced.fixings().len(), 4);
        assert!(reduced.fixings()[&VarId::X { machine: 0, job: 1, time: 1 }]);
        // The fully propagated schedule is feasible and on time.
        assert_eq!(reduced.offset(), 0.0);
    }

    #[test]
    fn presolve_detects_infeasible_fixings() {
        let inst = JsspInstance::new(
            1,
            2,
            None,
            vec![0],
            None,
            vec![1, 2],
            None,
            vec![
                crate::jssp::FixedAssignment {
                    machine: 0,
                    occupant: Occupant::Job(0),
                    time: 0,
                },
                crate::jssp::FixedAssignment {
                    machine: 0,
                    occupant: Occupant::Job(1),
                    time: 0,
                },
            ],
            1.0,
        )
        .unwrap();
        let qubo = build_qubo(&inst, &inst.default_weights()).unwrap();
        assert!(matches!(presolve(&inst, &qubo), Err(Error::Infeasible(_))));
    }

    #[test]
    fn energy_is_deterministic() {
        let d5 = desk_instance();
        let qubo = build_qubo(&d5, &d5.default_weights()).unwrap();
        let bits = Bitstring::from_index(0b1010101, qubo.num_vars());
        assert_eq!(qubo.energy(&bits).unwrap(), qubo.energy(&bits).unwrap());
    }

    #[test]
    fn energy_rejects_length_mismatch() {
        let d5 = desk_instance();
        let qubo = build_qubo(&d5, &d5.default_weights()).unwrap();
        let bits = Bitstring::zeros(qubo.num_vars() + 1);
        assert!(matches!(
            qubo.energy(&bits),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn export_is_stable() {
        let inst = degenerate_instance();
        let w = PenaltyWeights {
            a1: 2.0,
            a2: 3.0,
            a3: 5.0,
            a4: 7.0,
        };
        let qubo = build_qubo(&inst, &w).unwrap();
        let text = write_qubo_text(&qubo);
        assert_eq!(text, "N 1\noffset 5\n0 0 -5\n");
    }
}
