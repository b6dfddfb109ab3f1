//! Decoding bitstrings back into timetables.

use std::collections::BTreeMap;
use std::fmt;

use crate::bits::Bitstring;
use crate::error::{Error, Result};
use crate::jssp::instance::JsspInstance;
use crate::jssp::qubo::{QuboProblem, VarId};

/// What a decoded slot holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlotContent {
    Empty,
    Dummy,
    /// A single job, by label.
    Job(u32),
    /// More than one occupant claimed the slot.
    Conflict,
}

/// Per-family feasibility, mirroring the four penalty terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeasibilityFlags {
    /// Every job placed exactly once per machine it visits.
    pub job_assignment: bool,
    /// Every slot holds exactly one real-or-dummy job.
    pub slot_occupancy: bool,
    /// No job starts on a later machine at or before its earlier slot.
    pub process_order: bool,
    /// Idle slots contiguous where the contiguity term applies.
    pub idle_contiguity: bool,
}

impl FeasibilityFlags {
    pub fn all(&self) -> bool {
        self.job_assignment && self.slot_occupancy && self.process_order && self.idle_contiguity
    }
}

/// A decoded timetable with feasibility flags and tardiness cost.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    /// `(machine, slot)` -> content, 0-based, every slot present.
    pub assignment: BTreeMap<(usize, usize), SlotContent>,
    pub flags: FeasibilityFlags,
    pub cost: f64,
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut current = usize::MAX;
        for (&(m, t), content) in &self.assignment {
            if m != current {
                if current != usize::MAX {
                    writeln!(f)?;
                }
                write!(f, "machine {}:", m + 1)?;
                current = m;
            }
            let _ = t;
            match content {
                SlotContent::Empty => write!(f, " .")?,
                SlotContent::Dummy => write!(f, " -")?,
                SlotContent::Job(label) => write!(f, " {label}")?,
                SlotContent::Conflict => write!(f, " !")?,
            }
        }
        Ok(())
    }
}

impl Schedule {
    /// 0-based slot of a job on a machine, if uniquely placed.
    pub fn slot_of(&self, machine: usize, job_label: u32) -> Option<usize> {
        self.assignment.iter().find_map(|(&(m, t), &c)| {
            (m == machine && c == SlotContent::Job(job_label)).then_some(t)
        })
    }
}

/// Map a bitstring through the variable index (plus presolve fixings)
/// into a timetable. Infeasible strings come back with flags cleared,
/// never as errors.
pub fn decode_schedule(
    instance: &JsspInstance,
    qubo: &QuboProblem,
    bits: &Bitstring,
) -> Result<Schedule> {
    if bits.len() != qubo.num_vars() {
        return Err(Error::LengthMismatch {
            expected: qubo.num_vars(),
            got: bits.len(),
        });
    }
    let value = |var: VarId| qubo.value_of(var, bits).unwrap_or(false);

    let mut assignment = BTreeMap::new();
    let mut job_assignment = true;
    let mut slot_occupancy = true;
    let mut process_order = true;
    let mut idle_contiguity = true;
    let mut cost = 0.0;

    for m in 0..instance.num_machines() {
        let jobs = instance.jobs_on_machine(m);
        for t in 0..instance.horizon(m) {
            let mut occupants = 0usize;
            let mut content = SlotContent::Empty;
            for &j in &jobs {
                if value(VarId::X { machine: m, job: j, time: t }) {
                    occupants += 1;
                    content = SlotContent::Job(instance.job_label(j));
                }
            }
            if instance.idle_positions(m).contains(&t)
                && value(VarId::Y { machine: m, time: t })
            {
                occupants += 1;
                if content == SlotContent::Empty {
                    content = SlotContent::Dummy;
                }
            }
            if occupants != 1 {
                slot_occupancy = false;
                if occupants > 1 {
                    content = SlotContent::Conflict;
                }
            }
            assignment.insert((m, t), content);
        }

        for &j in &jobs {
            let placements = (0..instance.horizon(m))
                .filter(|&t| value(VarId::X { machine: m, job: j, time: t }))
                .count();
            if placements != 1 {
                job_assignment = false;
            }
        }
    }

    for j in 0..instance.num_jobs() {
        let order = instance.processing_order(j);
        for pair in order.windows(2) {
            let (ma, mb) = (pair[0], pair[1]);
            for t in 0..instance.horizon(ma) {
                if !value(VarId::X { machine: ma, job: j, time: t }) {
                    continue;
                }
                for tp in 0..=t.min(instance.horizon(mb).saturating_sub(1)) {
                    if value(VarId::X { machine: mb, job: j, time: tp }) {
                        process_order = false;
                    }
                }
            }
        }
        let m = instance.final_machine(j);
        for t in 0..instance.horizon(m) {
            if value(VarId::X { machine: m, job: j, time: t }) {
                cost += instance.tardiness(j, t);
            }
        }
    }

    for m in 1..instance.num_machines() {
        let idle = instance.idle_slots(m);
        for t in 0..idle.saturating_sub(1) {
            let has = |time: usize| instance.idle_positions(m).contains(&time);
            if has(t) && has(t + 1) {
                let y0 = value(VarId::Y { machine: m, time: t });
                let y1 = value(VarId::Y { machine: m, time: t + 1 });
                if y1 && !y0 {
                    idle_contiguity = false;
                }
            }
        }
    }

    Ok(Schedule {
        assignment,
        flags: FeasibilityFlags {
            job_assignment,
            slot_occupancy,
            process_order,
            idle_contiguity,
        },
        cost,
    })
}

/// Re-encode a timetable into the free-variable bitstring. Slots covered
/// by presolve fixings are checked for consistency.
pub fn encode_schedule(
    instance: &JsspInstance,
    qubo: &QuboProblem,
    schedule: &Schedule,
) -> Result<Bitstring> {
    let mut bits = Bitstring::zeros(qubo.num_vars());
    for (&(m, t), &content) in &schedule.assignment {
        let var = match content {
            SlotContent::Job(label) => {
                let j = instance.job_by_label(label).ok_or_else(|| {
                    Error::InvalidInstance(format!("unknown job label {label}"))
                })?;
                VarId::X { machine: m, job: j, time: t }
            }
            SlotContent::Dummy => VarId::Y { machine: m, time: t },
            SlotContent::Empty => continue,
            SlotContent::Conflict => {
                return Err(Error::InvalidInstance(
                    "cannot encode a conflicted slot".into(),
                ))
            }
        };
        match qubo.bit_of(var) {
            Some(i) => bits.set_bit(i, true),
            None => {
                if qubo.fixings().get(&var) != Some(&true) {
                    return Err(Error::Infeasible(format!(
                        "slot content contradicts presolve fixing at {var:?}"
                    )));
                }
            }
        }
    }
    Ok(bits)
}
