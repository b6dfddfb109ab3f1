//! Instance model and its JSON form.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Constraint weights `a1..a4` balancing the four penalty families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenaltyWeights {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a4: f64,
}

impl PenaltyWeights {
    pub fn uniform(a: f64) -> Self {
        Self {
            a1: a,
            a2: a,
            a3: a,
            a4: a,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for a in [self.a1, self.a2, self.a3, self.a4] {
            if a <= 0.0 || !a.is_finite() {
                return Err(Error::NonPositiveWeight(a));
            }
        }
        Ok(())
    }
}

/// What a fixed assignment puts into a slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Occupant {
    /// A real job, by 0-based job index.
    Job(usize),
    /// A dummy job marking the slot idle.
    Dummy,
}

/// A pre-decided `(machine, occupant, time)` triple, 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FixedAssignment {
    pub machine: usize,
    pub occupant: Occupant,
    pub time: usize,
}

/// A job-shop scheduling instance.
///
/// All indices are 0-based internally; the JSON form is 1-based for
/// machines and time slots and uses job labels.
#[derive(Debug, Clone, PartialEq)]
pub struct JsspInstance {
    num_machines: usize,
    num_jobs: usize,
    job_labels: Vec<u32>,
    idle_slots: Vec<usize>,
    /// Idle-eligible slot positions per machine (0-based), where dummy-job
    /// variables exist. Defaults to the first `i_m` slots; may list more
    /// positions than `i_m` when floating idles need room.
    idle_positions: Vec<Vec<usize>>,
    due_times: Vec<usize>,
    processing_orders: Vec<Vec<usize>>,
    fixed: Vec<FixedAssignment>,
    tardiness_weight: f64,
}

impl JsspInstance {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        num_machines: usize,
        num_jobs: usize,
        job_labels: Option<Vec<u32>>,
        idle_slots: Vec<usize>,
        idle_positions: Option<Vec<Vec<usize>>>,
        due_times: Vec<usize>,
        processing_orders: Option<Vec<Vec<usize>>>,
        fixed: Vec<FixedAssignment>,
        tardiness_weight: f64,
    ) -> Result<Self> {
        let job_labels =
            job_labels.unwrap_or_else(|| (1..=num_jobs as u32).collect::<Vec<_>>());
        let idle_positions = idle_positions.unwrap_or_else(|| {
            idle_slots
                .iter()
                .map(|&count| (0..count).collect())
                .collect()
        });
        let processing_orders = processing_orders
            .unwrap_or_else(|| vec![(0..num_machines).collect(); num_jobs]);
        let instance = Self {
            num_machines,
            num_jobs,
            job_labels,
            idle_slots,
            idle_positions,
            due_times,
            processing_orders,
            fixed,
            tardiness_weight,
        };
        instance.validate()?;
        Ok(instance)
    }

    fn validate(&self) -> Result<()> {
        if self.num_machines == 0 {
            return Err(Error::InvalidInstance("need at least one machine".into()));
        }
        if self.num_jobs == 0 {
            return Err(Error::InvalidInstance("need at least one job".into()));
        }
        if self.job_labels.len() != self.num_jobs {
            return Err(Error::InvalidInstance(format!(
                "{} job labels for {} jobs",
                self.job_labels.len(),
                self.num_jobs
            )));
        }
        if self.idle_slots.len() != self.num_machines {
            return Err(Error::InvalidInstance(format!(
                "{} idle-slot counts for {} machines",
                self.idle_slots.len(),
                self.num_machines
            )));
        }
        if self.idle_positions.len() != self.num_machines {
            return Err(Error::InvalidInstance(
                "idle_positions must list every machine".into(),
            ));
        }
        if self.due_times.len() != self.num_jobs {
            return Err(Error::InvalidInstance(format!(
                "{} due times for {} jobs",
                self.due_times.len(),
                self.num_jobs
            )));
        }
        if self.processing_orders.len() != self.num_jobs {
            return Err(Error::InvalidInstance(
                "processing_orders must list every job".into(),
            ));
        }
        if self.tardiness_weight <= 0.0 {
            return Err(Error::InvalidInstance(
                "tardiness weight must be positive".into(),
            ));
        }
        for (j, order) in self.processing_orders.iter().enumerate() {
            if order.is_empty() {
                return Err(Error::InvalidInstance(format!(
                    "job {} visits no machine",
                    self.job_labels[j]
                )));
            }
            let mut seen = vec![false; self.num_machines];
            for &m in order {
                if m >= self.num_machines {
                    return Err(Error::InvalidInstance(format!(
                        "job {} visits unknown machine {}",
                        self.job_labels[j],
                        m + 1
                    )));
                }
                if seen[m] {
                    return Err(Error::InvalidInstance(format!(
                        "job {} visits machine {} twice",
                        self.job_labels[j],
                        m + 1
                    )));
                }
                seen[m] = true;
            }
        }
        for m in 0..self.num_machines {
            let horizon = self.horizon(m);
            for &t in &self.idle_positions[m] {
                if t >= horizon {
                    return Err(Error::InvalidInstance(format!(
                        "idle position {} outside horizon {} of machine {}",
                        t + 1,
                        horizon,
                        m + 1
                    )));
                }
            }
            let mut sorted = self.idle_positions[m].clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != self.idle_positions[m].len() {
                return Err(Error::InvalidInstance(format!(
                    "duplicate idle positions on machine {}",
                    m + 1
                )));
            }
        }
        for f in &self.fixed {
            if f.machine >= self.num_machines {
                return Err(Error::InvalidInstance(format!(
                    "fixed assignment on unknown machine {}",
                    f.machine + 1
                )));
            }
            let horizon = self.horizon(f.machine);
            if f.time >= horizon {
                return Err(Error::InvalidInstance(format!(
                    "fixed assignment at slot {} outside horizon {} of machine {}",
                    f.time + 1,
                    horizon,
                    f.machine + 1
                )));
            }
            match f.occupant {
                Occupant::Job(j) => {
                    if j >= self.num_jobs {
                        return Err(Error::InvalidInstance(format!(
                            "fixed assignment for unknown job index {j}"
                        )));
                    }
                    if !self.processing_orders[j].contains(&f.machine) {
                        return Err(Error::InvalidInstance(format!(
                            "job {} never visits machine {}",
                            self.job_labels[j],
                            f.machine + 1
                        )));
                    }
                }
                Occupant::Dummy => {
                    if !self.idle_positions[f.machine].contains(&f.time) {
                        return Err(Error::InvalidInstance(format!(
                            "slot {} on machine {} is not idle-eligible",
                            f.time + 1,
                            f.machine + 1
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn num_machines(&self) -> usize {
        self.num_machines
    }

    pub fn num_jobs(&self) -> usize {
        self.num_jobs
    }

    pub fn job_label(&self, job: usize) -> u32 {
        self.job_labels[job]
    }

    pub fn job_by_label(&self, label: u32) -> Option<usize> {
        self.job_labels.iter().position(|&l| l == label)
    }

    pub fn idle_slots(&self, machine: usize) -> usize {
        self.idle_slots[machine]
    }

    pub fn idle_positions(&self, machine: usize) -> &[usize] {
        &self.idle_positions[machine]
    }

    pub fn due_time(&self, job: usize) -> usize {
        self.due_times[job]
    }

    pub fn processing_order(&self, job: usize) -> &[usize] {
        &self.processing_orders[job]
    }

    pub fn fixed_assignments(&self) -> &[FixedAssignment] {
        &self.fixed
    }

    pub fn tardiness_weight(&self) -> f64 {
        self.tardiness_weight
    }

    /// Jobs whose processing order visits `machine`, ascending.
    pub fn jobs_on_machine(&self, machine: usize) -> Vec<usize> {
        (0..self.num_jobs)
            .filter(|&j| self.processing_orders[j].contains(&machine))
            .collect()
    }

    /// Horizon `T_m = J_m + i_m` of a machine.
    pub fn horizon(&self, machine: usize) -> usize {
        self.jobs_on_machine(machine).len() + self.idle_slots[machine]
    }

    /// Last machine in a job's processing order (where tardiness is paid).
    pub fn final_machine(&self, job: usize) -> usize {
        *self.processing_orders[job].last().expect("non-empty order")
    }

    /// Tardiness cost of placing `job` at 0-based slot `t` on its final
    /// machine: `w * max(0, (t+1) - due)`.
    pub fn tardiness(&self, job: usize, t: usize) -> f64 {
        self.tardiness_weight * ((t + 1) as f64 - self.due_times[job] as f64).max(0.0)
    }

    /// Default penalty weight: twice the largest single-job tardiness any
    /// placement can incur, so one violated constraint always costs more
    /// than any schedule delay.
    pub fn default_penalty_weight(&self) -> f64 {
        let mut worst = 0.0f64;
        for j in 0..self.num_jobs {
            let m = self.final_machine(j);
            for t in 0..self.horizon(m) {
                worst = worst.max(self.tardiness(j, t));
            }
        }
        2.0 * worst.max(1.0)
    }

    pub fn default_weights(&self) -> PenaltyWeights {
        PenaltyWeights::uniform(self.default_penalty_weight())
    }

    /// Parse the external JSON form.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawInstance = serde_json::from_str(text)
            .map_err(|e| Error::InvalidInstance(format!("bad instance JSON: {e}")))?;
        raw.into_instance()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&RawInstance::from_instance(self)).expect("serializable")
    }

    /// Weights recorded in the instance file, if any.
    pub fn file_weights(text: &str) -> Result<Option<PenaltyWeights>> {
        let raw: RawInstance = serde_json::from_str(text)
            .map_err(|e| Error::InvalidInstance(format!("bad instance JSON: {e}")))?;
        Ok(raw.weights)
    }
}

/// External JSON schema, 1-based machines/slots, job labels.
#[derive(Debug, Serialize, Deserialize)]
struct RawInstance {
    machines: usize,
    jobs: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    job_labels: Option<Vec<u32>>,
    idle_slots: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    idle_positions: Option<Vec<Vec<usize>>>,
    due_times: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    processing_orders: Option<Vec<Vec<usize>>>,
    #[serde(default)]
    fixed_assignments: Vec<RawFixed>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weights: Option<PenaltyWeights>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tardiness_weight: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct RawFixed {
    machine: usize,
    /// Job label, or `null` for a dummy job.
    job: Option<u32>,
    time: usize,
}

impl RawInstance {
    fn into_instance(self) -> Result<JsspInstance> {
        let job_labels: Vec<u32> = self
            .job_labels
            .unwrap_or_else(|| (1..=self.jobs as u32).collect());
        let to_zero = |v: usize, what: &str| -> Result<usize> {
            v.checked_sub(1)
                .ok_or_else(|| Error::InvalidInstance(format!("{what} must be 1-based, got 0")))
        };
        let idle_positions = match self.idle_positions {
            Some(lists) => Some(
                lists
                    .into_iter()
                    .map(|list| {
                        list.into_iter()
                            .map(|t| to_zero(t, "idle position"))
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<Vec<_>>>()?,
            ),
            None => None,
        };
        let processing_orders = match self.processing_orders {
            Some(lists) => Some(
                lists
                    .into_iter()
                    .map(|list| {
                        list.into_iter()
                            .map(|m| to_zero(m, "machine"))
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<Vec<_>>>()?,
            ),
            None => None,
        };
        let mut fixed = Vec::with_capacity(self.fixed_assignments.len());
        for f in self.fixed_assignments {
            let occupant = match f.job {
                Some(label) => {
                    let idx = job_labels.iter().position(|&l| l == label).ok_or_else(|| {
                        Error::InvalidInstance(format!("fixed assignment for unknown job {label}"))
                    })?;
                    Occupant::Job(idx)
                }
                None => Occupant::Dummy,
            };
            fixed.push(FixedAssignment {
                machine: to_zero(f.machine, "machine")?,
                occupant,
                time: to_zero(f.time, "time slot")?,
            });
        }
        JsspInstance::new(
            self.machines,
            self.jobs,
            Some(job_labels),
            self.idle_slots,
            idle_positions,
            self.due_times,
            processing_orders,
            fixed,
            self.tardiness_weight.unwrap_or(1.0),
        )
    }

    fn from_instance(instance: &JsspInstance) -> Self {
        Self {
            machines: instance.num_machines,
            jobs: instance.num_jobs,
            job_labels: Some(instance.job_labels.clone()),
            idle_slots: instance.idle_slots.clone(),
            idle_positions: Some(
                instance
                    .idle_positions
                    .iter()
                    .map(|list| list.iter().map(|t| t + 1).collect())
                    .collect(),
            ),
            due_times: instance.due_times.clone(),
            processing_orders: Some(
                instance
                    .processing_orders
                    .iter()
                    .map(|list| list.iter().map(|m| m + 1).collect())
                    .collect(),
            ),
            fixed_assignments: instance
                .fixed
                .iter()
                .map(|f| RawFixed {
                    machine: f.machine + 1,
                    job: match f.occupant {
                        Occupant::Job(j) => Some(instance.job_labels[j]),
                        Occupant::Dummy => None,
                    },
                    time: f.time + 1,
                })
                .collect(),
            weights: None,
            tardiness_weight: Some(instance.tardiness_weight),
        }
    }
}

/// The five-variable desk instance: one machine, jobs 4 and 5, horizon of
/// five slots with dummies pinned at slots 1, 4, and 5. After presolve the
/// free variables are the four job placements over slots 2-3 plus the
/// unpinned dummy candidate at slot 2, which is the qubit layout used by
/// the bundled experiments. The reduction is a reconstruction; the
/// decisive property is that its optimum packs job 4 then job 5 into the
/// two consecutive non-idle slots.
pub fn desk_instance() -> JsspInstance {
    JsspInstance::new(
        1,
        2,
        Some(vec![4, 5]),
        vec![3],
        Some(vec![vec![0, 1, 3, 4]]),
        vec![2, 3],
        None,
        vec![
            FixedAssignment {
                machine: 0,
                occupant: Occupant::Dummy,
                time: 0,
            },
            FixedAssignment {
                machine: 0,
                occupant: Occupant::Dummy,
                time: 3,
            },
            FixedAssignment {
                machine: 0,
                occupant: Occupant::Dummy,
                time: 4,
            },
        ],
        1.0,
    )
    .expect("desk instance is valid")
}
