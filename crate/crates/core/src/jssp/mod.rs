//! Job-shop scheduling instances and their QUBO compilation.
//!
//! An instance assigns jobs to machines over discrete time slots. Machine
//! `m` has a horizon of `T_m = J_m + i_m` slots, where `J_m` counts the
//! jobs whose processing order visits `m` and `i_m` is its idle-slot
//! count. Binary variables `x[m][j][t]` place job `j` on machine `m` at
//! slot `t`; dummy-job variables `y[m][t]` exist at the declared
//! idle-eligible positions and absorb slots no real job occupies.
//!
//! The compiled objective is
//!
//! ```text
//! Q(x, y) = c(x)
//!         + a1 * sum_{m,j} (g_mj(x) - 1)^2        job assignment
//!         + a2 * sum_{m,t} (l_mt(x, y) - 1)^2     slot occupancy
//!         + a3 * sum_{j, consecutive m} q_mj(x)   process order
//!         + a4 * sum_{m>=2, t<i_m} r_mt(y)        idle contiguity
//! ```
//!
//! with `g_mj = sum_t x[m][j][t]`, `l_mt = sum_j x[m][j][t] + y[m][t]`,
//! `q_mj = sum_{t' <= t} x[ma][j][t] * x[mb][j][t']` over consecutive
//! machines `(ma, mb)` in the job's processing order, and
//! `r_mt = y[m][t+1] * (1 - y[m][t])`. The cost `c(x)` is linear
//! tardiness against each job's due time on its final machine.

mod instance;
mod oracle;
mod qubo;
mod schedule;

pub use instance::{desk_instance, FixedAssignment, JsspInstance, Occupant, PenaltyWeights};
pub use oracle::{brute_force_oracle, scale_energy, EnergyBounds, ENUMERATION_BUDGET};
pub use qubo::{
    build_qubo, evaluate_energy, presolve, write_qubo_text, QuboProblem, VarId, VARIABLE_BUDGET,
};
pub use schedule::{decode_schedule, encode_schedule, FeasibilityFlags, Schedule, SlotContent};
