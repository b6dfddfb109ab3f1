//! Automatic quantum circuit design for job-shop scheduling.
//!
//! The crate is organised around four subsystems:
//!
//! - [`jssp`] models a job-shop scheduling instance, compiles it into a
//!   QUBO / diagonal Hamiltonian, and provides an exhaustive oracle for
//!   exact energy bounds.
//! - [`sim`] is an exact dense statevector simulator with parameterized
//!   rotations, two-qubit gates, measurement sampling, and stochastic
//!   Pauli noise.
//! - [`ansatz`] defines operation pools and expands pool candidates into
//!   gate layers of a placeholder circuit.
//! - [`dqas`] runs differentiable architecture search over a placeholder
//!   circuit: a categorical distribution over pool candidates is trained
//!   jointly with shared circuit weights against a CVaR energy objective,
//!   using parameter-shift gradients for the weights and score-function
//!   gradients for the architecture logits.
//!
//! Everything is deterministic given a master seed; see [`seeding`] for
//! the stream-splitting rule.

pub mod ansatz;
pub mod bits;
pub mod dqas;
pub mod error;
pub mod jssp;
pub mod seeding;
pub mod sim;

pub use bits::Bitstring;
pub use error::{Error, Result};
