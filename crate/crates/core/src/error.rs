use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors shared by every subsystem of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("penalty weights must be strictly positive, got {0}")]
    NonPositiveWeight(f64),

    #[error("infeasible fixed assignments: {0}")]
    Infeasible(String),

    #[error("problem needs {needed} variables, budget is {budget}")]
    VariableBudget { needed: usize, budget: usize },

    #[error("bitstring length {got} does not match variable count {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("enumeration over {n} variables exceeds the budget of {max}")]
    EnumerationBudget { n: usize, max: usize },

    #[error("degenerate energy bounds: e_min == e_max == {0}")]
    DegenerateBounds(f64),

    #[error("qubit {qubit} out of range for {n}-qubit state")]
    QubitOutOfRange { qubit: usize, n: usize },

    #[error("parameter slot {slot} not covered by theta of length {len}")]
    UnresolvedParamSlot { slot: usize, len: usize },

    #[error("invalid gate: {0}")]
    InvalidGate(String),

    #[error("invalid operation candidate: {0}")]
    InvalidCandidate(String),

    #[error("unknown operation pool `{0}`")]
    UnknownPool(String),

    #[error("architecture invalid: {0}")]
    InvalidArchitecture(String),

    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: usize, got: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("checkpoint error: {0}")]
    Checkpoint(String),
}
