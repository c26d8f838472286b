use thiserror::Error;

/// Errors raised by constructions and checks in this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("index {index} out of range for {num_qubits} qubits")]
    IndexOutOfRange { index: usize, num_qubits: usize },

    #[error("qubit {qubit} out of range for {num_qubits} qubits")]
    QubitOutOfRange { qubit: usize, num_qubits: usize },

    #[error("invalid Pauli term: {0}")]
    InvalidPauliTerm(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("t = {t} outside domain [{lo}, {hi}]")]
    OutsideDomain { t: f64, lo: f64, hi: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("infeasible parameters: {0}")]
    Infeasible(String),

    #[error("structure violation: {0}")]
    Structure(String),

    #[error("eigensolver did not converge: {0}")]
    NoConvergence(String),

    #[error("degenerate split: {0}")]
    Degenerate(String),

    #[error("not an isometry: {0}")]
    NotIsometry(String),

    #[error("calibration cap reached at delta = {delta}: {detail}")]
    CalibrationCap { delta: f64, detail: String },

    #[error("norm drift {drift:e} exceeds the abort threshold")]
    NormDrift { drift: f64 },

    #[error("query overhead {measured} exceeds declared bound {declared}")]
    OverheadExceeded { measured: u64, declared: u64 },

    #[error("memory guard: {0}")]
    MemoryGuard(String),
}

pub type Result<T> = std::result::Result<T, Error>;
