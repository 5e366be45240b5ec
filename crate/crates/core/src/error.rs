// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

/// Errors produced by the simulator and trainers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit index {index} out of range for {num_qubits} qubits")]
    QubitOutOfRange { index: usize, num_qubits: usize },

    #[error("unsupported qubit count {0}")]
    UnsupportedQubitCount(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("invalid observable: {0}")]
    InvalidObservable(String),

    #[error("invalid Hamiltonian parameters: {0}")]
    InvalidParams(String),

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("time {t} outside schedule domain [0, {t_final}]")]
    TimeOutOfRange { t: f64, t_final: f64 },

    #[error("invalid coefficient: {0}")]
    InvalidCoefficient(String),

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("eigendecomposition did not converge")]
    Eigendecomposition,

    #[error("expectation value has imaginary part {0:e}")]
    NonRealExpectation(f64),

    #[error("gradient has imaginary residual {0:e}")]
    NonRealGradient(f64),

    #[error("training diverged at epoch {epoch}: rms {rms:e} exceeds {factor}x initial {initial:e}")]
    Diverged {
        epoch: usize,
        rms: f64,
        initial: f64,
        factor: f64,
    },

    #[error("empty training set")]
    EmptyTrainingSet,

    #[error("invalid training pair: {0}")]
    InvalidPair(String),

    #[error("invalid backend: {0}")]
    InvalidBackend(String),

    #[error("no shots recorded")]
    ZeroShots,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
