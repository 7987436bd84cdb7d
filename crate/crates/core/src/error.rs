use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("dimension {dim} exceeds the dense oracle cap of {cap}")]
    OracleCapExceeded { dim: usize, cap: usize },
    #[error("power iteration stopped after {iterations} iterations without converging (best estimate {best})")]
    IterationLimit { best: f64, iterations: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("row {0} has no nonzero entries")]
    DeadRow(usize),
    #[error("column {0} has no nonzero entries")]
    DeadColumn(usize),
    #[error("phase at index {index} has modulus {modulus}, expected 1")]
    NonUnitPhase { index: usize, modulus: f64 },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("norm pair mismatch: ({p_a}, {q_a}) vs ({p_b}, {q_b})")]
    NormPairMismatch { p_a: f64, q_a: f64, p_b: f64, q_b: f64 },
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
    #[error("inconsistent index maps: {0}")]
    IndexMapInconsistent(String),
    #[error("vector is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },
    #[error("zero vector")]
    ZeroVector,
    #[error("entry ({m}, {n}) violates |rho_mn| <= sqrt(rho_mm rho_nn)")]
    NormViolation { m: usize, n: usize },
    #[error("{histories} histories exceed the cap of {cap}")]
    HistoryCapExceeded { histories: usize, cap: usize },
    #[error("cost bound {b} exceeds the negative-mass cap {cap}")]
    NegativeMassOverflow { b: f64, cap: f64 },
}
