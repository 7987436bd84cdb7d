//! Estimators for traces, expectation values and amplitudes, plus exact interference diagnostics.

mod estimate;
mod exact;
mod stochastic;

use std::sync::Arc;

pub use estimate::{
    estimate_amplitude, estimate_expectation, estimate_trace, expectation_operator, sample_path, AmplitudeReport,
    Direction, PathLedger,
};
pub use exact::{
    decoherence_matrix, decoherence_matrix_with_cap, exact_expectation, holistic_reference, imax, imax_dense,
    interference_exact, interference_state_exact, mana, Decoherence, HolisticReference, DEFAULT_HISTORY_CAP,
};
pub use stochastic::{stochastic_mode_estimate, StochasticChain, StochasticReport, DEFAULT_NEGATIVE_MASS_CAP};

use crate::eht::State;
use crate::eps::Op;
use crate::error::{Error, Result};
use crate::linalg::NormPair;

/// `ρ`, the unitaries `U⁽¹⁾…U⁽ᵀ⁾` in time order, and the measurement `M`.
#[derive(Clone)]
pub struct Circuit {
    initial: State,
    unitaries: Vec<Op>,
    measurement: Op,
    norm_pair: NormPair,
    dims: Vec<usize>,
}

impl Circuit {
    /// `dims` lists the subsystem dimensions; an empty list means a single register of the state's size.
    pub fn new(initial: State, unitaries: Vec<Op>, measurement: Op, dims: Vec<usize>) -> Result<Self> {
        let n = initial.rows();
        if initial.cols() != n {
            return Err(Error::DimensionMismatch(format!(
                "initial state is {}x{}, expected square",
                initial.rows(),
                initial.cols()
            )));
        }
        let dims = if dims.is_empty() { vec![n] } else { dims };
        let total = dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| Error::DimensionMismatch("subsystem dimensions overflow".into()))?;
        if total != n {
            return Err(Error::DimensionMismatch(format!(
                "subsystem dimensions {dims:?} multiply to {total}, state has dimension {n}"
            )));
        }
        let norm_pair = initial.norm_pair();
        for (t, op) in unitaries.iter().chain(std::iter::once(&measurement)).enumerate() {
            if op.rows() != n || op.cols() != n {
                let what = if t < unitaries.len() {
                    format!("unitary {t}")
                } else {
                    "measurement".to_string()
                };
                return Err(Error::DimensionMismatch(format!(
                    "{what} ({}) is {}x{}, circuit dimension is {n}",
                    op.label(),
                    op.rows(),
                    op.cols()
                )));
            }
            norm_pair.ensure_eq(&op.norm_pair())?;
        }
        Ok(Self {
            initial,
            unitaries,
            measurement,
            norm_pair,
            dims,
        })
    }

    pub fn initial(&self) -> &State {
        &self.initial
    }

    pub fn unitaries(&self) -> &[Op] {
        &self.unitaries
    }

    pub fn measurement(&self) -> &Op {
        &self.measurement
    }

    pub fn norm_pair(&self) -> NormPair {
        self.norm_pair
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.initial.rows()
    }

    /// Same circuit with one more unitary appended.
    pub fn then(&self, u: Op) -> Result<Self> {
        let mut unitaries = self.unitaries.clone();
        unitaries.push(u);
        Self::new(
            Arc::clone(&self.initial),
            unitaries,
            Arc::clone(&self.measurement),
            self.dims.clone(),
        )
    }
}

/// Seed and worker count for an estimator run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EstimateOptions {
    pub seed: u64,
    pub workers: usize,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        Self { seed: 0, workers: 1 }
    }
}

impl EstimateOptions {
    pub fn new(seed: u64, workers: usize) -> Self {
        Self { seed, workers }
    }
}
