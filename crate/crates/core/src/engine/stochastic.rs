use std::sync::Arc;

use super::{estimate_trace, mana, EstimateOptions};
use crate::eht::{dyad, vector_state, CtState, EhtState};
use crate::eps::{from_dense_optimal, product, Op};
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, NormPair, C64};
use crate::sampler::EstimateReport;

pub const DEFAULT_NEGATIVE_MASS_CAP: f64 = 1e6;

/// `⟨final| A⁽ᵀ⁾⋯A⁽¹⁾ |initial⟩` for real quasi-stochastic matrices, simulated at `p = ∞, q = 1`.
#[derive(Debug, Clone)]
pub struct StochasticChain {
    pub initial: Vec<f64>,
    pub ops: Vec<ComplexMatrix>,
    pub final_weights: Vec<f64>,
    /// Largest `b` accepted before the run is refused.
    pub cap: f64,
}

impl StochasticChain {
    pub fn new(initial: Vec<f64>, ops: Vec<ComplexMatrix>, final_weights: Vec<f64>) -> Self {
        Self {
            initial,
            ops,
            final_weights,
            cap: DEFAULT_NEGATIVE_MASS_CAP,
        }
    }

    pub fn with_cap(mut self, cap: f64) -> Self {
        self.cap = cap;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StochasticReport {
    pub report: EstimateReport,
    /// `ln ‖A⁽ᵗ⁾‖₁` per operator.
    pub mana: Vec<f64>,
}

fn real_vector(x: &[f64]) -> Vec<C64> {
    x.iter().map(|&v| C64::new(v, 0.0)).collect()
}

/// Runs the column-stochastic (backward) chain; `b = ‖final‖_∞·Π‖A⁽ᵗ⁾‖₁·‖initial‖₁`.
pub fn stochastic_mode_estimate(
    chain: &StochasticChain,
    epsilon: f64,
    delta: f64,
    options: EstimateOptions,
) -> Result<StochasticReport> {
    let pq = NormPair::STOCHASTIC;
    for (t, a) in chain.ops.iter().enumerate() {
        if a.data().iter().any(|z| z.im != 0.0) {
            return Err(Error::InvalidParameter(format!("operator {t} has complex entries")));
        }
    }
    let ket: Arc<dyn CtState> = Arc::new(vector_state(real_vector(&chain.initial))?);
    let bra: Arc<dyn CtState> = Arc::new(vector_state(real_vector(&chain.final_weights))?);
    let sigma = dyad(ket, bra, pq)?;
    let ops: Vec<Op> = chain
        .ops
        .iter()
        .rev()
        .map(|a| Ok(Arc::new(from_dense_optimal(a, pq)?) as Op))
        .collect::<Result<_>>()?;
    let a: Op = match ops.len() {
        0 => Arc::new(crate::eps::Identity::new(sigma.rows(), pq)),
        _ => Arc::new(product(ops)?),
    };
    let b = sigma.bound() * a.bound();
    if !(b <= chain.cap) {
        return Err(Error::NegativeMassOverflow { b, cap: chain.cap });
    }
    let report = estimate_trace(&sigma, a.as_ref(), epsilon, delta, options)?;
    Ok(StochasticReport {
        report,
        mana: chain.ops.iter().map(mana).collect(),
    })
}
