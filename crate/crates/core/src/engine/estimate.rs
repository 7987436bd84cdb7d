use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::Instant;

use super::{Circuit, EstimateOptions};
use crate::eht::{dyad, CtState, EhtState};
use crate::eps::{adjoint, product, EpsOperator, Identity, Op, Product, SampleFault};
use crate::error::{Error, Result};
use crate::linalg::{NormPair, C64};
use crate::sampler::{coin, sample_count, Accumulator, EstimateReport, RngStream};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

/// One sampled path through `Tr(Aσ)`: the row `m` of `A`, its column `n`, and the ratio products
/// `V/P` and `V/Q` of the two chains.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathLedger {
    pub direction: Direction,
    pub m: usize,
    pub n: usize,
    pub ratio_p: C64,
    pub ratio_q: C64,
}

fn recip_or_zero(x: C64) -> C64 {
    if x.re.is_finite() && x.im.is_finite() {
        x.inv()
    } else {
        C64::new(0.0, 0.0)
    }
}

impl PathLedger {
    /// `V/R` with `R = P/p + Q/q`, i.e. `1/(1/(p·V/P) + 1/(q·V/Q))`.
    pub fn value(&self, pq: NormPair) -> C64 {
        let (inv_p, inv_q) = (pq.inv_p(), pq.inv_q());
        if inv_p == 0.0 {
            return self.ratio_q;
        }
        if inv_q == 0.0 {
            return self.ratio_p;
        }
        let zero = C64::new(0.0, 0.0);
        if self.ratio_p == zero || self.ratio_q == zero {
            return zero;
        }
        let denom = recip_or_zero(self.ratio_p) * inv_p + recip_or_zero(self.ratio_q) * inv_q;
        denom.inv()
    }
}

/// Draws one path from the mixture `R = P_σ P_A / p + Q_σ Q_A / q`.
pub fn sample_path(
    sigma: &dyn EhtState,
    a: &dyn EpsOperator,
    rng: &mut RngStream,
) -> std::result::Result<PathLedger, SampleFault> {
    let pq = a.norm_pair();
    let forward = if pq.inv_q() == 0.0 {
        true
    } else if pq.inv_p() == 0.0 {
        false
    } else {
        coin(pq.inv_p(), rng)
    };
    let (direction, m, n, step) = if forward {
        let m = sigma.sample_col(rng);
        let step = a.step_forward(m, rng)?;
        (Direction::Forward, m, step.index, step)
    } else {
        let n = sigma.sample_row(rng);
        let step = a.step_backward(n, rng)?;
        (Direction::Backward, step.index, n, step)
    };
    let (sp, sq) = sigma.ratios(n, m)?;
    Ok(PathLedger {
        direction,
        m,
        n,
        ratio_p: sp * step.ratio_p,
        ratio_q: sq * step.ratio_q,
    })
}

fn check_trace_shapes(sigma: &dyn EhtState, a: &dyn EpsOperator) -> Result<()> {
    if a.rows() != sigma.cols() || a.cols() != sigma.rows() {
        return Err(Error::DimensionMismatch(format!(
            "Tr(Aσ) needs A of shape {}x{}, got {}x{}",
            sigma.cols(),
            sigma.rows(),
            a.rows(),
            a.cols()
        )));
    }
    sigma.norm_pair().ensure_eq(&a.norm_pair())
}

fn run_worker(
    sigma: &dyn EhtState,
    a: &dyn EpsOperator,
    paths: u64,
    rng: &mut RngStream,
    abort: &AtomicBool,
) -> Result<Accumulator> {
    let pq = a.norm_pair();
    let mut acc = Accumulator::default();
    for i in 0..paths {
        if i % 4096 == 0 && abort.load(Ordering::Relaxed) {
            break;
        }
        match sample_path(sigma, a, rng) {
            Ok(path) => acc.push(path.value(pq)),
            Err(SampleFault::DeadRow(_) | SampleFault::DeadColumn(_)) => acc.push(C64::new(0.0, 0.0)),
            Err(f @ SampleFault::NormViolation { .. }) => {
                abort.store(true, Ordering::Relaxed);
                return Err(f.into());
            }
        }
    }
    Ok(acc)
}

/// Estimates `Tr(Aσ)` within `epsilon` with failure probability at most `delta`.
///
/// Worker `w` draws from stream `w` and takes `K/W` paths plus one of the remainder if `w < K mod W`;
/// partial sums are merged in worker order, so the result depends only on `(seed, workers)`.
pub fn estimate_trace(
    sigma: &dyn EhtState,
    a: &dyn EpsOperator,
    epsilon: f64,
    delta: f64,
    options: EstimateOptions,
) -> Result<EstimateReport> {
    check_trace_shapes(sigma, a)?;
    let b = sigma.bound() * a.bound();
    let k = sample_count(epsilon, delta, b)?;
    let workers = options.workers.max(1);
    let start = Instant::now();
    let abort = AtomicBool::new(false);
    let share = |w: usize| k / workers as u64 + u64::from((w as u64) < k % workers as u64);
    let results: Vec<Result<Accumulator>> = if workers == 1 {
        vec![run_worker(sigma, a, k, &mut RngStream::new(options.seed, 0), &abort)]
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..workers)
                .map(|w| {
                    let abort = &abort;
                    scope.spawn(move || {
                        let mut rng = RngStream::new(options.seed, w as u64);
                        run_worker(sigma, a, share(w), &mut rng, abort)
                    })
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().unwrap_or_else(|_| Err(Error::InvalidParameter("worker panicked".into()))))
                .collect()
        })
    };
    let mut total = Accumulator::default();
    for r in results {
        total.merge(&r?);
    }
    Ok(EstimateReport {
        estimate: total.mean(),
        sample_count: k,
        empirical_std: total.std(),
        b,
        epsilon,
        delta,
        seed: options.seed,
        workers,
        elapsed: start.elapsed(),
    })
}

/// `U⁽¹⁾†⋯U⁽ᵀ⁾† M U⁽ᵀ⁾⋯U⁽¹⁾` as one product operator.
pub fn expectation_operator(circuit: &Circuit) -> Result<Product> {
    let us = circuit.unitaries();
    let mut factors: Vec<Op> = Vec::with_capacity(2 * us.len() + 1);
    factors.extend(us.iter().map(|u| Arc::new(adjoint(Arc::clone(u))) as Op));
    factors.push(Arc::clone(circuit.measurement()));
    factors.extend(us.iter().rev().cloned());
    product(factors)
}

/// Estimates `Tr(M U⁽ᵀ⁾⋯U⁽¹⁾ ρ U⁽¹⁾†⋯U⁽ᵀ⁾†)`, reporting `b = b_ρ·b_M·Π b_t²`.
///
/// Adjoints certify the dual norm pair, so the chain only closes at `p = 2`.
pub fn estimate_expectation(
    circuit: &Circuit,
    epsilon: f64,
    delta: f64,
    options: EstimateOptions,
) -> Result<EstimateReport> {
    let a = expectation_operator(circuit)?;
    estimate_trace(circuit.initial().as_ref(), &a, epsilon, delta, options)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeReport {
    pub report: EstimateReport,
    /// `|a|²` of the estimate `a`.
    pub abs_sq: f64,
    /// `2|a|ε + ε²`.
    pub abs_sq_bound: f64,
}

/// Estimates `⟨φ|U⁽ᵀ⁾⋯U⁽¹⁾|ψ⟩` with `b = b_dyad·Π b_t`.
pub fn estimate_amplitude(
    phi: Arc<dyn CtState>,
    psi: Arc<dyn CtState>,
    unitaries: &[Op],
    pq: NormPair,
    epsilon: f64,
    delta: f64,
    options: EstimateOptions,
) -> Result<AmplitudeReport> {
    let sigma = dyad(psi, phi, pq)?;
    let report = if unitaries.is_empty() {
        let id = Identity::new(sigma.cols(), pq);
        estimate_trace(&sigma, &id, epsilon, delta, options)?
    } else {
        let a = product(unitaries.iter().rev().cloned().collect())?;
        estimate_trace(&sigma, &a, epsilon, delta, options)?
    };
    let modulus = report.estimate.norm();
    Ok(AmplitudeReport {
        abs_sq: modulus * modulus,
        abs_sq_bound: 2.0 * modulus * epsilon + epsilon * epsilon,
        report,
    })
}
