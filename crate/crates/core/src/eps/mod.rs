//! Operators that expose forward and backward path-transition sampling with a certified cost bound.

mod blocks;
mod combinators;
mod haar;
mod oracle;
mod sparse;
mod structured;

use std::sync::Arc;

pub use blocks::{controlled, projector_family, tensor_embed, BlockDiagonal, ProjectorBasis, TensorEmbed};
pub use combinators::{adjoint, exp, grover_reflection, product, scale, sum, transpose, Exp, Product, Scale, Sum, Swapped};
pub use haar::HaarWavelet;
pub use oracle::OracleOp;
pub use sparse::{from_dense_optimal, from_rowcol, sparse_ecs, SparseEps};
pub use structured::{diagonal_unitary, fourier, hadamard, pauli_string, permutation, FlatUnitary, Identity, PauliString, Permutation, Zero};

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, NormPair, C64};
use crate::sampler::RngStream;

/// Shared handle to an operator.
pub type Op = Arc<dyn EpsOperator>;

/// Path-extension label `k`. Sums record the chosen term, products the intermediate indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum KTag {
    Unit,
    Term { index: usize, inner: Box<KTag> },
    Chain { via: Vec<usize>, tags: Vec<KTag> },
}

/// One sampled transition with `α/P` and `α/Q`.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub index: usize,
    pub tag: KTag,
    pub ratio_p: C64,
    pub ratio_q: C64,
}

impl Transition {
    pub fn unit(index: usize, ratio_p: C64, ratio_q: C64) -> Self {
        Self {
            index,
            tag: KTag::Unit,
            ratio_p,
            ratio_q,
        }
    }

    fn scaled(mut self, s: C64) -> Self {
        self.ratio_p *= s;
        self.ratio_q *= s;
        self
    }
}

/// Reasons a draw yields no path; the dead cases contribute exactly zero to an estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleFault {
    DeadRow(usize),
    DeadColumn(usize),
    NormViolation { m: usize, n: usize },
}

impl From<SampleFault> for Error {
    fn from(f: SampleFault) -> Self {
        match f {
            SampleFault::DeadRow(m) => Error::DeadRow(m),
            SampleFault::DeadColumn(n) => Error::DeadColumn(n),
            SampleFault::NormViolation { m, n } => Error::NormViolation { m, n },
        }
    }
}

pub type Draw = std::result::Result<Transition, SampleFault>;

/// A transition without its `k` tag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step {
    pub index: usize,
    pub ratio_p: C64,
    pub ratio_q: C64,
}

impl Step {
    fn scaled(mut self, s: C64) -> Self {
        self.ratio_p *= s;
        self.ratio_q *= s;
        self
    }
}

impl From<Transition> for Step {
    fn from(t: Transition) -> Self {
        Self {
            index: t.index,
            ratio_p: t.ratio_p,
            ratio_q: t.ratio_q,
        }
    }
}

pub type StepDraw = std::result::Result<Step, SampleFault>;

/// A nonzero `(index, k)` term reachable from a fixed row (forward) or column (backward).
///
/// `prob` is the probability in the enumerated direction and `dual_prob` the one in the
/// opposite direction, so a forward term carries `P(n,k|m)` and `Q(m,k|n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportTerm {
    pub index: usize,
    pub tag: KTag,
    pub alpha: C64,
    pub prob: f64,
    pub dual_prob: f64,
}

/// Largest support size any enumeration may produce.
pub const SUPPORT_CAP: usize = 1 << 20;

pub trait EpsOperator: Send + Sync {
    fn rows(&self) -> usize;
    fn cols(&self) -> usize;
    fn bound(&self) -> f64;
    fn norm_pair(&self) -> NormPair;

    /// Draws `(n, k)` from `P(·,·|row)`.
    fn sample_forward(&self, row: usize, rng: &mut RngStream) -> Draw;
    /// Draws `(m, k)` from `Q(·,·|col)`.
    fn sample_backward(&self, col: usize, rng: &mut RngStream) -> Draw;

    /// Same law and random stream as `sample_forward`, without building the tag.
    fn step_forward(&self, row: usize, rng: &mut RngStream) -> StepDraw {
        self.sample_forward(row, rng).map(Step::from)
    }
    fn step_backward(&self, col: usize, rng: &mut RngStream) -> StepDraw {
        self.sample_backward(col, rng).map(Step::from)
    }

    fn forward_support(&self, row: usize) -> Result<Vec<SupportTerm>>;
    fn backward_support(&self, col: usize) -> Result<Vec<SupportTerm>>;

    /// Dense matrix built from the operator's own definition, not from its sampler.
    fn to_dense(&self) -> Result<ComplexMatrix>;

    /// Closed-form `‖Ā‖_q` when the structure fixes it.
    fn declared_imax(&self) -> Option<f64> {
        None
    }

    fn label(&self) -> String;
}

pub(crate) fn ratio(alpha: C64, prob: f64) -> C64 {
    if prob > 0.0 {
        alpha / prob
    } else {
        C64::new(f64::INFINITY, 0.0)
    }
}

pub(crate) fn check_same_norm_pair(ops: &[Op]) -> Result<NormPair> {
    let pq = ops
        .first()
        .map(|o| o.norm_pair())
        .ok_or_else(|| Error::InvalidParameter("empty operator list".into()))?;
    for o in &ops[1..] {
        pq.ensure_eq(&o.norm_pair())?;
    }
    Ok(pq)
}

pub(crate) fn check_support_cap(len: usize) -> Result<()> {
    if len > SUPPORT_CAP {
        Err(Error::InvalidParameter(format!(
            "support enumeration exceeds {SUPPORT_CAP} terms"
        )))
    } else {
        Ok(())
    }
}

/// Worst-case cost `|α|/(P^{1/p} Q^{1/q})` and largest reconstruction error over the full support.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Certificate {
    pub max_cost: f64,
    pub max_entry_error: f64,
    pub max_forward_mass_error: f64,
    pub max_backward_mass_error: f64,
}

fn cost(alpha: C64, p_prob: f64, q_prob: f64, pq: NormPair) -> f64 {
    let a = alpha.norm();
    if a == 0.0 {
        return 0.0;
    }
    a / (p_prob.powf(pq.inv_p()) * q_prob.powf(pq.inv_q()))
}

/// Enumerates both directions and checks the operator against its dense form.
///
/// A direction with zero weight (forward at `p = ∞`, backward at `p = 1`) is never sampled and
/// is skipped. Dead rows and columns show up as a mass error of 1.
pub fn certify(op: &dyn EpsOperator) -> Result<Certificate> {
    let pq = op.norm_pair();
    let dense = op.to_dense()?;
    let mut cert = Certificate {
        max_cost: 0.0,
        max_entry_error: 0.0,
        max_forward_mass_error: 0.0,
        max_backward_mass_error: 0.0,
    };
    if pq.inv_p() > 0.0 {
        let mut fwd = ComplexMatrix::zeros(op.rows(), op.cols());
        for m in 0..op.rows() {
            let terms = op.forward_support(m)?;
            let mass: f64 = terms.iter().map(|t| t.prob).sum();
            cert.max_forward_mass_error = cert.max_forward_mass_error.max((mass - 1.0).abs());
            for t in terms {
                fwd[(m, t.index)] += t.alpha;
                cert.max_cost = cert.max_cost.max(cost(t.alpha, t.prob, t.dual_prob, pq));
            }
        }
        cert.max_entry_error = cert.max_entry_error.max(fwd.max_abs_diff(&dense));
    }
    if pq.inv_q() > 0.0 {
        let mut bwd = ComplexMatrix::zeros(op.rows(), op.cols());
        for n in 0..op.cols() {
            let terms = op.backward_support(n)?;
            let mass: f64 = terms.iter().map(|t| t.prob).sum();
            cert.max_backward_mass_error = cert.max_backward_mass_error.max((mass - 1.0).abs());
            for t in terms {
                bwd[(t.index, n)] += t.alpha;
                cert.max_cost = cert.max_cost.max(cost(t.alpha, t.dual_prob, t.prob, pq));
            }
        }
        cert.max_entry_error = cert.max_entry_error.max(bwd.max_abs_diff(&dense));
    }
    Ok(cert)
}
