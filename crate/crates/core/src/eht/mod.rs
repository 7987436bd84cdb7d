//! Chain heads and tails: states and dyads with unconditional endpoint sampling.

mod ct;

use std::sync::Arc;

pub use ct::{
    basis_state, phase_state, phase_state_fn, product_state, uniform_state, vector_state, BasisState, CtState,
    PhaseState, ProductState, UniformState, VectorState,
};

use crate::eps::{ratio, Draw, EpsOperator, KTag, SampleFault, SupportTerm, Transition};
use crate::error::{Error, Result};
use crate::linalg::{dense_guard, lp_norm, ComplexMatrix, NormPair, C64};
use crate::sampler::{CumulativeTable, RngStream};

/// Endpoint matrix `σ` with column law `P(n)` and row law `Q(m)`; every construction here
/// uses a single `k`, so `α_mn = σ_mn`.
pub trait EhtState: Send + Sync {
    fn rows(&self) -> usize;
    fn cols(&self) -> usize;
    fn bound(&self) -> f64;
    fn norm_pair(&self) -> NormPair;

    /// Column index drawn from `P`.
    fn sample_col(&self, rng: &mut RngStream) -> usize;
    /// Row index drawn from `Q`.
    fn sample_row(&self, rng: &mut RngStream) -> usize;
    fn col_prob(&self, n: usize) -> f64;
    fn row_prob(&self, m: usize) -> f64;
    fn entry(&self, m: usize, n: usize) -> C64;

    /// `(σ_mn/P(n), σ_mn/Q(m))`, both zero off the support.
    fn ratios(&self, m: usize, n: usize) -> std::result::Result<(C64, C64), SampleFault> {
        let a = self.entry(m, n);
        if a == C64::new(0.0, 0.0) {
            return Ok((a, a));
        }
        Ok((ratio(a, self.col_prob(n)), ratio(a, self.row_prob(m))))
    }

    fn to_dense(&self) -> Result<ComplexMatrix> {
        dense_guard(self.rows(), self.cols())?;
        Ok(ComplexMatrix::from_fn(self.rows(), self.cols(), |m, n| self.entry(m, n)))
    }

    fn label(&self) -> String;
}

pub type State = Arc<dyn EhtState>;

/// `|ket⟩⟨bra|` with `P(n) ∝ |bra_n|^p`, `Q(m) ∝ |ket_m|^q` and `b = ‖bra‖_p·‖ket‖_q`.
pub struct Dyad {
    ket: Arc<dyn CtState>,
    bra: Arc<dyn CtState>,
    pq: NormPair,
    b: f64,
}

pub fn dyad(ket: Arc<dyn CtState>, bra: Arc<dyn CtState>, pq: NormPair) -> Result<Dyad> {
    let (ket_norm, bra_norm) = (ket.norm(pq.q()), bra.norm(pq.p()));
    if !(ket_norm > 0.0) || !(bra_norm > 0.0) {
        return Err(Error::ZeroVector);
    }
    Ok(Dyad {
        b: bra_norm * ket_norm,
        ket,
        bra,
        pq,
    })
}

impl Dyad {
    pub fn ket(&self) -> &Arc<dyn CtState> {
        &self.ket
    }

    pub fn bra(&self) -> &Arc<dyn CtState> {
        &self.bra
    }
}

impl EhtState for Dyad {
    fn rows(&self) -> usize {
        self.ket.dim()
    }
    fn cols(&self) -> usize {
        self.bra.dim()
    }
    fn bound(&self) -> f64 {
        self.b
    }
    fn norm_pair(&self) -> NormPair {
        self.pq
    }
    fn sample_col(&self, rng: &mut RngStream) -> usize {
        self.bra.sample(self.pq.p(), rng)
    }
    fn sample_row(&self, rng: &mut RngStream) -> usize {
        self.ket.sample(self.pq.q(), rng)
    }
    fn col_prob(&self, n: usize) -> f64 {
        self.bra.law(n, self.pq.p())
    }
    fn row_prob(&self, m: usize) -> f64 {
        self.ket.law(m, self.pq.q())
    }
    fn entry(&self, m: usize, n: usize) -> C64 {
        self.ket.amplitude(m) * self.bra.amplitude(n).conj()
    }
    fn to_dense(&self) -> Result<ComplexMatrix> {
        dense_guard(self.rows(), self.cols())?;
        Ok(ComplexMatrix::outer(&self.ket.amplitudes(), &self.bra.amplitudes()))
    }
    fn label(&self) -> String {
        format!("dyad({}, {})", self.ket.label(), self.bra.label())
    }
}

/// Density operator with `P(n) = Q(n) = ρ_nn` and `b = 1`; only valid at `p = q = 2`.
pub struct Density {
    rho: ComplexMatrix,
    diag: Vec<f64>,
    table: CumulativeTable,
}

pub fn density(rho: ComplexMatrix) -> Result<Density> {
    if !rho.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "density operator of shape {}x{}",
            rho.rows(),
            rho.cols()
        )));
    }
    let mut diag = Vec::with_capacity(rho.rows());
    for i in 0..rho.rows() {
        let d = rho[(i, i)];
        if d.im.abs() > 1e-9 || d.re < -1e-12 {
            return Err(Error::InvalidParameter(format!("diagonal entry {i} = {d} is not a probability")));
        }
        diag.push(d.re.max(0.0));
    }
    let trace: f64 = diag.iter().sum();
    if (trace - 1.0).abs() > 1e-9 {
        return Err(Error::NotNormalized { norm: trace });
    }
    Ok(Density {
        table: CumulativeTable::new(diag.iter().copied()),
        diag,
        rho,
    })
}

impl EhtState for Density {
    fn rows(&self) -> usize {
        self.rho.rows()
    }
    fn cols(&self) -> usize {
        self.rho.cols()
    }
    fn bound(&self) -> f64 {
        1.0
    }
    fn norm_pair(&self) -> NormPair {
        NormPair::TWO
    }
    fn sample_col(&self, rng: &mut RngStream) -> usize {
        self.table.sample(rng).unwrap_or(0)
    }
    fn sample_row(&self, rng: &mut RngStream) -> usize {
        self.table.sample(rng).unwrap_or(0)
    }
    fn col_prob(&self, n: usize) -> f64 {
        self.diag[n]
    }
    fn row_prob(&self, m: usize) -> f64 {
        self.diag[m]
    }
    fn entry(&self, m: usize, n: usize) -> C64 {
        self.rho[(m, n)]
    }
    fn ratios(&self, m: usize, n: usize) -> std::result::Result<(C64, C64), SampleFault> {
        let a = self.rho[(m, n)];
        if a == C64::new(0.0, 0.0) {
            return Ok((a, a));
        }
        if a.norm() > (self.diag[m] * self.diag[n]).sqrt() * (1.0 + 1e-9) {
            return Err(SampleFault::NormViolation { m, n });
        }
        Ok((ratio(a, self.diag[n]), ratio(a, self.diag[m])))
    }
    fn to_dense(&self) -> Result<ComplexMatrix> {
        Ok(self.rho.clone())
    }
    fn label(&self) -> String {
        format!("density({})", self.rho.rows())
    }
}

type Term = (C64, Vec<C64>, Vec<C64>);

/// `σ = Σ_i s_i v_i u_iᵀ` with `‖u_i‖_p = ‖v_i‖_q = 1` and `b = Σ|s_i|`.
pub struct LowRank {
    terms: Vec<(C64, Vec<C64>, Vec<C64>)>,
    col_law: CumulativeTable,
    row_law: CumulativeTable,
    col_probs: Vec<f64>,
    row_probs: Vec<f64>,
    b: f64,
    pq: NormPair,
}

/// Each term is `(s_i, u_i, v_i)`; `u_i` indexes columns and `v_i` rows.
pub fn low_rank(terms: Vec<(C64, Vec<C64>, Vec<C64>)>, pq: NormPair) -> Result<LowRank> {
    let (cols, rows) = match terms.first() {
        Some((_, u, v)) => (u.len(), v.len()),
        None => return Err(Error::InvalidParameter("empty low-rank decomposition".into())),
    };
    for (_, u, v) in &terms {
        if u.len() != cols || v.len() != rows {
            return Err(Error::DimensionMismatch("low-rank vectors of differing lengths".into()));
        }
        for (x, r) in [(u, pq.p()), (v, pq.q())] {
            let norm = lp_norm(&x.iter().map(|z| z.norm()).collect::<Vec<_>>(), r);
            if (norm - 1.0).abs() > 1e-9 {
                return Err(Error::NotNormalized { norm });
            }
        }
    }
    let w: f64 = terms.iter().map(|t| t.0.norm()).sum();
    if !(w > 0.0) {
        return Err(Error::ZeroVector);
    }
    let law = |len: usize, r: f64, pick: &dyn Fn(&Term) -> &Vec<C64>| -> Vec<f64> {
        let mut probs = vec![0.0; len];
        for t in &terms {
            let x = pick(t);
            let ws = t.0.norm() / w;
            if r.is_infinite() {
                let max = x.iter().map(|z| z.norm()).fold(0.0, f64::max);
                let ties: Vec<usize> = (0..len).filter(|&i| x[i].norm() >= max * (1.0 - 1e-12)).collect();
                for i in &ties {
                    probs[*i] += ws / ties.len() as f64;
                }
            } else {
                for (pr, z) in probs.iter_mut().zip(x) {
                    *pr += ws * z.norm().powf(r);
                }
            }
        }
        probs
    };
    let col_probs = law(cols, pq.p(), &|t| &t.1);
    let row_probs = law(rows, pq.q(), &|t| &t.2);
    Ok(LowRank {
        col_law: CumulativeTable::new(col_probs.iter().copied()),
        row_law: CumulativeTable::new(row_probs.iter().copied()),
        col_probs,
        row_probs,
        b: w,
        terms,
        pq,
    })
}

impl EhtState for LowRank {
    fn rows(&self) -> usize {
        self.row_probs.len()
    }
    fn cols(&self) -> usize {
        self.col_probs.len()
    }
    fn bound(&self) -> f64 {
        self.b
    }
    fn norm_pair(&self) -> NormPair {
        self.pq
    }
    fn sample_col(&self, rng: &mut RngStream) -> usize {
        self.col_law.sample(rng).unwrap_or(0)
    }
    fn sample_row(&self, rng: &mut RngStream) -> usize {
        self.row_law.sample(rng).unwrap_or(0)
    }
    fn col_prob(&self, n: usize) -> f64 {
        self.col_probs[n]
    }
    fn row_prob(&self, m: usize) -> f64 {
        self.row_probs[m]
    }
    fn entry(&self, m: usize, n: usize) -> C64 {
        self.terms.iter().map(|(s, u, v)| s * v[m] * u[n]).sum()
    }
    fn to_dense(&self) -> Result<ComplexMatrix> {
        dense_guard(self.rows(), self.cols())?;
        let mut acc = ComplexMatrix::zeros(self.rows(), self.cols());
        for (s, u, v) in &self.terms {
            let u_conj: Vec<C64> = u.iter().map(|z| z.conj()).collect();
            acc = acc.add(&ComplexMatrix::outer(v, &u_conj).scale(*s))?;
        }
        Ok(acc)
    }
    fn label(&self) -> String {
        format!("low_rank({} terms)", self.terms.len())
    }
}

/// Uses a chain endpoint as an operator: forward and backward draws ignore the conditioning index.
pub struct EhtAsEps {
    state: State,
}

impl EhtAsEps {
    pub fn new(state: State) -> Self {
        Self { state }
    }
}

impl EpsOperator for EhtAsEps {
    fn rows(&self) -> usize {
        self.state.rows()
    }
    fn cols(&self) -> usize {
        self.state.cols()
    }
    fn bound(&self) -> f64 {
        self.state.bound()
    }
    fn norm_pair(&self) -> NormPair {
        self.state.norm_pair()
    }
    fn sample_forward(&self, row: usize, rng: &mut RngStream) -> Draw {
        let n = self.state.sample_col(rng);
        let (rp, rq) = self.state.ratios(row, n)?;
        Ok(Transition::unit(n, rp, rq))
    }
    fn sample_backward(&self, col: usize, rng: &mut RngStream) -> Draw {
        let m = self.state.sample_row(rng);
        let (rp, rq) = self.state.ratios(m, col)?;
        Ok(Transition::unit(m, rp, rq))
    }
    fn forward_support(&self, row: usize) -> Result<Vec<SupportTerm>> {
        let q = self.state.row_prob(row);
        Ok((0..self.state.cols())
            .filter_map(|n| {
                let alpha = self.state.entry(row, n);
                let prob = self.state.col_prob(n);
                (prob > 0.0 && alpha != C64::new(0.0, 0.0)).then_some(SupportTerm {
                    index: n,
                    tag: KTag::Unit,
                    alpha,
                    prob,
                    dual_prob: q,
                })
            })
            .collect())
    }
    fn backward_support(&self, col: usize) -> Result<Vec<SupportTerm>> {
        let p = self.state.col_prob(col);
        Ok((0..self.state.rows())
            .filter_map(|m| {
                let alpha = self.state.entry(m, col);
                let prob = self.state.row_prob(m);
                (prob > 0.0 && alpha != C64::new(0.0, 0.0)).then_some(SupportTerm {
                    index: m,
                    tag: KTag::Unit,
                    alpha,
                    prob,
                    dual_prob: p,
                })
            })
            .collect())
    }
    fn to_dense(&self) -> Result<ComplexMatrix> {
        self.state.to_dense()
    }
    fn label(&self) -> String {
        self.state.label()
    }
}

/// Full-support check of an endpoint: worst cost ratio and reconstruction error against `σ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateCertificate {
    pub max_cost: f64,
    pub max_entry_error: f64,
    pub col_mass_error: f64,
    pub row_mass_error: f64,
}

pub fn certify_state(state: &dyn EhtState) -> Result<StateCertificate> {
    let pq = state.norm_pair();
    let dense = state.to_dense()?;
    let mut rebuilt = ComplexMatrix::zeros(state.rows(), state.cols());
    let mut max_cost: f64 = 0.0;
    for m in 0..state.rows() {
        for n in 0..state.cols() {
            let (p, q) = (state.col_prob(n), state.row_prob(m));
            let alpha = state.entry(m, n);
            if alpha == C64::new(0.0, 0.0) {
                continue;
            }
            max_cost = max_cost.max(alpha.norm() / (p.powf(pq.inv_p()) * q.powf(pq.inv_q())));
            rebuilt[(m, n)] = alpha;
        }
    }
    let col_mass: f64 = (0..state.cols()).map(|n| state.col_prob(n)).sum();
    let row_mass: f64 = (0..state.rows()).map(|m| state.row_prob(m)).sum();
    Ok(StateCertificate {
        max_cost,
        max_entry_error: rebuilt.max_abs_diff(&dense),
        col_mass_error: (col_mass - 1.0).abs(),
        row_mass_error: (row_mass - 1.0).abs(),
    })
}
