use std::sync::Arc;

use super::{
    check_same_norm_pair, check_support_cap, Draw, EpsOperator, Identity, KTag, Op, SampleFault, Step, StepDraw, SupportTerm,
    Transition,
};
use crate::eht::{dyad, uniform_state, EhtAsEps};
use crate::error::{Error, Result};
use crate::linalg::{dense_exp, ComplexMatrix, NormPair, C64};
use crate::sampler::{sample_poisson_like_tail, CumulativeTable, RngStream};

/// `s·A`.
pub struct Scale {
    s: C64,
    inner: Op,
}

pub fn scale(s: C64, inner: Op) -> Scale {
    Scale { s, inner }
}

impl EpsOperator for Scale {
    fn rows(&self) -> usize {
        self.inner.rows()
    }
    fn cols(&self) -> usize {
        self.inner.cols()
    }
    fn bound(&self) -> f64 {
        self.s.norm() * self.inner.bound()
    }
    fn norm_pair(&self) -> NormPair {
        self.inner.norm_pair()
    }
    fn sample_forward(&self, row: usize, rng: &mut RngStream) -> Draw {
        Ok(self.inner.sample_forward(row, rng)?.scaled(self.s))
    }
    fn sample_backward(&self, col: usize, rng: &mut RngStream) -> Draw {
        Ok(self.inner.sample_backward(col, rng)?.scaled(self.s))
    }
    fn step_forward(&self, row: usize, rng: &mut RngStream) -> StepDraw {
        Ok(self.inner.step_forward(row, rng)?.scaled(self.s))
    }
    fn step_backward(&self, col: usize, rng: &mut RngStream) -> StepDraw {
        Ok(self.inner.step_backward(col, rng)?.scaled(self.s))
    }
    fn forward_support(&self, row: usize) -> Result<Vec<SupportTerm>> {
        Ok(scale_terms(self.inner.forward_support(row)?, self.s))
    }
    fn backward_support(&self, col: usize) -> Result<Vec<SupportTerm>> {
        Ok(scale_terms(self.inner.backward_support(col)?, self.s))
    }
    fn to_dense(&self) -> Result<ComplexMatrix> {
        Ok(self.inner.to_dense()?.scale(self.s))
    }
    fn declared_imax(&self) -> Option<f64> {
        self.inner.declared_imax().map(|i| i * self.s.norm())
    }
    fn label(&self) -> String {
        format!("scale({}, {})", self.s, self.inner.label())
    }
}

fn scale_terms(terms: Vec<SupportTerm>, s: C64) -> Vec<SupportTerm> {
    if s == C64::new(0.0, 0.0) {
        return Vec::new();
    }
    terms
        .into_iter()
        .map(|mut t| {
            t.alpha *= s;
            t
        })
        .collect()
}

/// Transpose or adjoint: forward and backward roles trade places.
///
/// The swapped distributions certify the same `b` for the dual pair `(q, p)`.
pub struct Swapped {
    inner: Op,
    conjugate: bool,
}

pub fn transpose(inner: Op) -> Swapped {
    Swapped {
        inner,
        conjugate: false,
    }
}

pub fn adjoint(inner: Op) -> Swapped {
    Swapped {
        inner,
        conjugate: true,
    }
}

impl Swapped {
    fn flip(&self, t: Transition) -> Transition {
        let (rp, rq) = if self.conjugate {
            (t.ratio_q.conj(), t.ratio_p.conj())
        } else {
            (t.ratio_q, t.ratio_p)
        };
        Transition {
            index: t.index,
            tag: t.tag,
            ratio_p: rp,
            ratio_q: rq,
        }
    }

    fn flip_step(&self, t: Step) -> Step {
        if self.conjugate {
            Step {
                index: t.index,
                ratio_p: t.ratio_q.conj(),
                ratio_q: t.ratio_p.conj(),
            }
        } else {
            Step {
                index: t.index,
                ratio_p: t.ratio_q,
                ratio_q: t.ratio_p,
            }
        }
    }

    fn flip_terms(&self, terms: Vec<SupportTerm>) -> Vec<SupportTerm> {
        if self.conjugate {
            terms
                .into_iter()
                .map(|mut t| {
                    t.alpha = t.alpha.conj();
                    t
                })
                .collect()
        } else {
            terms
        }
    }
}

impl EpsOperator for Swapped {
    fn rows(&self) -> usize {
        self.inner.cols()
    }
    fn cols(&self) -> usize {
        self.inner.rows()
    }
    fn bound(&self) -> f64 {
        self.inner.bound()
    }
    fn norm_pair(&self) -> NormPair {
        self.inner.norm_pair().dual()
    }
    fn sample_forward(&self, row: usize, rng: &mut RngStream) -> Draw {
        let t = self.inner.sample_backward(row, rng).map_err(swap_fault)?;
        Ok(self.flip(t))
    }
    fn sample_backward(&self, col: usize, rng: &mut RngStream) -> Draw {
        let t = self.inner.sample_forward(col, rng).map_err(swap_fault)?;
        Ok(self.flip(t))
    }
    fn step_forward(&self, row: usize, rng: &mut RngStream) -> StepDraw {
        let t = self.inner.step_backward(row, rng).map_err(swap_fault)?;
        Ok(self.flip_step(t))
    }
    fn step_backward(&self, col: usize, rng: &mut RngStream) -> StepDraw {
        let t = self.inner.step_forward(col, rng).map_err(swap_fault)?;
        Ok(self.flip_step(t))
    }
    fn forward_support(&self, row: usize) -> Result<Vec<SupportTerm>> {
        Ok(self.flip_terms(self.inner.backward_support(row)?))
    }
    fn backward_support(&self, col: usize) -> Result<Vec<SupportTerm>> {
        Ok(self.flip_terms(self.inner.forward_support(col)?))
    }
    fn to_dense(&self) -> Result<ComplexMatrix> {
        let a = self.inner.to_dense()?;
        Ok(if self.conjugate { a.adjoint() } else { a.transpose() })
    }
    fn declared_imax(&self) -> Option<f64> {
        self.inner.declared_imax()
    }
    fn label(&self) -> String {
        let name = if self.conjugate { "adjoint" } else { "transpose" };
        format!("{name}({})", self.inner.label())
    }
}

fn swap_fault(f: SampleFault) -> SampleFault {
    match f {
        SampleFault::DeadRow(i) => SampleFault::DeadColumn(i),
        SampleFault::DeadColumn(i) => SampleFault::DeadRow(i),
        other => other,
    }
}

/// `Σ_l s_l A_l`, choosing term `l` with probability `W(l)`.
pub struct Sum {
    terms: Vec<(C64, Op)>,
    weights: Vec<f64>,
    table: CumulativeTable,
    b: f64,
    pq: NormPair,
    imax: Option<f64>,
}

/// With `weights = None`, `W(l) ∝ |s_l|·b_l` and `b = Σ_l |s_l|·b_l`.
pub fn sum(terms: Vec<(C64, Op)>, weights: Option<Vec<f64>>) -> Result<Sum> {
    let ops: Vec<Op> = terms.iter().map(|(_, o)| Arc::clone(o)).collect();
    let pq = check_same_norm_pair(&ops)?;
    let (rows, cols) = (ops[0].rows(), ops[0].cols());
    if let Some(o) = ops.iter().find(|o| (o.rows(), o.cols()) != (rows, cols)) {
        return Err(Error::ShapeMismatch(format!(
            "{} is {}x{}, expected {rows}x{cols}",
            o.label(),
            o.rows(),
            o.cols()
        )));
    }
    let raw: Vec<f64> = terms.iter().map(|(s, o)| s.norm() * o.bound()).collect();
    let total: f64 = raw.iter().sum();
    let (weights, b) = match weights {
        None if total > 0.0 => (raw.iter().map(|r| r / total).collect::<Vec<_>>(), total),
        None => (vec![1.0 / raw.len() as f64; raw.len()], 0.0),
        Some(w) => {
            if w.len() != raw.len() {
                return Err(Error::InvalidWeights(format!("{} weights for {} terms", w.len(), raw.len())));
            }
            if w.iter().any(|x| !(*x >= 0.0)) || (w.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidWeights(format!("{w:?} is not a probability distribution")));
            }
            let mut b: f64 = 0.0;
            for (l, (&r, &wl)) in raw.iter().zip(&w).enumerate() {
                if r > 0.0 {
                    if wl == 0.0 {
                        return Err(Error::InvalidWeights(format!("term {l} is nonzero but has weight 0")));
                    }
                    b = b.max(r / wl);
                }
            }
            (w, b)
        }
    };
    Ok(Sum {
        table: CumulativeTable::new(weights.iter().copied()),
        terms,
        weights,
        b,
        pq,
        imax: None,
    })
}

impl Sum {
    pub fn with_declared_imax(mut self, imax: f64) -> Self {
        self.imax = Some(imax);
        self
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn pick(&self, rng: &mut RngStream) -> usize {
        self.table.sample(rng).unwrap_or(0)
    }

    fn wrap(&self, l: usize, t: Transition) -> Transition {
        let factor = self.terms[l].0 / self.weights[l];
        Transition {
            index: t.index,
            tag: KTag::Term {
                index: l,
                inner: Box::new(t.tag),
            },
            ratio_p: t.ratio_p * factor,
            ratio_q: t.ratio_q * factor,
        }
    }

    fn support(&self, inner: impl Fn(&Op) -> Result<Vec<SupportTerm>>) -> Result<Vec<SupportTerm>> {
        let mut out = Vec::new();
        for (l, ((s, op), &w)) in self.terms.iter().zip(&self.weights).enumerate() {
            if w == 0.0 || *s == C64::new(0.0, 0.0) {
                continue;
            }
            for t in inner(op)? {
                out.push(SupportTerm {
                    index: t.index,
                    tag: KTag::Term {
                        index: l,
                        inner: Box::new(t.tag),
                    },
                    alpha: t.alpha * s,
                    prob: t.prob * w,
                    dual_prob: t.dual_prob * w,
                });
            }
        }
        check_support_cap(out.len())?;
        Ok(out)
    }
}

impl EpsOperator for Sum {
    fn rows(&self) -> usize {
        self.terms[0].1.rows()
    }
    fn cols(&self) -> usize {
        self.terms[0].1.cols()
    }
    fn bound(&self) -> f64 {
        self.b
    }
    fn norm_pair(&self) -> NormPair {
        self.pq
    }
    fn sample_forward(&self, row: usize, rng: &mut RngStream) -> Draw {
        let l = self.pick(rng);
        let t = self.terms[l].1.sample_forward(row, rng)?;
        Ok(self.wrap(l, t))
    }
    fn sample_backward(&self, col: usize, rng: &mut RngStream) -> Draw {
        let l = self.pick(rng);
        let t = self.terms[l].1.sample_backward(col, rng)?;
        Ok(self.wrap(l, t))
    }
    fn step_forward(&self, row: usize, rng: &mut RngStream) -> StepDraw {
        let l = self.pick(rng);
        let t = self.terms[l].1.step_forward(row, rng)?;
        Ok(t.scaled(self.terms[l].0 / self.weights[l]))
    }
    fn step_backward(&self, col: usize, rng: &mut RngStream) -> StepDraw {
        let l = self.pick(rng);
        let t = self.terms[l].1.step_backward(col, rng)?;
        Ok(t.scaled(self.terms[l].0 / self.weights[l]))
    }
    fn forward_support(&self, row: usize) -> Result<Vec<SupportTerm>> {
        self.support(|op| op.forward_support(row))
    }
    fn backward_support(&self, col: usize) -> Result<Vec<SupportTerm>> {
        self.support(|op| op.backward_support(col))
    }
    fn to_dense(&self) -> Result<ComplexMatrix> {
        let mut acc = ComplexMatrix::zeros(self.rows(), self.cols());
        for (s, op) in &self.terms {
            acc = acc.add(&op.to_dense()?.scale(*s))?;
        }
        Ok(acc)
    }
    fn declared_imax(&self) -> Option<f64> {
        self.imax
    }
    fn label(&self) -> String {
        let parts: Vec<String> = self.terms.iter().map(|(s, o)| format!("{s}*{}", o.label())).collect();
        format!("sum({})", parts.join(" + "))
    }
}

/// `A₁A₂⋯A_L`: forward draws run left to right, backward draws right to left.
pub struct Product {
    factors: Vec<Op>,
    b: f64,
    pq: NormPair,
}

pub fn product(factors: Vec<Op>) -> Result<Product> {
    let pq = check_same_norm_pair(&factors)?;
    for w in factors.windows(2) {
        if w[0].cols() != w[1].rows() {
            return Err(Error::ShapeMismatch(format!(
                "{} ({}x{}) cannot precede {} ({}x{})",
                w[0].label(),
                w[0].rows(),
                w[0].cols(),
                w[1].label(),
                w[1].rows(),
                w[1].cols()
            )));
        }
    }
    let b = factors.iter().map(|f| f.bound()).product();
    Ok(Product { factors, b, pq })
}

impl Product {
    pub fn factors(&self) -> &[Op] {
        &self.factors
    }
}

/// Runs a forward chain through `ops` starting at `start`.
fn chain_forward<'a>(ops: impl Iterator<Item = &'a Op>, start: usize, rng: &mut RngStream) -> Draw {
    let mut index = start;
    let mut ratio_p = C64::new(1.0, 0.0);
    let mut ratio_q = C64::new(1.0, 0.0);
    let mut via = Vec::new();
    let mut tags = Vec::new();
    for (i, op) in ops.enumerate() {
        let t = op.sample_forward(index, rng).map_err(|f| match f {
            SampleFault::DeadRow(_) | SampleFault::DeadColumn(_) => SampleFault::DeadRow(start),
            other => other,
        })?;
        if i > 0 {
            via.push(index);
        }
        index = t.index;
        ratio_p *= t.ratio_p;
        ratio_q *= t.ratio_q;
        tags.push(t.tag);
    }
    Ok(Transition {
        index,
        tag: KTag::Chain { via, tags },
        ratio_p,
        ratio_q,
    })
}

/// Runs a backward chain through `ops` (given right to left) starting at column `start`.
fn chain_backward<'a>(ops: impl Iterator<Item = &'a Op>, start: usize, rng: &mut RngStream) -> Draw {
    let mut index = start;
    let mut ratio_p = C64::new(1.0, 0.0);
    let mut ratio_q = C64::new(1.0, 0.0);
    let mut via = Vec::new();
    let mut tags = Vec::new();
    for (i, op) in ops.enumerate() {
        let t = op.sample_backward(index, rng).map_err(|f| match f {
            SampleFault::DeadRow(_) | SampleFault::DeadColumn(_) => SampleFault::DeadColumn(start),
            other => other,
        })?;
        if i > 0 {
            via.push(index);
        }
        index = t.index;
        ratio_p *= t.ratio_p;
        ratio_q *= t.ratio_q;
        tags.push(t.tag);
    }
    via.reverse();
    tags.reverse();
    Ok(Transition {
        index,
        tag: KTag::Chain { via, tags },
        ratio_p,
        ratio_q,
    })
}

fn chain_step<'a>(ops: impl Iterator<Item = &'a Op>, start: usize, forward: bool, rng: &mut RngStream) -> StepDraw {
    let mut step = Step {
        index: start,
        ratio_p: C64::new(1.0, 0.0),
        ratio_q: C64::new(1.0, 0.0),
    };
    for op in ops {
        let t = if forward {
            op.step_forward(step.index, rng)
        } else {
            op.step_backward(step.index, rng)
        };
        let t = t.map_err(|f| match f {
            SampleFault::DeadRow(_) | SampleFault::DeadColumn(_) if forward => SampleFault::DeadRow(start),
            SampleFault::DeadRow(_) | SampleFault::DeadColumn(_) => SampleFault::DeadColumn(start),
            other => other,
        })?;
        step = Step {
            index: t.index,
            ratio_p: step.ratio_p * t.ratio_p,
            ratio_q: step.ratio_q * t.ratio_q,
        };
    }
    Ok(step)
}

struct Partial {
    index: usize,
    alpha: C64,
    prob: f64,
    dual_prob: f64,
    via: Vec<usize>,
    tags: Vec<KTag>,
}

/// Expands every chain through `ops`; `forward` selects the supports used at each step.
fn chain_support<'a>(ops: impl Iterator<Item = &'a Op>, start: usize, forward: bool) -> Result<Vec<SupportTerm>> {
    let mut frontier = vec![Partial {
        index: start,
        alpha: C64::new(1.0, 0.0),
        prob: 1.0,
        dual_prob: 1.0,
        via: Vec::new(),
        tags: Vec::new(),
    }];
    for (i, op) in ops.enumerate() {
        let mut next = Vec::new();
        for part in frontier {
            let terms = if forward {
                op.forward_support(part.index)?
            } else {
                op.backward_support(part.index)?
            };
            for t in terms {
                let mut via = part.via.clone();
                if i > 0 {
                    via.push(part.index);
                }
                let mut tags = part.tags.clone();
                tags.push(t.tag);
                next.push(Partial {
                    index: t.index,
                    alpha: part.alpha * t.alpha,
                    prob: part.prob * t.prob,
                    dual_prob: part.dual_prob * t.dual_prob,
                    via,
                    tags,
                });
            }
            check_support_cap(next.len())?;
        }
        frontier = next;
    }
    Ok(frontier
        .into_iter()
        .map(|mut p| {
            if !forward {
                p.via.reverse();
                p.tags.reverse();
            }
            SupportTerm {
                index: p.index,
                tag: KTag::Chain { via: p.via, tags: p.tags },
                alpha: p.alpha,
                prob: p.prob,
                dual_prob: p.dual_prob,
            }
        })
        .collect())
}

impl EpsOperator for Product {
    fn rows(&self) -> usize {
        self.factors[0].rows()
    }
    fn cols(&self) -> usize {
        self.factors[self.factors.len() - 1].cols()
    }
    fn bound(&self) -> f64 {
        self.b
    }
    fn norm_pair(&self) -> NormPair {
        self.pq
    }
    fn sample_forward(&self, row: usize, rng: &mut RngStream) -> Draw {
        chain_forward(self.factors.iter(), row, rng)
    }
    fn sample_backward(&self, col: usize, rng: &mut RngStream) -> Draw {
        chain_backward(self.factors.iter().rev(), col, rng)
    }
    fn step_forward(&self, row: usize, rng: &mut RngStream) -> StepDraw {
        chain_step(self.factors.iter(), row, true, rng)
    }
    fn step_backward(&self, col: usize, rng: &mut RngStream) -> StepDraw {
        chain_step(self.factors.iter().rev(), col, false, rng)
    }
    fn forward_support(&self, row: usize) -> Result<Vec<SupportTerm>> {
        chain_support(self.factors.iter(), row, true)
    }
    fn backward_support(&self, col: usize) -> Result<Vec<SupportTerm>> {
        chain_support(self.factors.iter().rev(), col, false)
    }
    fn to_dense(&self) -> Result<ComplexMatrix> {
        let mut acc = self.factors[0].to_dense()?;
        for f in &self.factors[1..] {
            acc = acc.matmul(&f.to_dense()?)?;
        }
        Ok(acc)
    }
    fn label(&self) -> String {
        let parts: Vec<String> = self.factors.iter().map(|f| f.label()).collect();
        format!("product({})", parts.join(", "))
    }
}

/// `e^A = Σ_l A^l/l!` with `W(l) = b_A^l/(l!·e^{b_A})`, so each path carries `e^{b_A}/b_A^l`.
pub struct Exp {
    inner: Op,
    b_inner: f64,
    b: f64,
}

pub fn exp(inner: Op) -> Result<Exp> {
    if inner.rows() != inner.cols() {
        return Err(Error::ShapeMismatch(format!(
            "exp of a {}x{} operator",
            inner.rows(),
            inner.cols()
        )));
    }
    let b_inner = inner.bound();
    Ok(Exp {
        b: b_inner.exp(),
        b_inner,
        inner,
    })
}

impl Exp {
    /// Largest power kept when enumerating; the discarded tail is below `1e-15` in total weight.
    fn enumeration_depth(&self) -> usize {
        let mut w = (-self.b_inner).exp();
        let mut tail = 1.0 - w;
        let mut l = 0;
        while tail * self.b > 1e-15 && l < 400 {
            l += 1;
            w *= self.b_inner / l as f64;
            tail -= w;
        }
        l
    }

    fn factor(&self, l: usize) -> f64 {
        self.b / self.b_inner.powi(l as i32)
    }

    fn wrap(&self, l: usize, t: Transition) -> Transition {
        let f = self.factor(l);
        Transition {
            index: t.index,
            tag: KTag::Term {
                index: l,
                inner: Box::new(t.tag),
            },
            ratio_p: t.ratio_p * f,
            ratio_q: t.ratio_q * f,
        }
    }

    fn support(&self, start: usize, forward: bool) -> Result<Vec<SupportTerm>> {
        let mut out = Vec::new();
        let mut weight = (-self.b_inner).exp();
        let mut inv_factorial = 1.0;
        for l in 0..=self.enumeration_depth() {
            if l > 0 {
                weight *= self.b_inner / l as f64;
                inv_factorial /= l as f64;
            }
            let copies = std::iter::repeat(&self.inner).take(l);
            for t in chain_support(copies, start, forward)? {
                out.push(SupportTerm {
                    index: t.index,
                    tag: KTag::Term {
                        index: l,
                        inner: Box::new(t.tag),
                    },
                    alpha: t.alpha * inv_factorial,
                    prob: t.prob * weight,
                    dual_prob: t.dual_prob * weight,
                });
            }
            check_support_cap(out.len())?;
        }
        Ok(out)
    }
}

impl EpsOperator for Exp {
    fn rows(&self) -> usize {
        self.inner.rows()
    }
    fn cols(&self) -> usize {
        self.inner.cols()
    }
    fn bound(&self) -> f64 {
        self.b
    }
    fn norm_pair(&self) -> NormPair {
        self.inner.norm_pair()
    }
    fn sample_forward(&self, row: usize, rng: &mut RngStream) -> Draw {
        let l = sample_poisson_like_tail(self.b_inner, rng);
        let t = chain_forward(std::iter::repeat(&self.inner).take(l), row, rng)?;
        Ok(self.wrap(l, t))
    }
    fn sample_backward(&self, col: usize, rng: &mut RngStream) -> Draw {
        let l = sample_poisson_like_tail(self.b_inner, rng);
        let t = chain_backward(std::iter::repeat(&self.inner).take(l), col, rng)?;
        Ok(self.wrap(l, t))
    }
    fn step_forward(&self, row: usize, rng: &mut RngStream) -> StepDraw {
        let l = sample_poisson_like_tail(self.b_inner, rng);
        let t = chain_step(std::iter::repeat(&self.inner).take(l), row, true, rng)?;
        Ok(t.scaled(C64::new(self.factor(l), 0.0)))
    }
    fn step_backward(&self, col: usize, rng: &mut RngStream) -> StepDraw {
        let l = sample_poisson_like_tail(self.b_inner, rng);
        let t = chain_step(std::iter::repeat(&self.inner).take(l), col, false, rng)?;
        Ok(t.scaled(C64::new(self.factor(l), 0.0)))
    }
    fn forward_support(&self, row: usize) -> Result<Vec<SupportTerm>> {
        self.support(row, true)
    }
    fn backward_support(&self, col: usize) -> Result<Vec<SupportTerm>> {
        self.support(col, false)
    }
    fn to_dense(&self) -> Result<ComplexMatrix> {
        dense_exp(&self.inner.to_dense()?)
    }
    fn label(&self) -> String {
        format!("exp({})", self.inner.label())
    }
}

/// `I − 2|+⟩⟨+|^{⊗n}` assembled as `identity + scale(−2, dyad)`, so `b = 3`.
pub fn grover_reflection(n_qubits: usize, pq: NormPair) -> Result<Sum> {
    if n_qubits == 0 || n_qubits >= 31 {
        return Err(Error::InvalidParameter(format!("Grover reflection on {n_qubits} qubits")));
    }
    let dim = 1usize << n_qubits;
    let plus: Arc<dyn crate::eht::CtState> = Arc::new(uniform_state(dim)?);
    let projector: Op = Arc::new(EhtAsEps::new(Arc::new(dyad(plus.clone(), plus, pq)?)));
    let one = C64::new(1.0, 0.0);
    let terms: Vec<(C64, Op)> = vec![
        (one, Arc::new(Identity::new(dim, pq))),
        (one, Arc::new(scale(C64::new(-2.0, 0.0), projector))),
    ];
    let imax = if dim >= 2 { 3.0 - 4.0 / dim as f64 } else { 1.0 };
    Ok(sum(terms, None)?.with_declared_imax(imax))
}
