use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use super::{Draw, EpsOperator, KTag, SupportTerm, Transition};
use crate::error::{Error, Result};
use crate::linalg::{dense_guard, ComplexMatrix, NormPair, C64};
use crate::sampler::RngStream;

type Function = Arc<dyn Fn(usize) -> usize + Send + Sync>;

const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// `O_g|x, y⟩ = |x, y + g(x) mod |Y|⟩` on the index `x·|Y| + y`.
///
/// Every evaluation of `g` bumps a shared query counter.
pub struct OracleOp {
    x_dim: usize,
    y_dim: usize,
    g: Function,
    queries: Arc<AtomicU64>,
    pq: NormPair,
}

impl OracleOp {
    pub fn new(
        x_dim: usize,
        y_dim: usize,
        g: impl Fn(usize) -> usize + Send + Sync + 'static,
        pq: NormPair,
    ) -> Result<Self> {
        if x_dim == 0 || y_dim == 0 {
            return Err(Error::InvalidParameter(format!("oracle domain {x_dim}x{y_dim}")));
        }
        Ok(Self {
            x_dim,
            y_dim,
            g: Arc::new(g),
            queries: Arc::new(AtomicU64::new(0)),
            pq,
        })
    }

    pub fn from_table(table: Vec<usize>, y_dim: usize, pq: NormPair) -> Result<Self> {
        let x_dim = table.len();
        Self::new(x_dim, y_dim, move |x| table[x], pq)
    }

    /// Shares an existing counter, e.g. across several oracle calls in one circuit.
    pub fn with_counter(mut self, queries: Arc<AtomicU64>) -> Self {
        self.queries = queries;
        self
    }

    pub fn counter(&self) -> Arc<AtomicU64> {
        Arc::clone(&self.queries)
    }

    pub fn queries(&self) -> u64 {
        self.queries.load(Ordering::Relaxed)
    }

    fn shift(&self, x: usize) -> usize {
        self.queries.fetch_add(1, Ordering::Relaxed);
        (self.g)(x) % self.y_dim
    }

    fn split(&self, i: usize) -> (usize, usize) {
        (i / self.y_dim, i % self.y_dim)
    }

    fn row_to_col(&self, row: usize) -> usize {
        let (x, y) = self.split(row);
        x * self.y_dim + (y + self.y_dim - self.shift(x)) % self.y_dim
    }

    fn col_to_row(&self, col: usize) -> usize {
        let (x, y) = self.split(col);
        x * self.y_dim + (y + self.shift(x)) % self.y_dim
    }
}

fn unit(index: usize) -> SupportTerm {
    SupportTerm {
        index,
        tag: KTag::Unit,
        alpha: ONE,
        prob: 1.0,
        dual_prob: 1.0,
    }
}

impl EpsOperator for OracleOp {
    fn rows(&self) -> usize {
        self.x_dim * self.y_dim
    }

    fn cols(&self) -> usize {
        self.x_dim * self.y_dim
    }

    fn bound(&self) -> f64 {
        1.0
    }

    fn norm_pair(&self) -> NormPair {
        self.pq
    }

    fn sample_forward(&self, row: usize, _: &mut RngStream) -> Draw {
        Ok(Transition::unit(self.row_to_col(row), ONE, ONE))
    }

    fn sample_backward(&self, col: usize, _: &mut RngStream) -> Draw {
        Ok(Transition::unit(self.col_to_row(col), ONE, ONE))
    }

    fn forward_support(&self, row: usize) -> Result<Vec<SupportTerm>> {
        Ok(vec![unit(self.row_to_col(row))])
    }

    fn backward_support(&self, col: usize) -> Result<Vec<SupportTerm>> {
        Ok(vec![unit(self.col_to_row(col))])
    }

    fn to_dense(&self) -> Result<ComplexMatrix> {
        dense_guard(self.rows(), self.cols())?;
        let mut a = ComplexMatrix::zeros(self.rows(), self.cols());
        for x in 0..self.x_dim {
            let shift = self.shift(x);
            for y in 0..self.y_dim {
                a[(x * self.y_dim + (y + shift) % self.y_dim, x * self.y_dim + y)] = ONE;
            }
        }
        Ok(a)
    }

    fn declared_imax(&self) -> Option<f64> {
        Some(1.0)
    }

    fn label(&self) -> String {
        format!("oracle({}x{})", self.x_dim, self.y_dim)
    }
}
