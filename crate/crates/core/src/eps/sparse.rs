use super::{ratio, Draw, EpsOperator, KTag, SampleFault, SupportTerm, Transition};
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, NonnegSparse, NormPair, SparseEntries, C64};
use crate::sampler::{CumulativeTable, RngStream};

/// Explicitly stored operator with `P(n|m) ∝ |A_mn| v_n` and `Q(m|n) ∝ |A_mn| u_m`.
///
/// Uniform `u`, `v` give the row/column-sum construction; generalized singular vectors give
/// the norm-optimal one.
pub struct SparseEps {
    rows: usize,
    cols: usize,
    pq: NormPair,
    b: f64,
    u: Vec<f64>,
    v: Vec<f64>,
    row_entries: Vec<Vec<(usize, C64)>>,
    row_tables: Vec<CumulativeTable>,
    col_entries: Vec<Vec<(usize, C64)>>,
    col_tables: Vec<CumulativeTable>,
    imax: Option<f64>,
    label: String,
}

impl SparseEps {
    fn build(s: &SparseEntries, pq: NormPair, u: Vec<f64>, v: Vec<f64>, label: String) -> Self {
        let row_entries: Vec<Vec<(usize, C64)>> = (0..s.rows())
            .map(|m| s.row_entries(m).filter(|e| e.1.norm() > 0.0).collect())
            .collect();
        let col_entries: Vec<Vec<(usize, C64)>> = (0..s.cols())
            .map(|n| s.col_entries(n).filter(|e| e.1.norm() > 0.0).collect())
            .collect();
        let row_tables = row_entries
            .iter()
            .map(|es| CumulativeTable::new(es.iter().map(|&(n, a)| a.norm() * v[n])))
            .collect();
        let col_tables = col_entries
            .iter()
            .map(|es| CumulativeTable::new(es.iter().map(|&(m, a)| a.norm() * u[m])))
            .collect();
        let mut op = Self {
            rows: s.rows(),
            cols: s.cols(),
            pq,
            b: 0.0,
            u,
            v,
            row_entries,
            row_tables,
            col_entries,
            col_tables,
            imax: None,
            label,
        };
        op.b = op.max_cost();
        op
    }

    fn forward_prob(&self, m: usize, n: usize, a: C64) -> f64 {
        a.norm() * self.v[n] / self.row_tables[m].total()
    }

    fn backward_prob(&self, m: usize, n: usize, a: C64) -> f64 {
        a.norm() * self.u[m] / self.col_tables[n].total()
    }

    fn max_cost(&self) -> f64 {
        let mut b: f64 = 0.0;
        for (m, es) in self.row_entries.iter().enumerate() {
            for &(n, a) in es {
                let p = self.forward_prob(m, n, a);
                let q = self.backward_prob(m, n, a);
                b = b.max(a.norm() / (p.powf(self.pq.inv_p()) * q.powf(self.pq.inv_q())));
            }
        }
        b
    }

    pub fn with_declared_imax(mut self, imax: f64) -> Self {
        self.imax = Some(imax);
        self
    }

    fn transition(&self, m: usize, n: usize, a: C64, index: usize) -> Transition {
        Transition::unit(
            index,
            ratio(a, self.forward_prob(m, n, a)),
            ratio(a, self.backward_prob(m, n, a)),
        )
    }
}

impl EpsOperator for SparseEps {
    fn rows(&self) -> usize {
        self.rows
    }

    fn cols(&self) -> usize {
        self.cols
    }

    fn bound(&self) -> f64 {
        self.b
    }

    fn norm_pair(&self) -> NormPair {
        self.pq
    }

    fn sample_forward(&self, row: usize, rng: &mut RngStream) -> Draw {
        let j = self.row_tables[row].sample(rng).ok_or(SampleFault::DeadRow(row))?;
        let (n, a) = self.row_entries[row][j];
        Ok(self.transition(row, n, a, n))
    }

    fn sample_backward(&self, col: usize, rng: &mut RngStream) -> Draw {
        let j = self.col_tables[col].sample(rng).ok_or(SampleFault::DeadColumn(col))?;
        let (m, a) = self.col_entries[col][j];
        Ok(self.transition(m, col, a, m))
    }

    fn forward_support(&self, row: usize) -> Result<Vec<SupportTerm>> {
        Ok(self.row_entries[row]
            .iter()
            .map(|&(n, a)| SupportTerm {
                index: n,
                tag: KTag::Unit,
                alpha: a,
                prob: self.forward_prob(row, n, a),
                dual_prob: self.backward_prob(row, n, a),
            })
            .collect())
    }

    fn backward_support(&self, col: usize) -> Result<Vec<SupportTerm>> {
        Ok(self.col_entries[col]
            .iter()
            .map(|&(m, a)| SupportTerm {
                index: m,
                tag: KTag::Unit,
                alpha: a,
                prob: self.backward_prob(m, col, a),
                dual_prob: self.forward_prob(m, col, a),
            })
            .collect())
    }

    fn to_dense(&self) -> Result<ComplexMatrix> {
        let mut a = ComplexMatrix::zeros(self.rows, self.cols);
        for (m, es) in self.row_entries.iter().enumerate() {
            for &(n, z) in es {
                a[(m, n)] = z;
            }
        }
        Ok(a)
    }

    fn declared_imax(&self) -> Option<f64> {
        self.imax
    }

    fn label(&self) -> String {
        self.label.clone()
    }
}

/// Norm-optimal distributions from the generalized singular vectors of `Ā`.
///
/// At `p ∈ {1, ∞}` the optimum is the row/column-sum law; zero rows and columns stay dead.
pub fn from_dense_optimal(a: &ComplexMatrix, pq: NormPair) -> Result<SparseEps> {
    optimal_from_sparse(&SparseEntries::from_dense(a), pq)
}

pub(crate) fn optimal_from_sparse(s: &SparseEntries, pq: NormPair) -> Result<SparseEps> {
    let (u, v) = if pq.p() == 1.0 || pq.p().is_infinite() {
        (vec![1.0; s.rows()], vec![1.0; s.cols()])
    } else {
        let gsv = NonnegSparse::abs_of(s).singular_vectors(pq)?;
        (gsv.u, gsv.v)
    };
    Ok(SparseEps::build(s, pq, u, v, format!("dense_optimal({}x{})", s.rows(), s.cols())))
}

/// Row-sum/column-sum distributions; `b = ‖A‖_∞^{1/p}·‖A‖₁^{1/q}`.
pub fn from_rowcol(a: &ComplexMatrix, pq: NormPair) -> Result<SparseEps> {
    sparse_ecs(&SparseEntries::from_dense(a), pq)
}

pub fn sparse_ecs(s: &SparseEntries, pq: NormPair) -> Result<SparseEps> {
    let mut row_sum = vec![0.0; s.rows()];
    let mut col_sum = vec![0.0; s.cols()];
    for &(m, n, z) in s.triplets() {
        row_sum[m] += z.norm();
        col_sum[n] += z.norm();
    }
    if let Some(m) = row_sum.iter().position(|&r| r == 0.0) {
        return Err(Error::DeadRow(m));
    }
    if let Some(n) = col_sum.iter().position(|&c| c == 0.0) {
        return Err(Error::DeadColumn(n));
    }
    let mut op = SparseEps::build(
        s,
        pq,
        vec![1.0; s.rows()],
        vec![1.0; s.cols()],
        format!("rowcol({}x{})", s.rows(), s.cols()),
    );
    let max_row = row_sum.iter().cloned().fold(0.0, f64::max);
    let max_col = col_sum.iter().cloned().fold(0.0, f64::max);
    op.b = max_row.powf(pq.inv_p()) * max_col.powf(pq.inv_q());
    Ok(op)
}
