use std::f64::consts::FRAC_1_SQRT_2;

use super::{Draw, EpsOperator, KTag, SupportTerm, Transition};
use crate::error::{Error, Result};
use crate::linalg::{dense_guard, ComplexMatrix, NormPair, C64};
use crate::sampler::RngStream;

/// Haar wavelet transform `G_n = (|0⟩⟨+|)^{⊗n} + Σ_m (|0⟩⟨+|)^{⊗m} ⊗ |1⟩⟨−| ⊗ I^{⊗(n−m−1)}`.
///
/// Qubit 0 is the most significant bit of an index. Row `x` is driven by the first qubit `m`
/// with `x_m = 1`; its nonzero columns leave `y_0..y_m` free and copy the remaining bits.
/// Forward draws are uniform over those columns, backward draws uniform over the `n + 1`
/// nonzero rows of a column, giving `b = √(n+1)` at `p = 2`.
pub struct HaarWavelet {
    n: usize,
    pq: NormPair,
}

impl HaarWavelet {
    pub fn new(n_qubits: usize, pq: NormPair) -> Result<Self> {
        if n_qubits == 0 || n_qubits >= 62 {
            return Err(Error::InvalidParameter(format!("Haar transform on {n_qubits} qubits")));
        }
        Ok(Self { n: n_qubits, pq })
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    /// Pivot qubit of row `x`, or `None` for `x = 0`.
    fn pivot(&self, x: usize) -> Option<usize> {
        (x != 0).then(|| self.n - 1 - (usize::BITS - 1 - x.leading_zeros()) as usize)
    }

    /// Bits below the pivot, which the transform copies.
    fn low_mask(&self, m: usize) -> usize {
        (1usize << (self.n - 1 - m)) - 1
    }

    /// `(α, P(y|x))` for a column `y` in the support of row `x`.
    fn entry_on_support(&self, x: usize, y: usize) -> (C64, f64) {
        match self.pivot(x) {
            None => {
                let p = 0.5f64.powi(self.n as i32);
                (C64::new(p.sqrt(), 0.0), p)
            }
            Some(m) => {
                let p = 0.5f64.powi(m as i32 + 1);
                let y_m = (y >> (self.n - 1 - m)) & 1;
                let a = if y_m == 0 { p.sqrt() } else { -p.sqrt() };
                (C64::new(a, 0.0), p)
            }
        }
    }

    fn backward_prob(&self) -> f64 {
        1.0 / (self.n + 1) as f64
    }

    fn row_of_term(&self, t: usize, y: usize) -> usize {
        if t == self.n {
            0
        } else {
            (1usize << (self.n - 1 - t)) | (y & self.low_mask(t))
        }
    }

    fn transition(&self, x: usize, y: usize, index: usize) -> Transition {
        let (a, p) = self.entry_on_support(x, y);
        Transition::unit(index, a / p, a / self.backward_prob())
    }
}

impl EpsOperator for HaarWavelet {
    fn rows(&self) -> usize {
        1 << self.n
    }

    fn cols(&self) -> usize {
        1 << self.n
    }

    /// `max_P P^{1/2−1/p}·(n+1)^{1/q}` over the forward probabilities `P ∈ {2⁻¹, …, 2⁻ⁿ}`,
    /// which is `√(n+1)` at `p = 2`.
    fn bound(&self) -> f64 {
        let exponent = 0.5 - self.pq.inv_p();
        let extreme = if exponent >= 0.0 { 0.5f64 } else { 0.5f64.powi(self.n as i32) };
        extreme.powf(exponent) * ((self.n + 1) as f64).powf(self.pq.inv_q())
    }

    fn norm_pair(&self) -> NormPair {
        self.pq
    }

    fn sample_forward(&self, row: usize, rng: &mut RngStream) -> Draw {
        let y = match self.pivot(row) {
            None => rng.below(1 << self.n),
            Some(m) => {
                let free = rng.below(1 << (m + 1));
                (free << (self.n - 1 - m)) | (row & self.low_mask(m))
            }
        };
        Ok(self.transition(row, y, y))
    }

    fn sample_backward(&self, col: usize, rng: &mut RngStream) -> Draw {
        let x = self.row_of_term(rng.below(self.n + 1), col);
        Ok(self.transition(x, col, x))
    }

    fn forward_support(&self, row: usize) -> Result<Vec<SupportTerm>> {
        let ys: Vec<usize> = match self.pivot(row) {
            None => (0..1 << self.n).collect(),
            Some(m) => (0..1usize << (m + 1))
                .map(|free| (free << (self.n - 1 - m)) | (row & self.low_mask(m)))
                .collect(),
        };
        super::check_support_cap(ys.len())?;
        Ok(ys
            .into_iter()
            .map(|y| {
                let (alpha, prob) = self.entry_on_support(row, y);
                SupportTerm {
                    index: y,
                    tag: KTag::Unit,
                    alpha,
                    prob,
                    dual_prob: self.backward_prob(),
                }
            })
            .collect())
    }

    fn backward_support(&self, col: usize) -> Result<Vec<SupportTerm>> {
        Ok((0..=self.n)
            .map(|t| {
                let x = self.row_of_term(t, col);
                let (alpha, p) = self.entry_on_support(x, col);
                SupportTerm {
                    index: x,
                    tag: KTag::Unit,
                    alpha,
                    prob: self.backward_prob(),
                    dual_prob: p,
                }
            })
            .collect())
    }

    /// Evaluates the tensor-sum definition entry by entry.
    fn to_dense(&self) -> Result<ComplexMatrix> {
        dense_guard(self.rows(), self.cols())?;
        let n = self.n;
        let bit = |v: usize, i: usize| (v >> (n - 1 - i)) & 1;
        // |0⟩⟨+| and |1⟩⟨−| as 2×2 tables indexed [row bit][col bit].
        let zero_plus = [[FRAC_1_SQRT_2, FRAC_1_SQRT_2], [0.0, 0.0]];
        let one_minus = [[0.0, 0.0], [FRAC_1_SQRT_2, -FRAC_1_SQRT_2]];
        Ok(ComplexMatrix::from_fn(1 << n, 1 << n, |x, y| {
            let mut total = (0..n).map(|i| zero_plus[bit(x, i)][bit(y, i)]).product::<f64>();
            for m in 0..n {
                let head: f64 = (0..m).map(|i| zero_plus[bit(x, i)][bit(y, i)]).product();
                let tail = (m + 1..n).all(|i| bit(x, i) == bit(y, i));
                if tail {
                    total += head * one_minus[bit(x, m)][bit(y, m)];
                }
            }
            C64::new(total, 0.0)
        }))
    }

    fn declared_imax(&self) -> Option<f64> {
        self.pq.is_two().then(|| self.bound())
    }

    fn label(&self) -> String {
        format!("haar({})", self.n)
    }
}
