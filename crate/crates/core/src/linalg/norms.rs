use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::matrix::{ComplexMatrix, SparseEntries, C64};
use crate::error::{Error, Result};

pub const POWER_TOLERANCE: f64 = 1e-12;
pub const POWER_MAX_ITERATIONS: usize = 10_000;
const VECTOR_TOLERANCE: f64 = 1e-11;
const RANDOM_RESTARTS: usize = 3;
const RESTART_SEED: u64 = 0x0dd5_eed5;

/// Hölder-dual exponents with `1/p + 1/q = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormPair {
    p: f64,
    q: f64,
}

impl Default for NormPair {
    fn default() -> Self {
        Self::TWO
    }
}

impl NormPair {
    pub const TWO: NormPair = NormPair { p: 2.0, q: 2.0 };

    /// `p = ∞, q = 1`: the column-stochastic regime.
    pub const STOCHASTIC: NormPair = NormPair {
        p: f64::INFINITY,
        q: 1.0,
    };

    pub fn new(p: f64) -> Result<Self> {
        if !(p >= 1.0) {
            return Err(Error::InvalidParameter(format!("p = {p} must lie in [1, inf]")));
        }
        Ok(Self { p, q: dual_exponent(p) })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn inv_p(&self) -> f64 {
        1.0 / self.p
    }

    pub fn inv_q(&self) -> f64 {
        1.0 / self.q
    }

    pub fn dual(&self) -> Self {
        Self { p: self.q, q: self.p }
    }

    pub fn is_two(&self) -> bool {
        self.p == 2.0
    }

    pub(crate) fn ensure_eq(&self, other: &NormPair) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::NormPairMismatch {
                p_a: self.p,
                q_a: self.q,
                p_b: other.p,
                q_b: other.q,
            })
        }
    }
}

pub fn dual_exponent(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}

/// `‖x‖_r` for nonnegative `x`, including `r = ∞`.
pub fn lp_norm(x: &[f64], r: f64) -> f64 {
    if r.is_infinite() {
        x.iter().fold(0.0, |a, &b| a.max(b.abs()))
    } else if r == 1.0 {
        x.iter().map(|v| v.abs()).sum()
    } else if r == 2.0 {
        x.iter().map(|v| v * v).sum::<f64>().sqrt()
    } else {
        x.iter().map(|v| v.abs().powf(r)).sum::<f64>().powf(1.0 / r)
    }
}

pub fn entrywise_abs(a: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix::from_fn(a.rows(), a.cols(), |m, n| C64::new(a[(m, n)].norm(), 0.0))
}

/// Positive vectors attaining the induced norm, assembled over connected components.
#[derive(Debug, Clone, PartialEq)]
pub struct PositiveVectorPair {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub norm_estimate: f64,
}

/// Connected component of the bipartite row/column support graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
}

/// Nonnegative real matrix in triplet form.
#[derive(Debug, Clone)]
pub(crate) struct NonnegSparse {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<(usize, usize, f64)>,
}

impl NonnegSparse {
    pub fn from_matrix(b: &ComplexMatrix) -> Result<Self> {
        let mut entries = Vec::new();
        for m in 0..b.rows() {
            for n in 0..b.cols() {
                let z = b[(m, n)];
                if z.im != 0.0 || z.re < 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "entry ({m}, {n}) = {z} is not a nonnegative real"
                    )));
                }
                if z.re > 0.0 {
                    entries.push((m, n, z.re));
                }
            }
        }
        Ok(Self {
            rows: b.rows(),
            cols: b.cols(),
            entries,
        })
    }

    pub fn abs_of(s: &SparseEntries) -> Self {
        Self {
            rows: s.rows(),
            cols: s.cols(),
            entries: s
                .triplets()
                .iter()
                .filter(|t| t.2.norm() > 0.0)
                .map(|&(m, n, z)| (m, n, z.norm()))
                .collect(),
        }
    }

    fn mul(&self, v: &[f64]) -> Vec<f64> {
        let mut w = vec![0.0; self.rows];
        for &(m, n, x) in &self.entries {
            w[m] += x * v[n];
        }
        w
    }

    fn tmul(&self, u: &[f64]) -> Vec<f64> {
        let mut z = vec![0.0; self.cols];
        for &(m, n, x) in &self.entries {
            z[n] += x * u[m];
        }
        z
    }

    fn row_sums(&self) -> Vec<f64> {
        self.mul(&vec![1.0; self.cols])
    }

    fn col_sums(&self) -> Vec<f64> {
        self.tmul(&vec![1.0; self.rows])
    }

    pub fn blocks(&self) -> Vec<Block> {
        let mut parent: Vec<usize> = (0..self.rows + self.cols).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for &(m, n, _) in &self.entries {
            let (a, b) = (find(&mut parent, m), find(&mut parent, self.rows + n));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
        let mut index_of_root = std::collections::HashMap::new();
        let mut blocks: Vec<Block> = Vec::new();
        for node in 0..self.rows + self.cols {
            let root = find(&mut parent, node);
            let id = *index_of_root.entry(root).or_insert_with(|| {
                blocks.push(Block {
                    rows: Vec::new(),
                    cols: Vec::new(),
                });
                blocks.len() - 1
            });
            if node < self.rows {
                blocks[id].rows.push(node);
            } else {
                blocks[id].cols.push(node - self.rows);
            }
        }
        blocks
    }

    /// Restriction to a block, reindexed locally.
    fn restrict(&self, block: &Block) -> Self {
        let mut row_pos = vec![usize::MAX; self.rows];
        let mut col_pos = vec![usize::MAX; self.cols];
        for (i, &m) in block.rows.iter().enumerate() {
            row_pos[m] = i;
        }
        for (j, &n) in block.cols.iter().enumerate() {
            col_pos[n] = j;
        }
        let entries = self
            .entries
            .iter()
            .filter(|e| row_pos[e.0] != usize::MAX && col_pos[e.1] != usize::MAX)
            .map(|&(m, n, x)| (row_pos[m], col_pos[n], x))
            .collect();
        Self {
            rows: block.rows.len(),
            cols: block.cols.len(),
            entries,
        }
    }

    pub fn induced_norm(&self, q: f64) -> Result<f64> {
        if !(q >= 1.0) {
            return Err(Error::InvalidParameter(format!("q = {q} must lie in [1, inf]")));
        }
        if q == 1.0 {
            return Ok(self.col_sums().into_iter().fold(0.0, f64::max));
        }
        if q.is_infinite() {
            return Ok(self.row_sums().into_iter().fold(0.0, f64::max));
        }
        let pq = NormPair::new(dual_exponent(q))?;
        Ok(self.singular_vectors(pq)?.norm_estimate)
    }

    pub fn singular_vectors(&self, pq: NormPair) -> Result<PositiveVectorPair> {
        if !pq.p().is_finite() || pq.p() == 1.0 {
            return Err(Error::InvalidParameter(format!(
                "generalized singular vectors need p in (1, inf), got {}",
                pq.p()
            )));
        }
        let mut u = vec![1.0; self.rows];
        let mut v = vec![1.0; self.cols];
        let mut norm = 0.0_f64;
        let mut failure: Option<(f64, usize)> = None;
        for block in self.blocks() {
            if block.rows.is_empty() || block.cols.is_empty() {
                continue;
            }
            let sub = self.restrict(&block);
            let fp = sub.solve_component(pq);
            norm = norm.max(fp.lambda);
            if !fp.converged {
                let best = failure.map_or(fp.lambda, |(b, _)| b.max(fp.lambda));
                failure = Some((best, POWER_MAX_ITERATIONS));
            }
            for (i, &m) in block.rows.iter().enumerate() {
                u[m] = fp.u[i];
            }
            for (j, &n) in block.cols.iter().enumerate() {
                v[n] = fp.v[j];
            }
        }
        if let Some((best, iterations)) = failure {
            return Err(Error::IterationLimit {
                best: best.max(norm),
                iterations,
            });
        }
        Ok(PositiveVectorPair {
            u,
            v,
            norm_estimate: norm,
        })
    }

    fn solve_component(&self, pq: NormPair) -> FixedPoint {
        let uniform = vec![1.0; self.cols];
        let mut best = self.power_iterate(pq, uniform);
        if pq.is_two() || self.cols == 1 {
            return best;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(RESTART_SEED);
        for _ in 0..RANDOM_RESTARTS {
            let start: Vec<f64> = (0..self.cols).map(|_| rng.random_range(0.1..1.0)).collect();
            let fp = self.power_iterate(pq, start);
            if fp.lambda > best.lambda {
                best = fp;
            }
        }
        best
    }

    /// Alternates `u ∝ (Bv)^{q/p}` and `v ∝ (Bᵀu)^{p/q}` from a positive start.
    fn power_iterate(&self, pq: NormPair, start: Vec<f64>) -> FixedPoint {
        let (p, q) = (pq.p(), pq.q());
        let (to_u, to_v) = (q / p, p / q);
        let normalize = |x: Vec<f64>, r: f64, expo: f64| -> Vec<f64> {
            let s = lp_norm(&x, r);
            if expo == 1.0 {
                x.into_iter().map(|t| t / s).collect()
            } else {
                x.into_iter().map(|t| (t / s).powf(expo)).collect()
            }
        };
        let mut v = normalize(start, q, 1.0);
        let mut last = 0.0;
        let mut converged = false;
        for _ in 0..POWER_MAX_ITERATIONS {
            let w = self.mul(&v);
            let lambda = lp_norm(&w, q);
            let u = normalize(w, q, to_u);
            let next = normalize(self.tmul(&u), p, to_v);
            let dv = next.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            v = next;
            let settled = (lambda - last).abs() <= POWER_TOLERANCE * lambda;
            last = lambda;
            if settled {
                converged = true;
                if dv <= VECTOR_TOLERANCE {
                    break;
                }
            } else {
                converged = false;
            }
        }
        let w = self.mul(&v);
        let lambda = lp_norm(&w, q);
        let u = normalize(w, q, to_u);
        FixedPoint {
            u,
            v,
            lambda,
            converged,
        }
    }
}

struct FixedPoint {
    u: Vec<f64>,
    v: Vec<f64>,
    lambda: f64,
    converged: bool,
}

/// Induced `ℓq → ℓq` norm of a nonnegative matrix.
pub fn induced_norm(b: &ComplexMatrix, q: f64) -> Result<f64> {
    NonnegSparse::from_matrix(b)?.induced_norm(q)
}

/// Components of the support graph; zero rows and columns come back as singletons.
pub fn block_decompose(b: &ComplexMatrix) -> Vec<Block> {
    let abs = NonnegSparse {
        rows: b.rows(),
        cols: b.cols(),
        entries: (0..b.rows())
            .flat_map(|m| (0..b.cols()).map(move |n| (m, n)))
            .filter(|&(m, n)| b[(m, n)].norm() > 0.0)
            .map(|(m, n)| (m, n, b[(m, n)].norm()))
            .collect(),
    };
    abs.blocks()
}

pub fn generalized_singular_vectors(b: &ComplexMatrix, pq: NormPair) -> Result<PositiveVectorPair> {
    NonnegSparse::from_matrix(b)?.singular_vectors(pq)
}
