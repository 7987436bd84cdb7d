use std::f64::consts::PI;
use std::sync::Arc;

use super::{check_same_norm_pair, Draw, EpsOperator, Op, SampleFault, StepDraw, SupportTerm, Transition};
use crate::eht::{dyad, phase_state, CtState, EhtAsEps};
use crate::error::{Error, Result};
use crate::linalg::{dense_guard, ComplexMatrix, NormPair};
use crate::sampler::RngStream;

/// Block-diagonal operator under explicit global ↔ (block, local) index maps.
pub struct BlockDiagonal {
    blocks: Vec<Op>,
    row_map: Vec<(usize, usize)>,
    col_map: Vec<(usize, usize)>,
    row_inv: Vec<Vec<usize>>,
    col_inv: Vec<Vec<usize>>,
    b: f64,
    pq: NormPair,
}

fn invert(map: &[(usize, usize)], sizes: &[usize], what: &str) -> Result<Vec<Vec<usize>>> {
    let mut inv: Vec<Vec<usize>> = sizes.iter().map(|&s| vec![usize::MAX; s]).collect();
    for (g, &(r, i)) in map.iter().enumerate() {
        let slot = inv
            .get_mut(r)
            .and_then(|b| b.get_mut(i))
            .ok_or_else(|| Error::IndexMapInconsistent(format!("{what} {g} maps to missing ({r}, {i})")))?;
        if *slot != usize::MAX {
            return Err(Error::IndexMapInconsistent(format!("{what}s {} and {g} both map to ({r}, {i})", *slot)));
        }
        *slot = g;
    }
    for (r, b) in inv.iter().enumerate() {
        if let Some(i) = b.iter().position(|&g| g == usize::MAX) {
            return Err(Error::IndexMapInconsistent(format!("local {what} {i} of block {r} is unreachable")));
        }
    }
    Ok(inv)
}

impl BlockDiagonal {
    pub fn new(blocks: Vec<Op>, row_map: Vec<(usize, usize)>, col_map: Vec<(usize, usize)>) -> Result<Self> {
        let pq = check_same_norm_pair(&blocks)?;
        let row_sizes: Vec<usize> = blocks.iter().map(|b| b.rows()).collect();
        let col_sizes: Vec<usize> = blocks.iter().map(|b| b.cols()).collect();
        let row_inv = invert(&row_map, &row_sizes, "row")?;
        let col_inv = invert(&col_map, &col_sizes, "column")?;
        let b = blocks.iter().map(|o| o.bound()).fold(0.0, f64::max);
        Ok(Self {
            blocks,
            row_map,
            col_map,
            row_inv,
            col_inv,
            b,
            pq,
        })
    }

    /// Consecutive blocks with indices laid out block after block.
    pub fn contiguous(blocks: Vec<Op>) -> Result<Self> {
        let mut row_map = Vec::new();
        let mut col_map = Vec::new();
        for (r, b) in blocks.iter().enumerate() {
            row_map.extend((0..b.rows()).map(|i| (r, i)));
            col_map.extend((0..b.cols()).map(|j| (r, j)));
        }
        Self::new(blocks, row_map, col_map)
    }

    fn lift(&self, block: usize, terms: Vec<SupportTerm>, inv: &[Vec<usize>]) -> Vec<SupportTerm> {
        terms
            .into_iter()
            .map(|mut t| {
                t.index = inv[block][t.index];
                t
            })
            .collect()
    }
}

impl EpsOperator for BlockDiagonal {
    fn rows(&self) -> usize {
        self.row_map.len()
    }
    fn cols(&self) -> usize {
        self.col_map.len()
    }
    fn bound(&self) -> f64 {
        self.b
    }
    fn norm_pair(&self) -> NormPair {
        self.pq
    }
    fn sample_forward(&self, row: usize, rng: &mut RngStream) -> Draw {
        let (r, i) = self.row_map[row];
        let mut t = self.blocks[r].sample_forward(i, rng).map_err(|f| match f {
            SampleFault::NormViolation { .. } => f,
            _ => SampleFault::DeadRow(row),
        })?;
        t.index = self.col_inv[r][t.index];
        Ok(t)
    }
    fn sample_backward(&self, col: usize, rng: &mut RngStream) -> Draw {
        let (r, j) = self.col_map[col];
        let mut t = self.blocks[r].sample_backward(j, rng).map_err(|f| match f {
            SampleFault::NormViolation { .. } => f,
            _ => SampleFault::DeadColumn(col),
        })?;
        t.index = self.row_inv[r][t.index];
        Ok(t)
    }
    fn step_forward(&self, row: usize, rng: &mut RngStream) -> StepDraw {
        let (r, i) = self.row_map[row];
        let mut t = self.blocks[r].step_forward(i, rng).map_err(|f| match f {
            SampleFault::NormViolation { .. } => f,
            _ => SampleFault::DeadRow(row),
        })?;
        t.index = self.col_inv[r][t.index];
        Ok(t)
    }
    fn step_backward(&self, col: usize, rng: &mut RngStream) -> StepDraw {
        let (r, j) = self.col_map[col];
        let mut t = self.blocks[r].step_backward(j, rng).map_err(|f| match f {
            SampleFault::NormViolation { .. } => f,
            _ => SampleFault::DeadColumn(col),
        })?;
        t.index = self.row_inv[r][t.index];
        Ok(t)
    }
    fn forward_support(&self, row: usize) -> Result<Vec<SupportTerm>> {
        let (r, i) = self.row_map[row];
        Ok(self.lift(r, self.blocks[r].forward_support(i)?, &self.col_inv))
    }
    fn backward_support(&self, col: usize) -> Result<Vec<SupportTerm>> {
        let (r, j) = self.col_map[col];
        Ok(self.lift(r, self.blocks[r].backward_support(j)?, &self.row_inv))
    }
    fn to_dense(&self) -> Result<ComplexMatrix> {
        dense_guard(self.rows(), self.cols())?;
        let mut a = ComplexMatrix::zeros(self.rows(), self.cols());
        for (r, block) in self.blocks.iter().enumerate() {
            let d = block.to_dense()?;
            for (i, &gm) in self.row_inv[r].iter().enumerate() {
                for (j, &gn) in self.col_inv[r].iter().enumerate() {
                    a[(gm, gn)] = d[(i, j)];
                }
            }
        }
        Ok(a)
    }
    fn declared_imax(&self) -> Option<f64> {
        self.blocks
            .iter()
            .map(|b| b.declared_imax())
            .try_fold(0.0, |acc: f64, x| x.map(|v| acc.max(v)))
    }
    fn label(&self) -> String {
        let parts: Vec<String> = self.blocks.iter().map(|b| b.label()).collect();
        format!("block_diagonal({})", parts.join(", "))
    }
}

/// `Σ_r |r⟩⟨r| ⊗ A^(r)` with the control register as the more significant factor.
pub fn controlled(family: Vec<Op>) -> Result<BlockDiagonal> {
    let first = family
        .first()
        .ok_or_else(|| Error::IndexMapInconsistent("empty controlled family".into()))?;
    let (rows, cols) = (first.rows(), first.cols());
    if let Some(o) = family.iter().find(|o| (o.rows(), o.cols()) != (rows, cols)) {
        return Err(Error::IndexMapInconsistent(format!(
            "controlled family mixes {rows}x{cols} with {}x{}",
            o.rows(),
            o.cols()
        )));
    }
    BlockDiagonal::contiguous(family)
}

/// `I_left ⊗ A ⊗ I_right`.
pub struct TensorEmbed {
    inner: Op,
    left: usize,
    right: usize,
}

pub fn tensor_embed(inner: Op, dim_left: usize, dim_right: usize) -> Result<TensorEmbed> {
    if dim_left == 0 || dim_right == 0 {
        return Err(Error::IndexMapInconsistent(format!(
            "identity factors of dimension {dim_left} and {dim_right}"
        )));
    }
    Ok(TensorEmbed {
        inner,
        left: dim_left,
        right: dim_right,
    })
}

impl TensorEmbed {
    fn split(&self, index: usize, mid: usize) -> (usize, usize, usize) {
        (index / (mid * self.right), (index / self.right) % mid, index % self.right)
    }

    fn join(&self, l: usize, i: usize, r: usize, mid: usize) -> usize {
        (l * mid + i) * self.right + r
    }
}

impl EpsOperator for TensorEmbed {
    fn rows(&self) -> usize {
        self.left * self.inner.rows() * self.right
    }
    fn cols(&self) -> usize {
        self.left * self.inner.cols() * self.right
    }
    fn bound(&self) -> f64 {
        self.inner.bound()
    }
    fn norm_pair(&self) -> NormPair {
        self.inner.norm_pair()
    }
    fn sample_forward(&self, row: usize, rng: &mut RngStream) -> Draw {
        let (l, i, r) = self.split(row, self.inner.rows());
        let t = self.inner.sample_forward(i, rng).map_err(|f| match f {
            SampleFault::NormViolation { .. } => f,
            _ => SampleFault::DeadRow(row),
        })?;
        Ok(Transition {
            index: self.join(l, t.index, r, self.inner.cols()),
            ..t
        })
    }
    fn sample_backward(&self, col: usize, rng: &mut RngStream) -> Draw {
        let (l, j, r) = self.split(col, self.inner.cols());
        let t = self.inner.sample_backward(j, rng).map_err(|f| match f {
            SampleFault::NormViolation { .. } => f,
            _ => SampleFault::DeadColumn(col),
        })?;
        Ok(Transition {
            index: self.join(l, t.index, r, self.inner.rows()),
            ..t
        })
    }
    fn step_forward(&self, row: usize, rng: &mut RngStream) -> StepDraw {
        let (l, i, r) = self.split(row, self.inner.rows());
        let mut t = self.inner.step_forward(i, rng).map_err(|f| match f {
            SampleFault::NormViolation { .. } => f,
            _ => SampleFault::DeadRow(row),
        })?;
        t.index = self.join(l, t.index, r, self.inner.cols());
        Ok(t)
    }
    fn step_backward(&self, col: usize, rng: &mut RngStream) -> StepDraw {
        let (l, j, r) = self.split(col, self.inner.cols());
        let mut t = self.inner.step_backward(j, rng).map_err(|f| match f {
            SampleFault::NormViolation { .. } => f,
            _ => SampleFault::DeadColumn(col),
        })?;
        t.index = self.join(l, t.index, r, self.inner.rows());
        Ok(t)
    }
    fn forward_support(&self, row: usize) -> Result<Vec<SupportTerm>> {
        let (l, i, r) = self.split(row, self.inner.rows());
        let mid = self.inner.cols();
        Ok(self
            .inner
            .forward_support(i)?
            .into_iter()
            .map(|mut t| {
                t.index = self.join(l, t.index, r, mid);
                t
            })
            .collect())
    }
    fn backward_support(&self, col: usize) -> Result<Vec<SupportTerm>> {
        let (l, j, r) = self.split(col, self.inner.cols());
        let mid = self.inner.rows();
        Ok(self
            .inner
            .backward_support(j)?
            .into_iter()
            .map(|mut t| {
                t.index = self.join(l, t.index, r, mid);
                t
            })
            .collect())
    }
    fn to_dense(&self) -> Result<ComplexMatrix> {
        dense_guard(self.rows(), self.cols())?;
        Ok(ComplexMatrix::identity(self.left)
            .kron(&self.inner.to_dense()?)
            .kron(&ComplexMatrix::identity(self.right)))
    }
    fn declared_imax(&self) -> Option<f64> {
        self.inner.declared_imax()
    }
    fn label(&self) -> String {
        format!("tensor_embed({}, {}, {})", self.inner.label(), self.left, self.right)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProjectorBasis {
    Fourier,
    Hadamard,
}

/// `Σ_x |x⟩⟨x| ⊗ U†|g(x)⟩⟨g(x)|U` for `U` the Fourier or Hadamard transform on the target.
pub fn projector_family(
    table: &[usize],
    target_dim: usize,
    basis: ProjectorBasis,
    pq: NormPair,
) -> Result<BlockDiagonal> {
    if table.is_empty() || target_dim == 0 {
        return Err(Error::IndexMapInconsistent("empty projector family".into()));
    }
    if basis == ProjectorBasis::Hadamard && !target_dim.is_power_of_two() {
        return Err(Error::IndexMapInconsistent(format!(
            "Hadamard basis needs a power-of-two target, got {target_dim}"
        )));
    }
    let mut family: Vec<Op> = Vec::with_capacity(table.len());
    for (x, &g) in table.iter().enumerate() {
        if g >= target_dim {
            return Err(Error::IndexMapInconsistent(format!("g({x}) = {g} outside 0..{target_dim}")));
        }
        let thetas: Vec<f64> = (0..target_dim)
            .map(|j| match basis {
                ProjectorBasis::Fourier => -2.0 * PI * ((g * j) % target_dim) as f64 / target_dim as f64,
                ProjectorBasis::Hadamard => PI * ((g & j).count_ones() % 2) as f64,
            })
            .collect();
        let phi: Arc<dyn CtState> = Arc::new(phase_state(thetas)?);
        family.push(Arc::new(EhtAsEps::new(Arc::new(dyad(phi.clone(), phi, pq)?))));
    }
    controlled(family)
}
