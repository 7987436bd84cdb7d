use std::f64::consts::PI;

use super::{Draw, EpsOperator, KTag, SampleFault, SupportTerm, Transition};
use crate::error::{Error, Result};
use crate::linalg::{dense_guard, ComplexMatrix, NormPair, C64};
use crate::sampler::RngStream;

const ONE: C64 = C64 { re: 1.0, im: 0.0 };

fn unit_term(index: usize, alpha: C64) -> SupportTerm {
    SupportTerm {
        index,
        tag: KTag::Unit,
        alpha,
        prob: 1.0,
        dual_prob: 1.0,
    }
}

pub struct Identity {
    dim: usize,
    pq: NormPair,
}

impl Identity {
    pub fn new(dim: usize, pq: NormPair) -> Self {
        Self { dim, pq }
    }
}

impl EpsOperator for Identity {
    fn rows(&self) -> usize {
        self.dim
    }
    fn cols(&self) -> usize {
        self.dim
    }
    fn bound(&self) -> f64 {
        1.0
    }
    fn norm_pair(&self) -> NormPair {
        self.pq
    }
    fn sample_forward(&self, row: usize, _: &mut RngStream) -> Draw {
        Ok(Transition::unit(row, ONE, ONE))
    }
    fn sample_backward(&self, col: usize, _: &mut RngStream) -> Draw {
        Ok(Transition::unit(col, ONE, ONE))
    }
    fn forward_support(&self, row: usize) -> Result<Vec<SupportTerm>> {
        Ok(vec![unit_term(row, ONE)])
    }
    fn backward_support(&self, col: usize) -> Result<Vec<SupportTerm>> {
        Ok(vec![unit_term(col, ONE)])
    }
    fn to_dense(&self) -> Result<ComplexMatrix> {
        Ok(ComplexMatrix::identity(self.dim))
    }
    fn declared_imax(&self) -> Option<f64> {
        Some(1.0)
    }
    fn label(&self) -> String {
        format!("identity({})", self.dim)
    }
}

/// The zero operator: every row and column is dead and `b = 0`.
pub struct Zero {
    rows: usize,
    cols: usize,
    pq: NormPair,
}

impl Zero {
    pub fn new(rows: usize, cols: usize, pq: NormPair) -> Self {
        Self { rows, cols, pq }
    }
}

impl EpsOperator for Zero {
    fn rows(&self) -> usize {
        self.rows
    }
    fn cols(&self) -> usize {
        self.cols
    }
    fn bound(&self) -> f64 {
        0.0
    }
    fn norm_pair(&self) -> NormPair {
        self.pq
    }
    fn sample_forward(&self, row: usize, _: &mut RngStream) -> Draw {
        Err(SampleFault::DeadRow(row))
    }
    fn sample_backward(&self, col: usize, _: &mut RngStream) -> Draw {
        Err(SampleFault::DeadColumn(col))
    }
    fn forward_support(&self, _: usize) -> Result<Vec<SupportTerm>> {
        Ok(Vec::new())
    }
    fn backward_support(&self, _: usize) -> Result<Vec<SupportTerm>> {
        Ok(Vec::new())
    }
    fn to_dense(&self) -> Result<ComplexMatrix> {
        Ok(ComplexMatrix::zeros(self.rows, self.cols))
    }
    fn declared_imax(&self) -> Option<f64> {
        Some(0.0)
    }
    fn label(&self) -> String {
        format!("zero({}x{})", self.rows, self.cols)
    }
}

/// Permutation with phases: `A[m, perm[m]] = phases[m]`.
pub struct Permutation {
    perm: Vec<usize>,
    inverse: Vec<usize>,
    phases: Vec<C64>,
    pq: NormPair,
}

pub fn permutation(perm: Vec<usize>, phases: Option<Vec<C64>>, pq: NormPair) -> Result<Permutation> {
    let n = perm.len();
    let mut inverse = vec![usize::MAX; n];
    for (m, &j) in perm.iter().enumerate() {
        if j >= n || inverse[j] != usize::MAX {
            return Err(Error::InvalidParameter(format!("{perm:?} is not a permutation of 0..{n}")));
        }
        inverse[j] = m;
    }
    let phases = phases.unwrap_or_else(|| vec![ONE; n]);
    if phases.len() != n {
        return Err(Error::DimensionMismatch(format!("{} phases for {n} indices", phases.len())));
    }
    check_unit(&phases)?;
    Ok(Permutation {
        perm,
        inverse,
        phases,
        pq,
    })
}

/// Diagonal unitary `diag(phases)`.
pub fn diagonal_unitary(phases: Vec<C64>, pq: NormPair) -> Result<Permutation> {
    permutation((0..phases.len()).collect(), Some(phases), pq)
}

fn check_unit(phases: &[C64]) -> Result<()> {
    for (index, z) in phases.iter().enumerate() {
        let modulus = z.norm();
        if (modulus - 1.0).abs() > 1e-9 {
            return Err(Error::NonUnitPhase { index, modulus });
        }
    }
    Ok(())
}

impl EpsOperator for Permutation {
    fn rows(&self) -> usize {
        self.perm.len()
    }
    fn cols(&self) -> usize {
        self.perm.len()
    }
    fn bound(&self) -> f64 {
        1.0
    }
    fn norm_pair(&self) -> NormPair {
        self.pq
    }
    fn sample_forward(&self, row: usize, _: &mut RngStream) -> Draw {
        let z = self.phases[row];
        Ok(Transition::unit(self.perm[row], z, z))
    }
    fn sample_backward(&self, col: usize, _: &mut RngStream) -> Draw {
        let m = self.inverse[col];
        let z = self.phases[m];
        Ok(Transition::unit(m, z, z))
    }
    fn forward_support(&self, row: usize) -> Result<Vec<SupportTerm>> {
        Ok(vec![unit_term(self.perm[row], self.phases[row])])
    }
    fn backward_support(&self, col: usize) -> Result<Vec<SupportTerm>> {
        let m = self.inverse[col];
        Ok(vec![unit_term(m, self.phases[m])])
    }
    fn to_dense(&self) -> Result<ComplexMatrix> {
        let mut a = ComplexMatrix::zeros(self.rows(), self.cols());
        for (m, &n) in self.perm.iter().enumerate() {
            a[(m, n)] = self.phases[m];
        }
        Ok(a)
    }
    fn declared_imax(&self) -> Option<f64> {
        Some(1.0)
    }
    fn label(&self) -> String {
        format!("permutation({})", self.perm.len())
    }
}

/// Tensor product of Pauli matrices; the first character acts on the most significant qubit.
pub struct PauliString {
    spec: String,
    n_qubits: usize,
    flip_mask: usize,
    z_mask: usize,
    y_count: usize,
    pq: NormPair,
}

pub fn pauli_string(spec: &str, pq: NormPair) -> Result<PauliString> {
    let n_qubits = spec.chars().count();
    if n_qubits == 0 || n_qubits >= usize::BITS as usize {
        return Err(Error::InvalidParameter(format!("Pauli string of length {n_qubits}")));
    }
    let (mut flip_mask, mut z_mask, mut y_count) = (0, 0, 0);
    for (i, c) in spec.chars().enumerate() {
        let bit = 1usize << (n_qubits - 1 - i);
        match c.to_ascii_uppercase() {
            'I' => {}
            'X' => flip_mask |= bit,
            'Z' => z_mask |= bit,
            'Y' => {
                flip_mask |= bit;
                z_mask |= bit;
                y_count += 1;
            }
            other => return Err(Error::InvalidParameter(format!("unknown Pauli letter {other:?}"))),
        }
    }
    Ok(PauliString {
        spec: spec.to_ascii_uppercase(),
        n_qubits,
        flip_mask,
        z_mask,
        y_count,
        pq,
    })
}

impl PauliString {
    /// Phase of `P|col⟩ = phase·|col ⊕ flip⟩`. Y contributes `i` on |0⟩ and `−i` on |1⟩.
    fn phase(&self, col: usize) -> C64 {
        let i_power = self.y_count % 4;
        let base = [ONE, C64::new(0.0, 1.0), C64::new(-1.0, 0.0), C64::new(0.0, -1.0)][i_power];
        if (col & self.z_mask).count_ones() % 2 == 1 {
            -base
        } else {
            base
        }
    }
}

impl EpsOperator for PauliString {
    fn rows(&self) -> usize {
        1 << self.n_qubits
    }
    fn cols(&self) -> usize {
        1 << self.n_qubits
    }
    fn bound(&self) -> f64 {
        1.0
    }
    fn norm_pair(&self) -> NormPair {
        self.pq
    }
    fn sample_forward(&self, row: usize, _: &mut RngStream) -> Draw {
        let col = row ^ self.flip_mask;
        let z = self.phase(col);
        Ok(Transition::unit(col, z, z))
    }
    fn sample_backward(&self, col: usize, _: &mut RngStream) -> Draw {
        let z = self.phase(col);
        Ok(Transition::unit(col ^ self.flip_mask, z, z))
    }
    fn forward_support(&self, row: usize) -> Result<Vec<SupportTerm>> {
        let col = row ^ self.flip_mask;
        Ok(vec![unit_term(col, self.phase(col))])
    }
    fn backward_support(&self, col: usize) -> Result<Vec<SupportTerm>> {
        Ok(vec![unit_term(col ^ self.flip_mask, self.phase(col))])
    }
    fn to_dense(&self) -> Result<ComplexMatrix> {
        dense_guard(self.rows(), self.cols())?;
        let single = |c: char| -> ComplexMatrix {
            let z = C64::new(0.0, 0.0);
            let i = C64::new(0.0, 1.0);
            let rows = match c {
                'X' => [[z, ONE], [ONE, z]],
                'Y' => [[z, -i], [i, z]],
                'Z' => [[ONE, z], [z, -ONE]],
                _ => [[ONE, z], [z, ONE]],
            };
            ComplexMatrix::from_fn(2, 2, |m, n| rows[m][n])
        };
        Ok(self
            .spec
            .chars()
            .fold(ComplexMatrix::identity(1), |acc, c| acc.kron(&single(c))))
    }
    fn declared_imax(&self) -> Option<f64> {
        Some(1.0)
    }
    fn label(&self) -> String {
        format!("pauli({})", self.spec)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlatKind {
    Hadamard,
    Fourier,
}

/// Unitary whose entries all have modulus `1/√N`; both directions sample uniformly.
pub struct FlatUnitary {
    kind: FlatKind,
    dim: usize,
    pq: NormPair,
}

/// `H^{⊗n}` with entries `(−1)^{popcount(m∧n)}/√N`.
pub fn hadamard(n_qubits: usize, pq: NormPair) -> Result<FlatUnitary> {
    if n_qubits == 0 || n_qubits >= 31 {
        return Err(Error::InvalidParameter(format!("{n_qubits} qubits")));
    }
    Ok(FlatUnitary {
        kind: FlatKind::Hadamard,
        dim: 1 << n_qubits,
        pq,
    })
}

/// Discrete Fourier transform with entries `e^{2πimn/N}/√N`.
pub fn fourier(dim: usize, pq: NormPair) -> Result<FlatUnitary> {
    if dim == 0 {
        return Err(Error::InvalidParameter("Fourier transform of dimension 0".into()));
    }
    Ok(FlatUnitary {
        kind: FlatKind::Fourier,
        dim,
        pq,
    })
}

impl FlatUnitary {
    pub fn entry(&self, m: usize, n: usize) -> C64 {
        let scale = 1.0 / (self.dim as f64).sqrt();
        match self.kind {
            FlatKind::Hadamard => {
                if (m & n).count_ones() % 2 == 0 {
                    C64::new(scale, 0.0)
                } else {
                    C64::new(-scale, 0.0)
                }
            }
            FlatKind::Fourier => {
                let k = ((m as u128 * n as u128) % self.dim as u128) as f64;
                C64::from_polar(scale, 2.0 * PI * k / self.dim as f64)
            }
        }
    }

    fn term(&self, index: usize, alpha: C64) -> SupportTerm {
        let prob = 1.0 / self.dim as f64;
        SupportTerm {
            index,
            tag: KTag::Unit,
            alpha,
            prob,
            dual_prob: prob,
        }
    }
}

impl EpsOperator for FlatUnitary {
    fn rows(&self) -> usize {
        self.dim
    }
    fn cols(&self) -> usize {
        self.dim
    }
    fn bound(&self) -> f64 {
        (self.dim as f64).sqrt()
    }
    fn norm_pair(&self) -> NormPair {
        self.pq
    }
    fn sample_forward(&self, row: usize, rng: &mut RngStream) -> Draw {
        let n = rng.below(self.dim);
        let r = self.entry(row, n) * self.dim as f64;
        Ok(Transition::unit(n, r, r))
    }
    fn sample_backward(&self, col: usize, rng: &mut RngStream) -> Draw {
        let m = rng.below(self.dim);
        let r = self.entry(m, col) * self.dim as f64;
        Ok(Transition::unit(m, r, r))
    }
    fn forward_support(&self, row: usize) -> Result<Vec<SupportTerm>> {
        Ok((0..self.dim).map(|n| self.term(n, self.entry(row, n))).collect())
    }
    fn backward_support(&self, col: usize) -> Result<Vec<SupportTerm>> {
        Ok((0..self.dim).map(|m| self.term(m, self.entry(m, col))).collect())
    }
    fn to_dense(&self) -> Result<ComplexMatrix> {
        dense_guard(self.dim, self.dim)?;
        Ok(ComplexMatrix::from_fn(self.dim, self.dim, |m, n| self.entry(m, n)))
    }
    fn declared_imax(&self) -> Option<f64> {
        Some((self.dim as f64).sqrt())
    }
    fn label(&self) -> String {
        match self.kind {
            FlatKind::Hadamard => format!("hadamard({})", self.dim.trailing_zeros()),
            FlatKind::Fourier => format!("fourier({})", self.dim),
        }
    }
}
