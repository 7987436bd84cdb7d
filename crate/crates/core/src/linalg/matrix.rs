use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Dense complex matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite entry at flat index {i}")));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Self::from_vec(r, c, rows.concat())
    }

    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        Self::from_vec(rows, cols, data.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for m in 0..rows {
            for n in 0..cols {
                data.push(f(m, n));
            }
        }
        Self { rows, cols, data }
    }

    /// Outer product `|ket><bra|`.
    pub fn outer(ket: &[C64], bra: &[C64]) -> Self {
        Self::from_fn(ket.len(), bra.len(), |m, n| ket[m] * bra[n].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, m: usize) -> &[C64] {
        &self.data[m * self.cols..(m + 1) * self.cols]
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for m in 0..self.rows {
            let out_row = &mut out.data[m * other.cols..(m + 1) * other.cols];
            for (k, &a) in self.row(m).iter().enumerate() {
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for (o, &b) in out_row.iter_mut().zip(other.row(k)) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[C64]) -> Result<Vec<C64>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.rows)
            .map(|m| self.row(m).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |m, n| self[(n, m)])
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |m, n| self[(n, m)].conj())
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} plus {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn kron(&self, other: &Self) -> Self {
        let (r, c) = (self.rows * other.rows, self.cols * other.cols);
        Self::from_fn(r, c, |m, n| {
            self[(m / other.rows, n / other.cols)] * other[(m % other.rows, n % other.cols)]
        })
    }

    /// Largest entrywise modulus of `self - other`; infinite on shape mismatch.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// 1-norm (max column sum of moduli).
    pub fn norm_one(&self) -> f64 {
        (0..self.cols)
            .map(|n| (0..self.rows).map(|m| self[(m, n)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (m, n): (usize, usize)) -> &C64 {
        assert!(m < self.rows && n < self.cols, "index ({m}, {n}) out of bounds");
        &self.data[m * self.cols + n]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (m, n): (usize, usize)) -> &mut C64 {
        assert!(m < self.rows && n < self.cols, "index ({m}, {n}) out of bounds");
        &mut self.data[m * self.cols + n]
    }
}

/// Coordinate-list matrix with per-row and per-column views.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseEntries {
    rows: usize,
    cols: usize,
    triplets: Vec<(usize, usize, C64)>,
    by_row: Vec<Vec<usize>>,
    by_col: Vec<Vec<usize>>,
}

impl SparseEntries {
    pub fn new(rows: usize, cols: usize, triplets: Vec<(usize, usize, C64)>) -> Result<Self> {
        let mut by_row = vec![Vec::new(); rows];
        let mut by_col = vec![Vec::new(); cols];
        let mut seen = std::collections::HashSet::with_capacity(triplets.len());
        for (t, &(m, n, z)) in triplets.iter().enumerate() {
            if m >= rows || n >= cols {
                return Err(Error::DimensionMismatch(format!(
                    "entry ({m}, {n}) outside a {rows}x{cols} matrix"
                )));
            }
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::InvalidParameter(format!("non-finite entry at ({m}, {n})")));
            }
            if !seen.insert((m, n)) {
                return Err(Error::InvalidParameter(format!("duplicate entry at ({m}, {n})")));
            }
            by_row[m].push(t);
            by_col[n].push(t);
        }
        Ok(Self {
            rows,
            cols,
            triplets,
            by_row,
            by_col,
        })
    }

    /// Keeps the nonzero entries of a dense matrix.
    pub fn from_dense(a: &ComplexMatrix) -> Self {
        let mut triplets = Vec::new();
        for m in 0..a.rows() {
            for n in 0..a.cols() {
                let z = a[(m, n)];
                if z.norm() > 0.0 {
                    triplets.push((m, n, z));
                }
            }
        }
        Self::new(a.rows(), a.cols(), triplets).expect("dense matrix yields valid triplets")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn triplets(&self) -> &[(usize, usize, C64)] {
        &self.triplets
    }

    pub fn row_entries(&self, m: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        self.by_row[m].iter().map(|&t| (self.triplets[t].1, self.triplets[t].2))
    }

    pub fn col_entries(&self, n: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        self.by_col[n].iter().map(|&t| (self.triplets[t].0, self.triplets[t].2))
    }

    pub fn to_dense(&self) -> ComplexMatrix {
        let mut a = ComplexMatrix::zeros(self.rows, self.cols);
        for &(m, n, z) in &self.triplets {
            a[(m, n)] = z;
        }
        a
    }
}
