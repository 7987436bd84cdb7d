use super::matrix::{ComplexMatrix, C64};
use crate::error::{Error, Result};

pub const DEFAULT_ORACLE_CAP: usize = 1 << 10;

/// `Tr(A₁⋯A_s σ)` by dense products evaluated right to left.
pub fn exact_oracle(sigma: &ComplexMatrix, ops: &[ComplexMatrix]) -> Result<C64> {
    exact_oracle_with_cap(sigma, ops, DEFAULT_ORACLE_CAP)
}

pub fn exact_oracle_with_cap(sigma: &ComplexMatrix, ops: &[ComplexMatrix], cap: usize) -> Result<C64> {
    for m in std::iter::once(sigma).chain(ops) {
        check_cap(m, cap)?;
    }
    let mut acc = sigma.clone();
    for a in ops.iter().rev() {
        acc = a.matmul(&acc)?;
    }
    if !acc.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "chain closes on a {}x{} matrix, trace needs a square one",
            acc.rows(),
            acc.cols()
        )));
    }
    Ok(acc.trace())
}

/// Refuses to materialize matrices beyond the default oracle cap.
pub(crate) fn dense_guard(rows: usize, cols: usize) -> Result<()> {
    let dim = rows.max(cols);
    if dim > DEFAULT_ORACLE_CAP {
        Err(Error::OracleCapExceeded {
            dim,
            cap: DEFAULT_ORACLE_CAP,
        })
    } else {
        Ok(())
    }
}

pub(crate) fn check_cap(m: &ComplexMatrix, cap: usize) -> Result<()> {
    let dim = m.rows().max(m.cols());
    if dim > cap {
        Err(Error::OracleCapExceeded { dim, cap })
    } else {
        Ok(())
    }
}

/// Matrix exponential by scaling and squaring around a truncated Taylor series.
pub fn dense_exp(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "exp of a {}x{} matrix",
            a.rows(),
            a.cols()
        )));
    }
    check_cap(a, DEFAULT_ORACLE_CAP)?;
    let n = a.rows();
    let norm = a.norm_one();
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let scaled = a.scale(C64::new(0.5f64.powi(squarings), 0.0));
    let mut result = ComplexMatrix::identity(n);
    let mut term = ComplexMatrix::identity(n);
    for k in 1..=40 {
        term = term.matmul(&scaled)?.scale(C64::new(1.0 / k as f64, 0.0));
        result = result.add(&term)?;
        if term.norm_one() <= 1e-18 * result.norm_one() {
            break;
        }
    }
    for _ in 0..squarings {
        result = result.matmul(&result)?;
    }
    Ok(result)
}
