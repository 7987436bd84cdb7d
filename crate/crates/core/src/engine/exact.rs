use super::Circuit;
use crate::eht::EhtState;
use crate::eps::{EpsOperator, Op};
use crate::error::{Error, Result};
use crate::linalg::{entrywise_abs, exact_oracle, induced_norm, ComplexMatrix, C64};

/// `Tr(U⁽¹⁾†⋯U⁽ᵀ⁾† M U⁽ᵀ⁾⋯U⁽¹⁾ ρ)` by dense products.
pub fn exact_expectation(circuit: &Circuit) -> Result<C64> {
    let us = dense_all(circuit.unitaries())?;
    let mut ops: Vec<ComplexMatrix> = us.iter().map(ComplexMatrix::adjoint).collect();
    ops.push(circuit.measurement().to_dense()?);
    ops.extend(us.into_iter().rev());
    exact_oracle(&circuit.initial().to_dense()?, &ops)
}

fn dense_all(ops: &[Op]) -> Result<Vec<ComplexMatrix>> {
    ops.iter().map(|o| o.to_dense()).collect()
}

fn interference_chain(us: &[ComplexMatrix], m_abs: ComplexMatrix, rho: &ComplexMatrix) -> Result<f64> {
    let abs: Vec<ComplexMatrix> = us.iter().map(entrywise_abs).collect();
    let mut ops: Vec<ComplexMatrix> = abs.iter().map(ComplexMatrix::transpose).collect();
    ops.push(m_abs);
    ops.extend(abs.into_iter().rev());
    Ok(exact_oracle(&entrywise_abs(rho), &ops)?.re)
}

/// Sum of the moduli of all path contributions, `Tr{|U⁽¹⁾†|⋯|M||U⁽ᵀ⁾|⋯|U⁽¹⁾||ρ|}`.
pub fn interference_exact(circuit: &Circuit) -> Result<f64> {
    let us = dense_all(circuit.unitaries())?;
    let m = entrywise_abs(&circuit.measurement().to_dense()?);
    interference_chain(&us, m, &circuit.initial().to_dense()?)
}

/// Interference with the measurement replaced by the identity.
pub fn interference_state_exact(unitaries: &[Op], rho: &dyn EhtState) -> Result<f64> {
    let us = dense_all(unitaries)?;
    interference_chain(&us, ComplexMatrix::identity(rho.rows()), &rho.to_dense()?)
}

/// `‖Ā‖_q`, from the operator's closed form when it declares one.
pub fn imax(op: &dyn EpsOperator) -> Result<f64> {
    match op.declared_imax() {
        Some(v) => Ok(v),
        None => imax_dense(&op.to_dense()?, op.norm_pair().q()),
    }
}

pub fn imax_dense(a: &ComplexMatrix, q: f64) -> Result<f64> {
    induced_norm(&entrywise_abs(a), q)
}

/// `ln ‖A‖₁`; zero for column-stochastic matrices.
///
/// Column sums within rounding (`rows·ε`) of one count as exactly one, so a matrix normalized in
/// floating point still reports zero.
pub fn mana(a: &ComplexMatrix) -> f64 {
    let norm = a.norm_one();
    if (norm - 1.0).abs() <= a.rows() as f64 * f64::EPSILON {
        0.0
    } else {
        norm.ln()
    }
}

pub const DEFAULT_HISTORY_CAP: usize = 4096;

/// Decoherence functional over computational-basis histories `j⃗ = (j₀, …, j_T)`.
///
/// `D(j⃗; k⃗) = w(j⃗)·conj(w(k⃗))·M_{k_T j_T}·ρ_{j₀ k₀}` with `w(j⃗) = Π_t U⁽ᵗ⁾_{j_t j_{t−1}}`.
#[derive(Debug, Clone)]
pub struct Decoherence {
    dim: usize,
    steps: usize,
    weights: Vec<C64>,
    measurement: ComplexMatrix,
    rho: ComplexMatrix,
    /// `ΣΣ D`.
    pub sum: C64,
    /// `ΣΣ |D|`.
    pub abs_sum: f64,
    /// `Σ_{j⃗ ≠ k⃗} |D|`.
    pub off_diagonal_abs_sum: f64,
}

impl Decoherence {
    pub fn history_count(&self) -> usize {
        self.weights.len()
    }

    /// Basis indices `(j₀, …, j_T)` of history number `h`.
    pub fn history(&self, mut h: usize) -> Vec<usize> {
        let mut out = vec![0; self.steps + 1];
        for slot in out.iter_mut() {
            *slot = h % self.dim;
            h /= self.dim;
        }
        out
    }

    fn ends(&self, h: usize) -> (usize, usize) {
        (h % self.dim, (h / self.dim.pow(self.steps as u32)) % self.dim)
    }

    pub fn entry(&self, j: usize, k: usize) -> C64 {
        let (j0, jt) = self.ends(j);
        let (k0, kt) = self.ends(k);
        self.weights[j] * self.weights[k].conj() * self.measurement[(kt, jt)] * self.rho[(j0, k0)]
    }

    pub fn is_diagonal(&self, tol: f64) -> bool {
        self.off_diagonal_abs_sum <= tol
    }
}

pub fn decoherence_matrix(circuit: &Circuit) -> Result<Decoherence> {
    decoherence_matrix_with_cap(circuit, DEFAULT_HISTORY_CAP)
}

pub fn decoherence_matrix_with_cap(circuit: &Circuit, cap: usize) -> Result<Decoherence> {
    let dim = circuit.dim();
    let steps = circuit.unitaries().len();
    let count = u32::try_from(steps + 1)
        .ok()
        .and_then(|e| dim.checked_pow(e))
        .filter(|&c| c <= cap)
        .ok_or(Error::HistoryCapExceeded {
            histories: dim.saturating_pow((steps + 1).min(u32::MAX as usize) as u32),
            cap,
        })?;
    let us = dense_all(circuit.unitaries())?;
    let weights: Vec<C64> = (0..count)
        .map(|mut h| {
            let mut prev = h % dim;
            h /= dim;
            let mut w = C64::new(1.0, 0.0);
            for u in &us {
                let next = h % dim;
                h /= dim;
                w *= u[(next, prev)];
                prev = next;
            }
            w
        })
        .collect();
    let mut d = Decoherence {
        dim,
        steps,
        weights,
        measurement: circuit.measurement().to_dense()?,
        rho: circuit.initial().to_dense()?,
        sum: C64::new(0.0, 0.0),
        abs_sum: 0.0,
        off_diagonal_abs_sum: 0.0,
    };
    let nonzero: Vec<usize> = (0..count).filter(|&h| d.weights[h] != C64::new(0.0, 0.0)).collect();
    for &j in &nonzero {
        for &k in &nonzero {
            let e = d.entry(j, k);
            d.sum += e;
            d.abs_sum += e.norm();
            if j != k {
                d.off_diagonal_abs_sum += e.norm();
            }
        }
    }
    Ok(d)
}

/// Dense enumeration of every path of `Tr(Aσ)` and the cost of the optimal law `R*(π) ∝ |V(π)|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolisticReference {
    /// `Σ_π V(π)`.
    pub value: C64,
    /// `Σ_π |V(π)|`, the cost of sampling from `R*`.
    pub b_opt: f64,
    pub paths: usize,
}

/// Enumerates paths through the operator's full support; tiny dimensions only.
pub fn holistic_reference(sigma: &dyn EhtState, a: &dyn EpsOperator) -> Result<HolisticReference> {
    let mut out = HolisticReference {
        value: C64::new(0.0, 0.0),
        b_opt: 0.0,
        paths: 0,
    };
    let mut add = |v: C64| {
        if v != C64::new(0.0, 0.0) {
            out.value += v;
            out.b_opt += v.norm();
            out.paths += 1;
        }
    };
    // The backward support is complete whenever backward draws carry weight.
    if a.norm_pair().inv_q() > 0.0 {
        for n in 0..a.cols() {
            for t in a.backward_support(n)? {
                add(t.alpha * sigma.entry(n, t.index));
            }
        }
    } else {
        for m in 0..a.rows() {
            for t in a.forward_support(m)? {
                add(t.alpha * sigma.entry(t.index, m));
            }
        }
    }
    Ok(out)
}
