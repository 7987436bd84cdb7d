use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::sampler::RngStream;

/// A vector with computable amplitudes and an index sampler for the law `|ψ_i|^r/‖ψ‖_r^r`.
///
/// At `r = ∞` the law is uniform over the maximizing indices.
pub trait CtState: Send + Sync {
    fn dim(&self) -> usize;
    fn amplitude(&self, i: usize) -> C64;
    fn law(&self, i: usize, r: f64) -> f64;
    fn sample(&self, r: f64, rng: &mut RngStream) -> usize;
    fn norm(&self, r: f64) -> f64;
    fn label(&self) -> String;

    fn amplitudes(&self) -> Vec<C64> {
        (0..self.dim()).map(|i| self.amplitude(i)).collect()
    }
}

const MAX_TIE: f64 = 1e-12;

fn weight(modulus: f64, r: f64) -> f64 {
    if r == 1.0 {
        modulus
    } else if r == 2.0 {
        modulus * modulus
    } else {
        modulus.powf(r)
    }
}

fn is_max(modulus: f64, max: f64) -> bool {
    max > 0.0 && modulus >= max * (1.0 - MAX_TIE)
}

/// Law of index `i` among explicit moduli.
fn law_of(moduli: &[f64], i: usize, r: f64) -> f64 {
    if r.is_infinite() {
        let max = moduli.iter().cloned().fold(0.0, f64::max);
        let ties = moduli.iter().filter(|&&x| is_max(x, max)).count();
        if is_max(moduli[i], max) {
            1.0 / ties as f64
        } else {
            0.0
        }
    } else {
        let total: f64 = moduli.iter().map(|&x| weight(x, r)).sum();
        weight(moduli[i], r) / total
    }
}

/// Two-pass inversion sampling over explicit moduli.
fn sample_moduli(moduli: &[f64], r: f64, rng: &mut RngStream) -> usize {
    if r.is_infinite() {
        let max = moduli.iter().cloned().fold(0.0, f64::max);
        let ties = moduli.iter().filter(|&&x| is_max(x, max)).count();
        let pick = rng.below(ties);
        return moduli
            .iter()
            .enumerate()
            .filter(|(_, &x)| is_max(x, max))
            .nth(pick)
            .map(|(i, _)| i)
            .unwrap_or(0);
    }
    let total: f64 = moduli.iter().map(|&x| weight(x, r)).sum();
    let target = rng.uniform() * total;
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &x) in moduli.iter().enumerate() {
        let w = weight(x, r);
        if w > 0.0 {
            acc += w;
            last = i;
            if target < acc {
                return i;
            }
        }
    }
    last
}

fn norm_of(moduli: &[f64], r: f64) -> f64 {
    crate::linalg::lp_norm(moduli, r)
}

/// Computational basis vector `|index⟩`.
#[derive(Debug, Clone)]
pub struct BasisState {
    dim: usize,
    index: usize,
}

pub fn basis_state(dim: usize, index: usize) -> Result<BasisState> {
    if index >= dim {
        return Err(Error::InvalidParameter(format!("basis index {index} outside 0..{dim}")));
    }
    Ok(BasisState { dim, index })
}

impl CtState for BasisState {
    fn dim(&self) -> usize {
        self.dim
    }
    fn amplitude(&self, i: usize) -> C64 {
        C64::new(if i == self.index { 1.0 } else { 0.0 }, 0.0)
    }
    fn law(&self, i: usize, _: f64) -> f64 {
        if i == self.index {
            1.0
        } else {
            0.0
        }
    }
    fn sample(&self, _: f64, _: &mut RngStream) -> usize {
        self.index
    }
    fn norm(&self, _: f64) -> f64 {
        1.0
    }
    fn label(&self) -> String {
        format!("basis({}/{})", self.index, self.dim)
    }
}

/// Tensor product of normalized local states; the first factor is most significant.
#[derive(Debug, Clone)]
pub struct ProductState {
    factors: Vec<Vec<C64>>,
    moduli: Vec<Vec<f64>>,
    dim: usize,
}

pub fn product_state(factors: Vec<Vec<C64>>) -> Result<ProductState> {
    if factors.is_empty() || factors.iter().any(Vec::is_empty) {
        return Err(Error::InvalidParameter("product state needs nonempty factors".into()));
    }
    let moduli: Vec<Vec<f64>> = factors.iter().map(|f| f.iter().map(|z| z.norm()).collect()).collect();
    for m in &moduli {
        let norm = norm_of(m, 2.0);
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::NotNormalized { norm });
        }
    }
    let dim = factors
        .iter()
        .try_fold(1usize, |acc, f| acc.checked_mul(f.len()))
        .ok_or_else(|| Error::InvalidParameter("product state dimension overflows".into()))?;
    Ok(ProductState { factors, moduli, dim })
}

impl ProductState {
    fn digits(&self, mut i: usize) -> impl Iterator<Item = usize> {
        let mut out = vec![0; self.factors.len()];
        for (slot, f) in out.iter_mut().zip(&self.factors).rev() {
            *slot = i % f.len();
            i /= f.len();
        }
        out.into_iter()
    }
}

impl CtState for ProductState {
    fn dim(&self) -> usize {
        self.dim
    }
    fn amplitude(&self, i: usize) -> C64 {
        self.digits(i).zip(&self.factors).map(|(d, f)| f[d]).product()
    }
    fn law(&self, i: usize, r: f64) -> f64 {
        self.digits(i).zip(&self.moduli).map(|(d, m)| law_of(m, d, r)).product()
    }
    fn sample(&self, r: f64, rng: &mut RngStream) -> usize {
        self.moduli
            .iter()
            .fold(0, |acc, m| acc * m.len() + sample_moduli(m, r, rng))
    }
    fn norm(&self, r: f64) -> f64 {
        self.moduli.iter().map(|m| norm_of(m, r)).product()
    }
    fn label(&self) -> String {
        format!("product({} factors)", self.factors.len())
    }
}

/// `(1/√N) Σ_x e^{iθ(x)} |x⟩`.
#[derive(Debug, Clone)]
pub struct PhaseState {
    thetas: Vec<f64>,
}

pub fn phase_state(thetas: Vec<f64>) -> Result<PhaseState> {
    if thetas.is_empty() {
        return Err(Error::InvalidParameter("phase state of dimension 0".into()));
    }
    if thetas.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidParameter("non-finite phase".into()));
    }
    Ok(PhaseState { thetas })
}

pub fn phase_state_fn(dim: usize, theta: impl Fn(usize) -> f64) -> Result<PhaseState> {
    phase_state((0..dim).map(theta).collect())
}

fn flat_norm(dim: usize, r: f64) -> f64 {
    let n = dim as f64;
    if r.is_infinite() {
        n.powf(-0.5)
    } else {
        n.powf(1.0 / r - 0.5)
    }
}

impl CtState for PhaseState {
    fn dim(&self) -> usize {
        self.thetas.len()
    }
    fn amplitude(&self, i: usize) -> C64 {
        C64::from_polar(1.0 / (self.thetas.len() as f64).sqrt(), self.thetas[i])
    }
    fn law(&self, _: usize, _: f64) -> f64 {
        1.0 / self.thetas.len() as f64
    }
    fn sample(&self, _: f64, rng: &mut RngStream) -> usize {
        rng.below(self.thetas.len())
    }
    fn norm(&self, r: f64) -> f64 {
        flat_norm(self.thetas.len(), r)
    }
    fn label(&self) -> String {
        format!("phase({})", self.thetas.len())
    }
}

/// Equal superposition; power-of-two dimensions sample with independent fair coins.
#[derive(Debug, Clone)]
pub struct UniformState {
    dim: usize,
}

pub fn uniform_state(dim: usize) -> Result<UniformState> {
    if dim == 0 {
        return Err(Error::InvalidParameter("uniform state of dimension 0".into()));
    }
    Ok(UniformState { dim })
}

impl CtState for UniformState {
    fn dim(&self) -> usize {
        self.dim
    }
    fn amplitude(&self, _: usize) -> C64 {
        C64::new(1.0 / (self.dim as f64).sqrt(), 0.0)
    }
    fn law(&self, _: usize, _: f64) -> f64 {
        1.0 / self.dim as f64
    }
    fn sample(&self, _: f64, rng: &mut RngStream) -> usize {
        if self.dim.is_power_of_two() {
            (rng.bits() as usize) & (self.dim - 1)
        } else {
            rng.below(self.dim)
        }
    }
    fn norm(&self, r: f64) -> f64 {
        flat_norm(self.dim, r)
    }
    fn label(&self) -> String {
        format!("uniform({})", self.dim)
    }
}

/// Explicit amplitude vector; need not be normalized.
#[derive(Debug, Clone)]
pub struct VectorState {
    amps: Vec<C64>,
    moduli: Vec<f64>,
}

pub fn vector_state(amps: Vec<C64>) -> Result<VectorState> {
    if amps.is_empty() {
        return Err(Error::InvalidParameter("empty vector state".into()));
    }
    if amps.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidParameter("non-finite amplitude".into()));
    }
    let moduli = amps.iter().map(|z| z.norm()).collect();
    Ok(VectorState { amps, moduli })
}

impl CtState for VectorState {
    fn dim(&self) -> usize {
        self.amps.len()
    }
    fn amplitude(&self, i: usize) -> C64 {
        self.amps[i]
    }
    fn law(&self, i: usize, r: f64) -> f64 {
        law_of(&self.moduli, i, r)
    }
    fn sample(&self, r: f64, rng: &mut RngStream) -> usize {
        sample_moduli(&self.moduli, r, rng)
    }
    fn norm(&self, r: f64) -> f64 {
        norm_of(&self.moduli, r)
    }
    fn label(&self) -> String {
        format!("vector({})", self.amps.len())
    }
}
