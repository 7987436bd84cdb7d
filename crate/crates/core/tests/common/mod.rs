#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use pathsim::linalg::ComplexMatrix;
use pathsim::sampler::RngStream;
use pathsim::C64;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn r(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn to_na(a: &ComplexMatrix) -> DMatrix<Complex64> {
    DMatrix::from_fn(a.rows(), a.cols(), |m, n| a[(m, n)])
}

pub fn from_na(a: &DMatrix<Complex64>) -> ComplexMatrix {
    ComplexMatrix::from_fn(a.nrows(), a.ncols(), |m, n| a[(m, n)])
}

/// Largest singular value, from nalgebra's SVD.
pub fn top_singular_value(a: &ComplexMatrix) -> f64 {
    let real = DMatrix::from_fn(a.rows(), a.cols(), |m, n| a[(m, n)].norm());
    real.singular_values().max()
}

pub fn random_matrix(rng: &mut RngStream, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| c(2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0))
}

pub fn random_nonneg(rng: &mut RngStream, rows: usize, cols: usize, density: f64) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        if rng.uniform() < density {
            r(rng.uniform())
        } else {
            r(0.0)
        }
    })
}

/// Haar-ish random unitary from the QR factor of a complex Gaussian-like matrix.
pub fn random_unitary(rng: &mut RngStream, n: usize) -> ComplexMatrix {
    let a = to_na(&random_matrix(rng, n, n));
    from_na(&a.qr().q())
}

pub fn hadamard_1() -> ComplexMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    ComplexMatrix::from_real(2, 2, &[s, s, s, -s]).unwrap()
}

/// Dense `H^{⊗n}` by repeated Kronecker products.
pub fn hadamard_n(n: usize) -> ComplexMatrix {
    (1..n).fold(hadamard_1(), |acc, _| acc.kron(&hadamard_1()))
}

pub fn fourier_dense(n: usize) -> ComplexMatrix {
    let s = 1.0 / (n as f64).sqrt();
    ComplexMatrix::from_fn(n, n, |j, k| {
        C64::from_polar(s, 2.0 * std::f64::consts::PI * ((j * k) % n) as f64 / n as f64)
    })
}

/// The explicit 8×8 Haar matrix on three qubits.
pub fn g3_explicit() -> ComplexMatrix {
    let a = 1.0 / 8f64.sqrt();
    let h = 0.5;
    let q = std::f64::consts::FRAC_1_SQRT_2;
    #[rustfmt::skip]
    let rows = [
        a, a, a, a, a, a, a, a,
        a, -a, a, -a, a, -a, a, -a,
        h, 0.0, -h, 0.0, h, 0.0, -h, 0.0,
        0.0, h, 0.0, -h, 0.0, h, 0.0, -h,
        q, 0.0, 0.0, 0.0, -q, 0.0, 0.0, 0.0,
        0.0, q, 0.0, 0.0, 0.0, -q, 0.0, 0.0,
        0.0, 0.0, q, 0.0, 0.0, 0.0, -q, 0.0,
        0.0, 0.0, 0.0, q, 0.0, 0.0, 0.0, -q,
    ];
    ComplexMatrix::from_real(8, 8, &rows).unwrap()
}

pub fn assert_matrix_close(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) {
    let d = a.max_abs_diff(b);
    assert!(d <= tol, "matrices differ by {d:e} > {tol:e}\n{a:?}\n{b:?}");
}

pub fn assert_close(a: f64, b: f64, tol: f64) {
    assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol:e})");
}
