mod common;

use std::f64::consts::PI;
use std::sync::Arc;

use common::*;
use nalgebra::DMatrix;
use pathsim::eht::*;
use pathsim::eps::certify;
use pathsim::linalg::{entrywise_abs, induced_norm, lp_norm};
use pathsim::sampler::RngStream;
use pathsim::{ComplexMatrix, EhtState, EpsOperator, Error, NormPair, C64};
use proptest::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn ct(x: impl CtState + 'static) -> Arc<dyn CtState> {
    Arc::new(x)
}

fn p(value: f64) -> NormPair {
    NormPair::new(value).unwrap()
}

fn random_vector(rng: &mut RngStream, n: usize) -> Vec<C64> {
    (0..n).map(|_| c(2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0)).collect()
}

fn normalized(v: Vec<C64>, r: f64) -> Vec<C64> {
    let norm = lp_norm(&v.iter().map(|z| z.norm()).collect::<Vec<_>>(), r);
    v.into_iter().map(|z| z / norm).collect()
}

fn random_density(rng: &mut RngStream, n: usize) -> ComplexMatrix {
    let b = random_matrix(rng, n, n);
    let psd = b.adjoint().matmul(&b).unwrap();
    let tr = psd.trace().re;
    psd.scale(r(1.0 / tr))
}

fn assert_state_certified(name: &str, s: &dyn EhtState) {
    let cert = certify_state(s).unwrap();
    assert!(cert.max_cost <= s.bound() + 1e-9, "{name}: cost {} > b {}", cert.max_cost, s.bound());
    assert!(cert.max_entry_error <= 1e-12, "{name}: entry error {:e}", cert.max_entry_error);
    assert!(cert.col_mass_error <= 1e-12 && cert.row_mass_error <= 1e-12, "{name}: mass {cert:?}");
    let lower = induced_norm(&entrywise_abs(&s.to_dense().unwrap()), s.norm_pair().q()).unwrap();
    assert!(s.bound() >= lower - 1e-6, "{name}: b {} below ‖σ̄‖_q {lower}", s.bound());
}

#[test]
fn ct_library_examples() {
    let e = basis_state(5, 3).unwrap();
    for i in 0..5 {
        assert_eq!(e.amplitude(i), r(if i == 3 { 1.0 } else { 0.0 }));
    }
    assert!(basis_state(5, 5).is_err());

    let s = std::f64::consts::FRAC_1_SQRT_2;
    let plus3 = product_state(vec![vec![r(s), r(s)]; 3]).unwrap();
    assert_eq!(plus3.dim(), 8);
    for i in 0..8 {
        assert_close(plus3.amplitude(i).re, 1.0 / 8f64.sqrt(), 1e-15);
    }
    let mixed = product_state(vec![vec![r(0.6), r(0.8)], vec![c(0.0, 1.0), r(0.0)], vec![r(s), r(-s)]]).unwrap();
    assert_eq!(mixed.amplitude(0b101), r(0.8) * c(0.0, 1.0) * r(-s));
    assert_eq!(mixed.amplitude(0b111), r(0.0));
    assert!(matches!(product_state(vec![vec![r(1.0), r(1.0)]]), Err(Error::NotNormalized { .. })));

    let n = 16;
    let chirp = phase_state_fn(n, |x| 2.0 * PI * (x * x) as f64 / n as f64).unwrap();
    for x in 0..n {
        let want = C64::from_polar(0.25, 2.0 * PI * (x * x) as f64 / 16.0);
        assert!((chirp.amplitude(x) - want).norm() <= 1e-14);
    }
    assert_close(chirp.norm(2.0), 1.0, 1e-14);

    let u = uniform_state(8).unwrap();
    assert_close(u.norm(2.0), 1.0, 1e-15);
    assert_close(u.norm(1.0), 8f64.sqrt(), 1e-14);
    assert_close(u.norm(f64::INFINITY), 1.0 / 8f64.sqrt(), 1e-15);
    assert!(uniform_state(0).is_err());
    assert!(vector_state(vec![]).is_err());
}

fn chi_square_p(counts: &[usize], probs: &[f64], draws: usize) -> f64 {
    let mut stat = 0.0;
    let mut cells = 0;
    for (&o, &pr) in counts.iter().zip(probs) {
        if pr > 0.0 {
            let e = pr * draws as f64;
            stat += (o as f64 - e).powi(2) / e;
            cells += 1;
        } else {
            assert_eq!(o, 0, "draw outside the support");
        }
    }
    if cells <= 1 {
        return 1.0;
    }
    1.0 - ChiSquared::new((cells - 1) as f64).unwrap().cdf(stat)
}

#[test]
fn dyad_endpoint_laws_match() {
    let draws = 1_000_000;
    let mut gen = RngStream::new(77, 0);
    for (trial, pv) in [2.0, 1.0, 3.0, 1.5].into_iter().enumerate() {
        let n = [64, 16, 32, 8][trial];
        let pq = p(pv);
        let ket = random_vector(&mut gen, n);
        let bra = random_vector(&mut gen, n);
        let d = dyad(ct(vector_state(ket.clone()).unwrap()), ct(vector_state(bra.clone()).unwrap()), pq).unwrap();
        let law = |v: &[C64], r: f64| {
            let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
            let w: Vec<f64> = if r.is_infinite() {
                v.iter().map(|z| if z.norm() == max { 1.0 } else { 0.0 }).collect()
            } else {
                v.iter().map(|z| z.norm().powf(r)).collect()
            };
            let total: f64 = w.iter().sum();
            w.into_iter().map(|x| x / total).collect::<Vec<_>>()
        };
        let mut rng = RngStream::new(500 + trial as u64, 0);
        let mut cols = vec![0; n];
        let mut rows = vec![0; n];
        for _ in 0..draws {
            cols[d.sample_col(&mut rng)] += 1;
            rows[d.sample_row(&mut rng)] += 1;
        }
        let pc = chi_square_p(&cols, &law(&bra, pq.p()), draws);
        let pr = chi_square_p(&rows, &law(&ket, pq.q()), draws);
        assert!(pc > 0.001, "p = {pv}: column law p-value {pc}");
        assert!(pr > 0.001, "p = {pv}: row law p-value {pr}");
    }
}

#[test]
fn uniform_sampling_is_flat() {
    let draws = 1_000_000;
    let mut rng = RngStream::new(3, 0);
    for dim in [8usize, 12] {
        let u = uniform_state(dim).unwrap();
        let mut counts = vec![0; dim];
        for _ in 0..draws {
            counts[u.sample(2.0, &mut rng)] += 1;
        }
        let pv = chi_square_p(&counts, &vec![1.0 / dim as f64; dim], draws);
        assert!(pv > 0.001, "dim {dim}: p-value {pv}");
    }
}

#[test]
fn dyad_examples() {
    let mut rng = RngStream::new(1, 0);
    let psi = normalized(random_vector(&mut rng, 6), 2.0);
    let phi = normalized(random_vector(&mut rng, 6), 2.0);
    let d = dyad(ct(vector_state(phi.clone()).unwrap()), ct(vector_state(psi.clone()).unwrap()), NormPair::TWO).unwrap();
    assert_close(d.bound(), 1.0, 1e-12);
    assert_matrix_close(&d.to_dense().unwrap(), &ComplexMatrix::outer(&phi, &psi), 1e-15);

    let (i, j) = (2, 5);
    let basis = dyad(ct(basis_state(8, j).unwrap()), ct(basis_state(8, i).unwrap()), NormPair::TWO).unwrap();
    assert_eq!(basis.bound(), 1.0);
    for _ in 0..100 {
        assert_eq!(basis.sample_col(&mut rng), i);
        assert_eq!(basis.sample_row(&mut rng), j);
    }
    assert_eq!(basis.entry(j, i), r(1.0));

    let plus = ct(uniform_state(4).unwrap());
    let pp = dyad(plus.clone(), plus, NormPair::TWO).unwrap();
    assert_state_certified("|+⟩⟨+|", &pp);
    for m in 0..4 {
        for n in 0..4 {
            let (rp, rq) = pp.ratios(m, n).unwrap();
            assert_close((rp * pp.col_prob(n)).re, 0.25, 1e-15);
            assert_close((rq * pp.row_prob(m)).re, 0.25, 1e-15);
        }
    }

    let zero = ct(vector_state(vec![r(0.0); 3]).unwrap());
    let e0 = ct(basis_state(3, 0).unwrap());
    assert_eq!(dyad(zero.clone(), e0.clone(), NormPair::TWO).err(), Some(Error::ZeroVector));
    assert_eq!(dyad(e0, zero, NormPair::TWO).err(), Some(Error::ZeroVector));
}

#[test]
fn dyad_bound_is_holder_product() {
    let mut rng = RngStream::new(2, 0);
    for pv in [1.0, 1.5, 2.0, 3.0, f64::INFINITY] {
        let pq = p(pv);
        let ket = random_vector(&mut rng, 5);
        let bra = random_vector(&mut rng, 7);
        let d = dyad(ct(vector_state(ket.clone()).unwrap()), ct(vector_state(bra.clone()).unwrap()), pq).unwrap();
        let norm = |v: &[C64], r: f64| lp_norm(&v.iter().map(|z| z.norm()).collect::<Vec<_>>(), r);
        assert_close(d.bound(), norm(&bra, pq.p()) * norm(&ket, pq.q()), 1e-12);
        assert_state_certified(&format!("dyad p={pv}"), &d);
        let sv = top_singular_value(&d.to_dense().unwrap());
        if pv == 2.0 {
            assert_close(d.bound(), sv, 1e-9);
        }
    }
}

#[test]
fn density_examples() {
    let n = 8;
    let mixed = density(ComplexMatrix::identity(n).scale(r(1.0 / n as f64))).unwrap();
    assert_eq!(mixed.bound(), 1.0);
    for i in 0..n {
        assert_close(mixed.col_prob(i), 0.125, 1e-15);
    }
    assert_state_certified("I/N", &mixed);

    let mut rng = RngStream::new(4, 0);
    let psi = normalized(random_vector(&mut rng, 4), 2.0);
    let pure = density(ComplexMatrix::outer(&psi, &psi)).unwrap();
    let as_dyad = dyad(ct(vector_state(psi.clone()).unwrap()), ct(vector_state(psi).unwrap()), NormPair::TWO).unwrap();
    for m in 0..4 {
        assert_close(pure.row_prob(m), as_dyad.row_prob(m), 1e-12);
        assert_close(pure.col_prob(m), as_dyad.col_prob(m), 1e-12);
        for k in 0..4 {
            let (a, b) = (pure.ratios(m, k).unwrap(), as_dyad.ratios(m, k).unwrap());
            assert!((a.0 - b.0).norm() <= 1e-9 && (a.1 - b.1).norm() <= 1e-9);
        }
    }
}

#[test]
fn random_density_passes_cauchy_schwarz() {
    let mut rng = RngStream::new(5, 0);
    let rho = random_density(&mut rng, 8);
    let d = density(rho.clone()).unwrap();
    for m in 0..8 {
        for n in 0..8 {
            assert!(rho[(m, n)].norm() <= (rho[(m, m)].re * rho[(n, n)].re).sqrt() * (1.0 + 1e-12));
            assert!(d.ratios(m, n).is_ok());
        }
    }
    assert_state_certified("B†B/Tr", &d);
}

#[test]
fn density_errors() {
    let not_psd = ComplexMatrix::from_real(2, 2, &[0.5, 0.9, 0.9, 0.5]).unwrap();
    let d = density(not_psd).unwrap();
    assert!(matches!(d.ratios(0, 1), Err(pathsim::eps::SampleFault::NormViolation { m: 0, n: 1 })));
    assert!(matches!(
        density(ComplexMatrix::identity(3)),
        Err(Error::NotNormalized { .. })
    ));
    assert!(density(ComplexMatrix::zeros(2, 3)).is_err());
    assert!(density(ComplexMatrix::from_real(2, 2, &[1.5, 0.0, 0.0, -0.5]).unwrap()).is_err());
}

#[test]
fn low_rank_single_term_is_dyad() {
    let mut rng = RngStream::new(6, 0);
    for pv in [2.0, 3.0] {
        let pq = p(pv);
        let u = normalized(random_vector(&mut rng, 5), pq.p());
        let v = normalized(random_vector(&mut rng, 4), pq.q());
        let s = c(0.0, -2.5);
        let lr = low_rank(vec![(s, u.clone(), v.clone())], pq).unwrap();
        assert_close(lr.bound(), 2.5, 1e-15);
        let bra: Vec<C64> = u.iter().map(|z| z.conj()).collect();
        let want = ComplexMatrix::outer(&v, &bra).scale(s);
        assert_matrix_close(&lr.to_dense().unwrap(), &want, 1e-14);
        let d = dyad(ct(vector_state(v).unwrap()), ct(vector_state(bra).unwrap()), pq).unwrap();
        for n in 0..5 {
            assert_close(lr.col_prob(n), d.col_prob(n), 1e-12);
        }
        assert_state_certified(&format!("low_rank p={pv}"), &lr);
    }
}

#[test]
fn low_rank_psd_bound_is_trace_norm() {
    let mut rng = RngStream::new(7, 0);
    let b = random_matrix(&mut rng, 2, 4);
    let psd = b.adjoint().matmul(&b).unwrap();
    let eig = to_na(&psd).symmetric_eigen();
    let mut terms = Vec::new();
    for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda > 1e-9 {
            let v: Vec<C64> = eig.eigenvectors.column(k).iter().cloned().collect();
            let u: Vec<C64> = v.iter().map(|z| z.conj()).collect();
            terms.push((r(lambda), u, v));
        }
    }
    assert_eq!(terms.len(), 2);
    let lr = low_rank(terms, NormPair::TWO).unwrap();
    let trace_norm: f64 = DMatrix::from_fn(4, 4, |m, n| psd[(m, n)]).singular_values().sum();
    assert_close(lr.bound(), trace_norm, 1e-9);
    assert_matrix_close(&lr.to_dense().unwrap(), &psd, 1e-12);
    assert_state_certified("rank-2 PSD", &lr);
}

#[test]
fn low_rank_errors() {
    let e = vec![r(1.0), r(0.0)];
    assert!(matches!(
        low_rank(vec![(r(1.0), vec![r(1.0), r(1.0)], e.clone())], NormPair::TWO),
        Err(Error::NotNormalized { .. })
    ));
    assert!(low_rank(vec![], NormPair::TWO).is_err());
    assert!(matches!(
        low_rank(vec![(r(1.0), e.clone(), e.clone()), (r(1.0), vec![r(1.0)], e.clone())], NormPair::TWO),
        Err(Error::DimensionMismatch(_))
    ));
    assert_eq!(low_rank(vec![(r(0.0), e.clone(), e)], NormPair::TWO).err(), Some(Error::ZeroVector));
}

#[test]
fn states_as_operators_keep_bound() {
    let mut rng = RngStream::new(8, 0);
    let states: Vec<State> = vec![
        Arc::new(dyad(ct(vector_state(random_vector(&mut rng, 4)).unwrap()), ct(uniform_state(4).unwrap()), NormPair::TWO).unwrap()),
        Arc::new(density(random_density(&mut rng, 4)).unwrap()),
        Arc::new(
            low_rank(
                vec![
                    (r(0.7), normalized(random_vector(&mut rng, 4), 3.0), normalized(random_vector(&mut rng, 4), 1.5)),
                    (c(0.0, 0.3), normalized(random_vector(&mut rng, 4), 3.0), normalized(random_vector(&mut rng, 4), 1.5)),
                ],
                p(3.0),
            )
            .unwrap(),
        ),
    ];
    for s in states {
        let o = EhtAsEps::new(s.clone());
        assert_eq!(o.bound(), s.bound());
        assert_matrix_close(&o.to_dense().unwrap(), &s.to_dense().unwrap(), 0.0);
        let cert = certify(&o).unwrap();
        assert!(cert.max_cost <= o.bound() + 1e-9, "{}: {cert:?}", s.label());
        assert!(cert.max_entry_error <= 1e-12, "{}: {cert:?}", s.label());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_dyads_certified(seed in any::<u64>(), m in 1usize..9, n in 1usize..9,
                              pv in prop::sample::select(vec![1.0, 1.5, 2.0, 4.0, f64::INFINITY])) {
        let mut rng = RngStream::new(seed, 0);
        let d = dyad(ct(vector_state(random_vector(&mut rng, m)).unwrap()),
                     ct(vector_state(random_vector(&mut rng, n)).unwrap()), p(pv)).unwrap();
        let cert = certify_state(&d).unwrap();
        prop_assert!(cert.max_cost <= d.bound() + 1e-9);
        prop_assert!(cert.max_entry_error <= 1e-12);
        prop_assert!(cert.col_mass_error <= 1e-12 && cert.row_mass_error <= 1e-12);
        let lower = induced_norm(&entrywise_abs(&d.to_dense().unwrap()), d.norm_pair().q()).unwrap();
        prop_assert!(d.bound() >= lower - 1e-6);
    }

    #[test]
    fn random_densities_certified(seed in any::<u64>(), n in 1usize..9) {
        let mut rng = RngStream::new(seed, 0);
        let d = density(random_density(&mut rng, n)).unwrap();
        let cert = certify_state(&d).unwrap();
        prop_assert!(cert.max_cost <= 1.0 + 1e-9);
        prop_assert!(cert.col_mass_error <= 1e-12);
    }
}
