use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use pathsim::engine::{estimate_expectation, expectation_operator, sample_path, EstimateOptions};
use pathsim::sampler::{sample_discrete, RngStream};
use pathsim_bench::{grover_oracle, haar_chain, step_ops};

fn discrete(c: &mut Criterion) {
    let mut group = c.benchmark_group("sample_discrete");
    for n in [4usize, 64, 1024] {
        let weights: Vec<f64> = (1..=n).map(|i| i as f64).collect();
        let mut rng = RngStream::new(0, 0);
        group.bench_with_input(BenchmarkId::from_parameter(n), &weights, |b, w| {
            b.iter(|| sample_discrete(w, &mut rng).unwrap())
        });
    }
    group.finish();
}

fn steps(c: &mut Criterion) {
    let mut group = c.benchmark_group("step_forward");
    for n in [3usize, 10] {
        for (name, op) in step_ops(n) {
            let mut rng = RngStream::new(1, 0);
            let mut row = 0;
            group.bench_function(BenchmarkId::new(name, n), |b| {
                b.iter(|| {
                    row = (row + 7) % (1 << n);
                    op.step_forward(row, &mut rng)
                })
            });
        }
    }
    group.finish();
}

fn paths(c: &mut Criterion) {
    let mut group = c.benchmark_group("sample_path");
    for (name, circuit) in [("grover_oracle_8q", grover_oracle(8)), ("haar_chain_10q_x4", haar_chain(10, 4))] {
        let a = expectation_operator(&circuit).unwrap();
        let mut rng = RngStream::new(2, 0);
        group.bench_function(name, |b| b.iter(|| sample_path(circuit.initial().as_ref(), &a, &mut rng)));
    }
    group.finish();
}

fn estimates(c: &mut Criterion) {
    let circuit = grover_oracle(3);
    let mut group = c.benchmark_group("estimate_expectation");
    group.sample_size(10);
    for workers in [1usize, 2] {
        group.bench_with_input(BenchmarkId::new("grover_oracle_3q_eps0.2", workers), &workers, |b, &w| {
            b.iter(|| estimate_expectation(&circuit, 0.2, 0.05, EstimateOptions::new(0, w)).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, discrete, steps, paths, estimates);
criterion_main!(benches);
