//! Circuits shared by the benchmarks.

use std::sync::Arc;

use pathsim::eht::{dyad, product_state, uniform_state, CtState};
use pathsim::engine::Circuit;
use pathsim::eps::{fourier, grover_reflection, hadamard, pauli_string, projector_family, HaarWavelet, OracleOp, ProjectorBasis};
use pathsim::{NormPair, Op, State, C64};

const TWO: NormPair = NormPair::TWO;

fn pure(state: Arc<dyn CtState>) -> State {
    Arc::new(dyad(state.clone(), state, TWO).expect("square dyad"))
}

/// `|+…+⟩`, an oracle marking `x = 1`, one Grover reflection, measured with a Fourier projector family.
pub fn grover_oracle(n_qubits: usize) -> Circuit {
    let d = 1 << n_qubits;
    let mut table = vec![0; d / 2];
    table[1] = 1;
    let ops: Vec<Op> = vec![
        Arc::new(OracleOp::from_table(table.clone(), 2, TWO).unwrap()),
        Arc::new(grover_reflection(n_qubits, TWO).unwrap()),
    ];
    let measurement = Arc::new(projector_family(&table, 2, ProjectorBasis::Fourier, TWO).unwrap());
    Circuit::new(pure(Arc::new(uniform_state(d).unwrap())), ops, measurement, vec![2; n_qubits]).unwrap()
}

/// Product state through `depth` Haar transforms, measured with `Z` on the top qubit.
pub fn haar_chain(n_qubits: usize, depth: usize) -> Circuit {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let qubit = vec![C64::new(s, 0.0), C64::new(0.0, s)];
    let state = pure(Arc::new(product_state(vec![qubit; n_qubits]).unwrap()));
    let ops: Vec<Op> = (0..depth).map(|_| Arc::new(HaarWavelet::new(n_qubits, TWO).unwrap()) as Op).collect();
    let z = format!("Z{}", "I".repeat(n_qubits - 1));
    Circuit::new(state, ops, Arc::new(pauli_string(&z, TWO).unwrap()), vec![2; n_qubits]).unwrap()
}

/// Single-operator zoo for per-step timings.
pub fn step_ops(n_qubits: usize) -> Vec<(&'static str, Op)> {
    vec![
        ("hadamard", Arc::new(hadamard(n_qubits, TWO).unwrap())),
        ("fourier", Arc::new(fourier(1 << n_qubits, TWO).unwrap())),
        ("haar", Arc::new(HaarWavelet::new(n_qubits, TWO).unwrap())),
        ("grover", Arc::new(grover_reflection(n_qubits, TWO).unwrap())),
    ]
}
