//! Turns parsed specs into core objects.

use std::path::Path;
use std::sync::Arc;

use pathsim::eht::{
    basis_state, density, dyad, low_rank, phase_state, product_state, uniform_state, vector_state, CtState,
};
use pathsim::engine::Circuit;
use pathsim::eps::{
    adjoint, controlled, exp, fourier, from_dense_optimal, from_rowcol, grover_reflection, hadamard,
    pauli_string, permutation, product, projector_family, scale, sparse_ecs, sum, tensor_embed, transpose,
    diagonal_unitary, HaarWavelet, Identity, OracleOp, ProjectorBasis,
};
use pathsim::linalg::SparseEntries;
use pathsim::{ComplexMatrix, NormPair, Op, Result, State, C64};

use crate::schema::{Basis, CircuitFile, Cx, DenseMethod, KetSpec, OpSpec, StateSpec};
use crate::CliError;

fn cx(z: &Cx) -> C64 {
    C64::new(z[0], z[1])
}

fn cxs(zs: &[Cx]) -> Vec<C64> {
    zs.iter().map(cx).collect()
}

fn matrix(rows: &[Vec<Cx>]) -> Result<ComplexMatrix> {
    ComplexMatrix::from_rows(&rows.iter().map(|r| cxs(r)).collect::<Vec<_>>())
}

pub fn build_ket(spec: &KetSpec, dim: usize) -> Result<Arc<dyn CtState>> {
    Ok(match spec {
        KetSpec::Basis { index } => Arc::new(basis_state(dim, *index)?),
        KetSpec::Product { factors } => Arc::new(product_state(factors.iter().map(|f| cxs(f)).collect())?),
        KetSpec::Phase { thetas } => Arc::new(phase_state(thetas.clone())?),
        KetSpec::Uniform {} => Arc::new(uniform_state(dim)?),
        KetSpec::Vector { amplitudes } => Arc::new(vector_state(cxs(amplitudes))?),
    })
}

/// `base` resolves `density_file` paths.
pub fn build_state(spec: &StateSpec, dim: usize, pq: NormPair, base: &Path) -> Result<State, CliError> {
    if let Some(ket) = spec.as_ket() {
        let ket = build_ket(&ket, dim)?;
        return Ok(Arc::new(dyad(ket.clone(), ket, pq)?));
    }
    Ok(match spec {
        StateSpec::Dyad { ket, bra } => Arc::new(dyad(build_ket(ket, dim)?, build_ket(bra, dim)?, pq)?),
        StateSpec::Density { matrix: m } => Arc::new(density(matrix(m)?)?),
        StateSpec::DensityFile { path } => {
            let path = base.join(path);
            let text = std::fs::read_to_string(&path)
                .map_err(|e| CliError::Schema(format!("{}: {e}", path.display())))?;
            let rows: Vec<Vec<Cx>> = serde_json::from_str(&text)
                .map_err(|e| CliError::Schema(format!("{}: {e}", path.display())))?;
            Arc::new(density(matrix(&rows)?)?)
        }
        StateSpec::LowRank { terms } => Arc::new(low_rank(
            terms.iter().map(|t| (cx(&t.s), cxs(&t.u), cxs(&t.v))).collect(),
            pq,
        )?),
        _ => unreachable!("pure states handled above"),
    })
}

pub fn build_op(spec: &OpSpec, pq: NormPair) -> Result<Op> {
    Ok(match spec {
        OpSpec::Dense { matrix: m, method } => {
            let a = matrix(m)?;
            Arc::new(match method {
                DenseMethod::Optimal => from_dense_optimal(&a, pq)?,
                DenseMethod::Rowcol => from_rowcol(&a, pq)?,
            })
        }
        OpSpec::Sparse { rows, cols, entries } => {
            let triplets = entries.iter().map(|(m, n, z)| (*m, *n, cx(z))).collect();
            Arc::new(sparse_ecs(&SparseEntries::new(*rows, *cols, triplets)?, pq)?)
        }
        OpSpec::Identity { dim } => Arc::new(Identity::new(*dim, pq)),
        OpSpec::Permutation { perm, phases } => {
            Arc::new(permutation(perm.clone(), phases.as_deref().map(cxs), pq)?)
        }
        OpSpec::Diagonal { phases } => Arc::new(diagonal_unitary(cxs(phases), pq)?),
        OpSpec::Pauli { string } => Arc::new(pauli_string(string, pq)?),
        OpSpec::Hadamard { n_qubits } => Arc::new(hadamard(*n_qubits, pq)?),
        OpSpec::Fourier { dim } => Arc::new(fourier(*dim, pq)?),
        OpSpec::Grover { n_qubits } => Arc::new(grover_reflection(*n_qubits, pq)?),
        OpSpec::Haar { n_qubits } => Arc::new(HaarWavelet::new(*n_qubits, pq)?),
        OpSpec::Oracle { table, y_dim } => Arc::new(OracleOp::from_table(table.clone(), *y_dim, pq)?),
        OpSpec::Scale { coeff, op } => Arc::new(scale(cx(coeff), build_op(op, pq)?)),
        OpSpec::Adjoint { op } => Arc::new(adjoint(build_op(op, pq.dual())?)),
        OpSpec::Transpose { op } => Arc::new(transpose(build_op(op, pq.dual())?)),
        OpSpec::Sum { terms, weights } => {
            let terms = terms.iter().map(|t| Ok((cx(&t.coeff), build_op(&t.op, pq)?))).collect::<Result<_>>()?;
            Arc::new(sum(terms, weights.clone())?)
        }
        OpSpec::Product { factors } => {
            Arc::new(product(factors.iter().map(|f| build_op(f, pq)).collect::<Result<_>>()?)?)
        }
        OpSpec::Exp { op } => Arc::new(exp(build_op(op, pq)?)?),
        OpSpec::Controlled { family } => {
            Arc::new(controlled(family.iter().map(|f| build_op(f, pq)).collect::<Result<_>>()?)?)
        }
        OpSpec::TensorEmbed { op, left, right } => Arc::new(tensor_embed(build_op(op, pq)?, *left, *right)?),
        OpSpec::ProjectorFamily { table, target_dim, basis } => {
            let basis = match basis {
                Basis::Fourier => ProjectorBasis::Fourier,
                Basis::Hadamard => ProjectorBasis::Hadamard,
            };
            Arc::new(projector_family(table, *target_dim, basis, pq)?)
        }
    })
}

pub fn norm_pair(file: &CircuitFile) -> Result<NormPair> {
    NormPair::new(file.p)
}

/// Checks the version and assembles the circuit.
pub fn build_circuit(file: &CircuitFile, base: &Path) -> Result<Circuit, CliError> {
    check_version(file)?;
    if file.n_levels.is_empty() || file.n_levels.contains(&0) {
        return Err(CliError::Schema(format!("n_levels must be nonempty and positive, got {:?}", file.n_levels)));
    }
    let pq = norm_pair(file)?;
    let state = build_state(&file.state, file.dim(), pq, base)?;
    let ops = file.ops.iter().map(|o| build_op(o, pq)).collect::<Result<Vec<_>>>()?;
    let measurement = build_op(&file.measurement, pq)?;
    Ok(Circuit::new(state, ops, measurement, file.n_levels.clone())?)
}

pub fn check_version(file: &CircuitFile) -> Result<(), CliError> {
    if file.schema_version != crate::schema::SCHEMA_VERSION {
        return Err(CliError::Schema(format!(
            "schema_version {} is not supported (expected {})",
            file.schema_version,
            crate::schema::SCHEMA_VERSION
        )));
    }
    Ok(())
}
