//! Circuit file format. Complex numbers are `[re, im]` pairs; `p` may be a number or `"inf"`.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub const SCHEMA_VERSION: u32 = 1;

pub type Cx = [f64; 2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitFile {
    pub schema_version: u32,
    pub n_levels: Vec<usize>,
    #[serde(default = "default_p", with = "p_value")]
    pub p: f64,
    pub state: StateSpec,
    #[serde(default)]
    pub ops: Vec<OpSpec>,
    pub measurement: OpSpec,
}

fn default_p() -> f64 {
    2.0
}

impl CircuitFile {
    pub fn dim(&self) -> usize {
        self.n_levels.iter().product()
    }
}

/// Vectors usable as either side of a dyad.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum KetSpec {
    Basis { index: usize },
    Product { factors: Vec<Vec<Cx>> },
    Phase { thetas: Vec<f64> },
    Uniform {},
    Vector { amplitudes: Vec<Cx> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateSpec {
    /// Pure states `|ψ⟩⟨ψ|`.
    Basis { index: usize },
    Product { factors: Vec<Vec<Cx>> },
    Phase { thetas: Vec<f64> },
    Uniform {},
    Vector { amplitudes: Vec<Cx> },
    /// `|ket⟩⟨bra|`.
    Dyad { ket: KetSpec, bra: KetSpec },
    Density { matrix: Vec<Vec<Cx>> },
    /// Path to a JSON file holding the density matrix, relative to the circuit file.
    DensityFile { path: String },
    LowRank { terms: Vec<LowRankTerm> },
}

impl StateSpec {
    /// The ket of a pure state, if this is one.
    pub fn as_ket(&self) -> Option<KetSpec> {
        Some(match self.clone() {
            StateSpec::Basis { index } => KetSpec::Basis { index },
            StateSpec::Product { factors } => KetSpec::Product { factors },
            StateSpec::Phase { thetas } => KetSpec::Phase { thetas },
            StateSpec::Uniform {} => KetSpec::Uniform {},
            StateSpec::Vector { amplitudes } => KetSpec::Vector { amplitudes },
            _ => return None,
        })
    }
}

/// Contributes `s·v[m]·u[n]` to entry `(m, n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LowRankTerm {
    pub s: Cx,
    pub u: Vec<Cx>,
    pub v: Vec<Cx>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DenseMethod {
    #[default]
    Optimal,
    Rowcol,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    Fourier,
    Hadamard,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum OpSpec {
    Dense {
        matrix: Vec<Vec<Cx>>,
        #[serde(default)]
        method: DenseMethod,
    },
    /// `(row, col, value)` triplets.
    Sparse { rows: usize, cols: usize, entries: Vec<(usize, usize, Cx)> },
    Identity { dim: usize },
    /// Row `m` holds its single entry in column `perm[m]`.
    Permutation {
        perm: Vec<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        phases: Option<Vec<Cx>>,
    },
    Diagonal { phases: Vec<Cx> },
    Pauli { string: String },
    Hadamard { n_qubits: usize },
    Fourier { dim: usize },
    Grover { n_qubits: usize },
    Haar { n_qubits: usize },
    /// `|x, y⟩ ↦ |x, y + table[x] mod y_dim⟩`.
    Oracle { table: Vec<usize>, y_dim: usize },
    Scale { coeff: Cx, op: Box<OpSpec> },
    Adjoint { op: Box<OpSpec> },
    Transpose { op: Box<OpSpec> },
    Sum {
        terms: Vec<SumTerm>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        weights: Option<Vec<f64>>,
    },
    /// Matrix product in the listed order.
    Product { factors: Vec<OpSpec> },
    Exp { op: Box<OpSpec> },
    /// `Σ_x |x⟩⟨x| ⊗ family[x]`.
    Controlled { family: Vec<OpSpec> },
    /// `I_left ⊗ op ⊗ I_right`.
    TensorEmbed { op: Box<OpSpec>, left: usize, right: usize },
    ProjectorFamily { table: Vec<usize>, target_dim: usize, basis: Basis },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SumTerm {
    pub coeff: Cx,
    pub op: OpSpec,
}

impl OpSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            OpSpec::Dense { .. } => "dense",
            OpSpec::Sparse { .. } => "sparse",
            OpSpec::Identity { .. } => "identity",
            OpSpec::Permutation { .. } => "permutation",
            OpSpec::Diagonal { .. } => "diagonal",
            OpSpec::Pauli { .. } => "pauli",
            OpSpec::Hadamard { .. } => "hadamard",
            OpSpec::Fourier { .. } => "fourier",
            OpSpec::Grover { .. } => "grover",
            OpSpec::Haar { .. } => "haar",
            OpSpec::Oracle { .. } => "oracle",
            OpSpec::Scale { .. } => "scale",
            OpSpec::Adjoint { .. } => "adjoint",
            OpSpec::Transpose { .. } => "transpose",
            OpSpec::Sum { .. } => "sum",
            OpSpec::Product { .. } => "product",
            OpSpec::Exp { .. } => "exp",
            OpSpec::Controlled { .. } => "controlled",
            OpSpec::TensorEmbed { .. } => "tensor_embed",
            OpSpec::ProjectorFamily { .. } => "projector_family",
        }
    }
}

mod p_value {
    use super::*;

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Number(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(p: &f64, s: S) -> Result<S::Ok, S::Error> {
        if p.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*p)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Raw::deserialize(d)? {
            Raw::Number(p) => Ok(p),
            Raw::Text(t) if t == "inf" => Ok(f64::INFINITY),
            Raw::Text(t) => Err(serde::de::Error::custom(format!("p must be a number or \"inf\", got {t:?}"))),
        }
    }
}
