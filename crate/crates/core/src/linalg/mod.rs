//! Dense and sparse complex matrices, induced norms of nonnegative matrices and the dense oracle.

mod dense;
mod matrix;
mod norms;

pub use dense::{dense_exp, exact_oracle, exact_oracle_with_cap, DEFAULT_ORACLE_CAP};
pub(crate) use dense::dense_guard;
pub use matrix::{ComplexMatrix, SparseEntries, C64};
pub use norms::{
    block_decompose, dual_exponent, entrywise_abs, generalized_singular_vectors, induced_norm, lp_norm, Block,
    NormPair, PositiveVectorPair, POWER_MAX_ITERATIONS, POWER_TOLERANCE,
};
pub(crate) use norms::NonnegSparse;
