//! Monte Carlo estimation of quantum circuit quantities by sampling Feynman paths.
//!
//! Operators implement [`EpsOperator`] and expose forward and backward transition samplers
//! with a cost bound `b`; endpoint matrices implement [`EhtState`]. The [`engine`] chains
//! them into trace, expectation and amplitude estimators with Chernoff-controlled sample counts.

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod eht;
pub mod engine;
pub mod eps;
pub mod error;
pub mod linalg;
pub mod sampler;

pub use eht::{EhtState, State};
pub use eps::{EpsOperator, Op};
pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, NormPair, C64};
pub use sampler::{EstimateReport, RngStream};
