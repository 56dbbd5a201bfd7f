//! Classification of finite-dimensional bipartite quantum states by their
//! correlation content.
//!
//! The crate covers three layers:
//!
//! - entanglement, witnessed by the partial transpose ([`states`]);
//! - entropic correlations and quantum discord, with an exact algebraic
//!   certificate for zero discord ([`correlations`]);
//! - finite linear local-hidden-variable models and operator-frame
//!   quasiprobability representations ([`lhv`], [`quasiprob`]).
//!
//! A separable state `ρ = Σ p_i ρ^a_i ⊗ ρ^b_i` always yields a linear model
//! whose events carry the kernels `ρ^a_i`, `ρ^b_i`. Such a model is *tight*
//! (every subset of events is the outcome of some quantum effect) exactly
//! when the kernels on that side are pairwise support-orthogonal; kernels
//! that coincide must first be merged into one event
//! ([`lhv::LinearLhvModel::merge_equal_kernels`]). A state admits a tight
//! model on both sides exactly when it is classical-classical, i.e. has
//! zero discord in both directions.

// `!(x > 0.0)` is used on purpose so NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fmt;

use serde::{Deserialize, Serialize};

pub mod correlations;
pub mod error;
pub mod io;
pub mod lhv;
pub mod operator;
pub mod quasiprob;
pub mod states;

#[cfg(test)]
pub(crate) mod testutil;

pub use error::{Error, Result};
pub use operator::{ComplexMatrix, HermitianOperator, Spectrum};
pub use states::{
    BipartiteState, CCDecomposition, CQDecomposition, DensityMatrix, Effect, Povm,
    ProjectiveBasis, SeparableDecomposition,
};

/// One of the two subsystems of a bipartite state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    A,
    B,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::A => Side::B,
            Side::B => Side::A,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::A => f.write_str("a"),
            Side::B => f.write_str("b"),
        }
    }
}
