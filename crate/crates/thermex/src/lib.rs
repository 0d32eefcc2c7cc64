//! Exact relations, links and effective tensors for two-dimensional
//! thermoelectric composites.
//!
//! The canonical tensor `L` is a symmetric positive definite operator on
//! `R² ⊕ R²` (two fields, two space dimensions). Everything here is phrased
//! in the `K(X,Y)` calculus of [`tensor4`].
// `!(x > 0.0)` is meant to catch NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algebra;
pub mod error;
pub mod exactrel;
pub mod io;
pub mod laminate;
pub mod linkgroup;
pub mod materials;
pub mod polycrystal;
pub mod tensor4;
pub mod testutil;
pub mod twophase;

pub use error::{Error, Result};
pub use tensor4::{BlockTensor, CMat2, KTensor, RMat2, RMat4, C64};

/// Default seed for randomized verification.
pub const DEFAULT_SEED: u64 = 0x5EED;
