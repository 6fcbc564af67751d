//! Sparse generalized inverses by entrywise 1-norm minimization.
//!
//! The crate computes symmetric generalized inverses of symmetric matrices
//! and ah-symmetric reflexive generalized inverses of general matrices with a
//! Douglas-Rachford splitting scheme whose second proximal step is a
//! closed-form affine projection. The resulting inverses act as closed-form
//! solvers for least-squares and generalized Tikhonov problems.
//!
//! All numeric code is generic over [`Real`] (`f32` or `f64`); the `*64`
//! aliases below fix the usual double-precision instantiation.

// NaN must fail validation, so `!(x >= 0)` is deliberate.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod drs;
pub mod error;
pub mod generate;
pub mod linalg;
pub mod lp;
pub mod lsq;
pub mod mtx;
pub mod scalar;

pub use error::{Error, Result};
pub use linalg::{
    frobenius, gamma_blocks, mp_residuals, norm0, norm1, pseudoinverse, reconstruct_from_blocks,
    svd_full, DenseMatrix, GammaBlocks, MpResiduals, SparseMatrix, SvdFactors,
};
pub use scalar::Real;

pub type DenseMatrix64 = linalg::DenseMatrix<f64>;
pub type SparseMatrix64 = SparseMatrix<f64>;
pub type SvdFactors64 = SvdFactors<f64>;
pub type GammaBlocks64 = GammaBlocks<f64>;
pub type DrsConfig64 = drs::DrsConfig<f64>;
pub type DrsResult64 = drs::DrsResult<f64>;
pub type LsqInstance64 = lsq::LsqInstance<f64>;

pub type DenseMatrix32 = linalg::DenseMatrix<f32>;
pub type DrsConfig32 = drs::DrsConfig<f32>;
