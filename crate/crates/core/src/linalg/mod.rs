//! Dense and sparse matrix primitives, the full SVD with numeric rank, the
//! Moore-Penrose pseudoinverse, the SVD block parametrization of generalized
//! inverses and the Penrose residuals.

mod blocks;
mod residuals;
mod sparse;
mod svd;

pub use blocks::{gamma_blocks, reconstruct_from_blocks, GammaBlocks};
pub use residuals::{mp_residuals, MpResiduals};
pub use sparse::SparseMatrix;
pub use svd::{numeric_rank, pseudoinverse, svd_full, SvdFactors};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Dense column-major storage. Constructors in this module validate
/// finiteness; the alias keeps the full nalgebra API available.
pub type DenseMatrix<T> = DMatrix<T>;

/// Default relative cutoff for the numeric rank, `sigma_i > tol * sigma_max`.
pub const DEFAULT_RANK_TOL: f64 = 1e-8;

/// Default magnitude above which an entry counts as nonzero.
pub const DEFAULT_ZERO_TOL: f64 = 1e-5;

/// Builds a dense matrix from entries listed row by row.
pub fn dense_from_row_major<T: Real>(rows: usize, cols: usize, values: &[T]) -> Result<DMatrix<T>> {
    if values.len() != rows * cols {
        return Err(Error::Input(format!(
            "expected {} entries for a {rows}x{cols} matrix, got {}",
            rows * cols,
            values.len()
        )));
    }
    let m = DMatrix::from_row_slice(rows, cols, values);
    ensure_finite(&m, "matrix")?;
    Ok(m)
}

pub fn ensure_finite<T: Real>(m: &DMatrix<T>, what: &str) -> Result<()> {
    match m.iter().position(|v| !v.finite()) {
        None => Ok(()),
        Some(k) => Err(Error::Input(format!(
            "{what} has a non-finite entry at ({}, {})",
            k % m.nrows(),
            k / m.nrows()
        ))),
    }
}

pub(crate) fn ensure_shape<T: Real>(
    op: &'static str,
    m: &DMatrix<T>,
    expected: (usize, usize),
) -> Result<()> {
    if m.shape() != expected {
        return Err(Error::dims(op, expected, m.shape()));
    }
    Ok(())
}

/// Number of entries with magnitude strictly above `tol`.
pub fn norm0<T: Real>(m: &DMatrix<T>, tol: T) -> usize {
    m.iter().filter(|v| v.abs() > tol).count()
}

/// Entrywise 1-norm, `||vec(M)||_1`.
pub fn norm1<T: Real>(m: &DMatrix<T>) -> T {
    m.iter().fold(T::zero(), |acc, v| acc + v.abs())
}

pub fn frobenius<T: Real>(m: &DMatrix<T>) -> T {
    m.norm()
}

/// `||M - M^T||_F <= rel_tol * ||M||_F` (square matrices only).
pub fn is_symmetric<T: Real>(m: &DMatrix<T>, rel_tol: T) -> bool {
    m.is_square() && asymmetry(m) <= rel_tol * m.norm()
}

/// `||M - M^T||_F`.
pub fn asymmetry<T: Real>(m: &DMatrix<T>) -> T {
    let n = m.nrows();
    let mut acc = T::zero();
    for j in 0..n {
        for i in (j + 1)..n {
            let d = m[(i, j)] - m[(j, i)];
            acc += d * d;
        }
    }
    (acc + acc).sqrt()
}

/// `(M + M^T) / 2`.
pub fn symmetrize<T: Real>(m: &DMatrix<T>) -> DMatrix<T> {
    let half = T::lit(0.5);
    (m + m.transpose()) * half
}
