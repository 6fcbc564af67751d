use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Coordinate (triplet) storage.
///
/// Triplets are kept in canonical order, sorted by `(col, row)`, with no
/// duplicate positions and no stored zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix<T: Real> {
    rows: usize,
    cols: usize,
    triplets: Vec<(usize, usize, T)>,
}

impl<T: Real> SparseMatrix<T> {
    /// Validates and canonicalizes `triplets`. Explicit zeros are dropped;
    /// duplicate positions are rejected.
    pub fn new(rows: usize, cols: usize, mut triplets: Vec<(usize, usize, T)>) -> Result<Self> {
        for &(i, j, v) in &triplets {
            if i >= rows || j >= cols {
                return Err(Error::Input(format!(
                    "entry ({i}, {j}) outside a {rows}x{cols} matrix"
                )));
            }
            if !v.finite() {
                return Err(Error::Input(format!("non-finite value at ({i}, {j})")));
            }
        }
        triplets.retain(|t| t.2 != T::zero());
        triplets.sort_by_key(|&(i, j, _)| (j, i));
        if let Some(w) = triplets.windows(2).find(|w| (w[0].0, w[0].1) == (w[1].0, w[1].1)) {
            return Err(Error::Input(format!("duplicate entry at ({}, {})", w[0].0, w[0].1)));
        }
        Ok(SparseMatrix { rows, cols, triplets })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        SparseMatrix {
            rows,
            cols,
            triplets: Vec::new(),
        }
    }

    /// Keeps every exactly-nonzero entry of `m`.
    pub fn from_dense(m: &DMatrix<T>) -> Self {
        let mut triplets = Vec::new();
        // Column-major iteration already yields (col, row) order.
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                let v = m[(i, j)];
                if v != T::zero() {
                    triplets.push((i, j, v));
                }
            }
        }
        SparseMatrix {
            rows: m.nrows(),
            cols: m.ncols(),
            triplets,
        }
    }

    pub fn to_dense(&self) -> DMatrix<T> {
        let mut m = DMatrix::zeros(self.rows, self.cols);
        for &(i, j, v) in &self.triplets {
            m[(i, j)] = v;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn triplets(&self) -> &[(usize, usize, T)] {
        &self.triplets
    }

    /// Stored entries.
    pub fn nnz(&self) -> usize {
        self.triplets.len()
    }

    /// Stored entries with magnitude above `tol`.
    pub fn norm0(&self, tol: T) -> usize {
        self.triplets.iter().filter(|t| t.2.abs() > tol).count()
    }

    pub fn norm1(&self) -> T {
        self.triplets.iter().fold(T::zero(), |acc, t| acc + t.2.abs())
    }

    /// `nnz / (rows * cols)`.
    pub fn density(&self) -> f64 {
        let cells = (self.rows * self.cols) as f64;
        if cells == 0.0 {
            0.0
        } else {
            self.nnz() as f64 / cells
        }
    }

    pub fn transpose(&self) -> Self {
        let mut triplets: Vec<_> = self.triplets.iter().map(|&(i, j, v)| (j, i, v)).collect();
        triplets.sort_by_key(|&(i, j, _)| (j, i));
        SparseMatrix {
            rows: self.cols,
            cols: self.rows,
            triplets,
        }
    }
}
