use std::time::Duration;

use nalgebra::DMatrix;

use super::{drs_solve, AffineProjector, DrsConfig, DrsResult};
use crate::error::{Error, Result};
use crate::linalg::{asymmetry, ensure_finite, mp_residuals, svd_full, symmetrize};
use crate::scalar::Real;

const SYMMETRY_TOL: f64 = 1e-10;

/// The affine set `{H : AHA = A, H = H^T}` of symmetric generalized inverses
/// of a symmetric `A`.
///
/// Projection:
/// `Pi(V) = (V + V^T)/2 - AA^+ (V + V^T)/2 A^+A + A^+`.
/// For symmetric `A` the projector `AA^+ = A^+A = Q Q^T` with `Q` an
/// orthonormal basis of the range of `A`, which is what the hot loop uses.
#[derive(Debug, Clone)]
pub struct SymmetricGinvSet<T: Real> {
    a: DMatrix<T>,
    a_dagger: DMatrix<T>,
    projector: DMatrix<T>,
    range_basis: DMatrix<T>,
}

impl<T: Real> SymmetricGinvSet<T> {
    pub fn new(a: &DMatrix<T>, rank_tol: T) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::Input(format!(
                "symmetric problem needs a square matrix, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        ensure_finite(a, "matrix")?;
        let asym = asymmetry(a);
        if asym > T::lit(SYMMETRY_TOL) * a.norm() {
            return Err(Error::Input(format!(
                "matrix is not symmetric: ||A - A^T||_F = {asym:e}"
            )));
        }
        let f = svd_full(a, rank_tol)?;
        let a_dagger = symmetrize(&f.pseudoinverse());
        let range_basis = f.u1();
        let projector = &range_basis * range_basis.transpose();
        Ok(SymmetricGinvSet {
            a: a.clone(),
            a_dagger,
            projector,
            range_basis,
        })
    }

    pub fn a_dagger(&self) -> &DMatrix<T> {
        &self.a_dagger
    }

    /// `AA^+`, the orthogonal projector onto the range of `A`.
    pub fn projector(&self) -> &DMatrix<T> {
        &self.projector
    }

    pub fn rank(&self) -> usize {
        self.range_basis.ncols()
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }
}

impl<T: Real> AffineProjector<T> for SymmetricGinvSet<T> {
    fn shape(&self) -> (usize, usize) {
        self.a.shape()
    }

    fn project(&self, v: &DMatrix<T>) -> DMatrix<T> {
        let s = symmetrize(v);
        let q = &self.range_basis;
        let core = q.transpose() * &s * q;
        let r = s - q * core * q.transpose() + &self.a_dagger;
        symmetrize(&r)
    }

    fn membership_residual(&self, h: &DMatrix<T>) -> T {
        let p1 = (&self.a * h * &self.a - &self.a).norm();
        let na = self.a.norm();
        let p1 = if na > T::zero() { p1 / na } else { p1 };
        let nh = h.norm();
        let sym = asymmetry(h);
        let sym = if nh > T::zero() { sym / nh } else { sym };
        p1.max(sym)
    }

    fn matrix(&self) -> &DMatrix<T> {
        &self.a
    }
}

/// Sparse symmetric generalized inverse of a symmetric `A`: minimizes
/// `||H||_1` subject to `AHA = A`, `H = H^T`, starting from `A^+`.
pub fn solve_symmetric_ginv<T: Real>(a: &DMatrix<T>, cfg: &DrsConfig<T>) -> Result<DrsResult<T>> {
    cfg.validate()?;
    let set = SymmetricGinvSet::new(a, cfg.rank_tol)?;
    if set.rank() == 0 {
        // Every symmetric matrix is feasible; zero has the least 1-norm.
        let h = DMatrix::zeros(a.nrows(), a.ncols());
        return Ok(DrsResult {
            residuals: mp_residuals(a, &h)?,
            h,
            objective: T::zero(),
            iterations: 0,
            converged: true,
            timed_out: false,
            tau_norm: T::zero(),
            ref_norm: T::zero(),
            elapsed: Duration::ZERO,
            history: cfg.record_history.then(Vec::new),
        });
    }
    drs_solve(&set, set.a_dagger(), cfg)
}

/// Tests the single-equation characterization `AHA + H = A + H^T`, which for
/// symmetric `A` holds exactly when `H` is a symmetric generalized inverse.
/// Returns `false` for non-conformal shapes.
pub fn check_sym_characterization<T: Real>(a: &DMatrix<T>, h: &DMatrix<T>, tol: T) -> bool {
    if !a.is_square() || h.shape() != a.shape() {
        return false;
    }
    let lhs = a * h * a + h - a - h.transpose();
    lhs.norm() <= tol * a.norm().max(T::one())
}
