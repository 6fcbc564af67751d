use nalgebra::DMatrix;

use super::{drs_solve, AffineProjector, DrsConfig, DrsResult};
use crate::error::{Error, Result};
use crate::linalg::{mp_residuals, svd_full, SvdFactors};
use crate::scalar::Real;

/// Ah-symmetric reflexive generalized inverses of `A` (Penrose equations
/// 1, 2 and 3), parametrized by a free block `Z` as
/// `H = G + V2 Z U1^T` with `G = V1 D^{-1} U1^T = A^+`.
///
/// Because `V2` and `U1` have orthonormal columns, the Frobenius projection
/// onto this affine set is `G + V2 V2^T (M - G) U1 U1^T`.
#[derive(Debug, Clone)]
pub struct AhRefGinvSet<T: Real> {
    a: DMatrix<T>,
    factors: SvdFactors<T>,
    g: DMatrix<T>,
    v2: DMatrix<T>,
    u1: DMatrix<T>,
}

impl<T: Real> AhRefGinvSet<T> {
    pub fn new(a: &DMatrix<T>, rank_tol: T) -> Result<Self> {
        let factors = svd_full(a, rank_tol)?;
        if factors.rank() == 0 {
            return Err(Error::Input(
                "matrix is numerically zero; no generalized-inverse constraint to enforce".into(),
            ));
        }
        Ok(AhRefGinvSet {
            a: a.clone(),
            g: factors.pseudoinverse(),
            v2: factors.v2(),
            u1: factors.u1(),
            factors,
        })
    }

    pub fn factors(&self) -> &SvdFactors<T> {
        &self.factors
    }

    /// `G = V1 D^{-1} U1^T`.
    pub fn g(&self) -> &DMatrix<T> {
        &self.g
    }

    pub fn v2(&self) -> &DMatrix<T> {
        &self.v2
    }

    pub fn u1(&self) -> &DMatrix<T> {
        &self.u1
    }

    pub fn rank(&self) -> usize {
        self.factors.rank()
    }

    /// `G + V2 Z U1^T` for a `(n - r) x r` block `Z`.
    pub fn h_from_z(&self, z: &DMatrix<T>) -> Result<DMatrix<T>> {
        let expected = (self.v2.ncols(), self.u1.ncols());
        if z.shape() != expected {
            return Err(Error::dims("h_from_z", expected, z.shape()));
        }
        Ok(&self.g + &self.v2 * z * self.u1.transpose())
    }

    /// Free block of a member of the set: `Z = V2^T (H - G) U1`.
    pub fn z_of(&self, h: &DMatrix<T>) -> Result<DMatrix<T>> {
        if h.shape() != self.g.shape() {
            return Err(Error::dims("z_of", self.g.shape(), h.shape()));
        }
        Ok(self.v2.transpose() * (h - &self.g) * &self.u1)
    }
}

impl<T: Real> AffineProjector<T> for AhRefGinvSet<T> {
    fn shape(&self) -> (usize, usize) {
        self.g.shape()
    }

    fn project(&self, m: &DMatrix<T>) -> DMatrix<T> {
        let k = self.v2.transpose() * (m - &self.g) * &self.u1;
        &self.g + &self.v2 * k * self.u1.transpose()
    }

    fn membership_residual(&self, h: &DMatrix<T>) -> T {
        match mp_residuals(&self.a, h) {
            Ok(r) => T::lit(r.max_rel_123()),
            Err(_) => T::max_value().expect("bounded scalar"),
        }
    }

    fn matrix(&self) -> &DMatrix<T> {
        &self.a
    }
}

/// Sparse ah-symmetric reflexive generalized inverse: minimizes `||H||_1`
/// over `H = G + V2 Z U1^T`, starting from `G = A^+`.
pub fn solve_ahref_ginv<T: Real>(a: &DMatrix<T>, cfg: &DrsConfig<T>) -> Result<DrsResult<T>> {
    cfg.validate()?;
    let set = AhRefGinvSet::new(a, cfg.rank_tol)?;
    drs_solve(&set, set.g(), cfg)
}
