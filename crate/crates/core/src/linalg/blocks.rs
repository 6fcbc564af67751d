use nalgebra::DMatrix;

use super::{ensure_shape, SvdFactors};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Partition of `Gamma = V^T H U` induced by the rank `r` of `A`:
///
/// ```text
///          r      m - r
/// Gamma = [ X      Y ]   r
///         [ Z      W ]   n - r
/// ```
///
/// Relative to `A = U Sigma V^T` with `D` the nonzero singular values:
/// `AHA = A` iff `X = D^{-1}`; given that, `HAH = H` iff `W = Z D Y`,
/// `AH` symmetric iff `Y = 0` and `HA` symmetric iff `Z = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaBlocks<T: Real> {
    pub x: DMatrix<T>,
    pub y: DMatrix<T>,
    pub z: DMatrix<T>,
    pub w: DMatrix<T>,
}

impl<T: Real> GammaBlocks<T> {
    /// Blocks of the pseudoinverse: `X = D^{-1}`, everything else zero.
    pub fn pseudoinverse(f: &SvdFactors<T>) -> Self {
        let (m, n, r) = (f.rows(), f.cols(), f.rank());
        let x = DMatrix::from_diagonal(&f.d().map(|d| T::one() / d));
        GammaBlocks {
            x,
            y: DMatrix::zeros(r, m - r),
            z: DMatrix::zeros(n - r, r),
            w: DMatrix::zeros(n - r, m - r),
        }
    }

    /// Checks every block against the `(m, n, r)` of `f`.
    pub fn check_dims(&self, f: &SvdFactors<T>) -> Result<()> {
        let (m, n, r) = (f.rows(), f.cols(), f.rank());
        ensure_shape("gamma block X", &self.x, (r, r))?;
        ensure_shape("gamma block Y", &self.y, (r, m - r))?;
        ensure_shape("gamma block Z", &self.z, (n - r, r))?;
        ensure_shape("gamma block W", &self.w, (n - r, m - r))?;
        Ok(())
    }

    /// The assembled `n x m` matrix `Gamma`.
    pub fn assemble(&self) -> DMatrix<T> {
        let r = self.x.nrows();
        let n = r + self.z.nrows();
        let m = r + self.y.ncols();
        let mut g = DMatrix::zeros(n, m);
        g.view_mut((0, 0), (r, r)).copy_from(&self.x);
        g.view_mut((0, r), (r, m - r)).copy_from(&self.y);
        g.view_mut((r, 0), (n - r, r)).copy_from(&self.z);
        g.view_mut((r, r), (n - r, m - r)).copy_from(&self.w);
        g
    }
}

/// Splits `V^T H U` into the blocks `X, Y, Z, W`.
pub fn gamma_blocks<T: Real>(h: &DMatrix<T>, f: &SvdFactors<T>) -> Result<GammaBlocks<T>> {
    let (m, n, r) = (f.rows(), f.cols(), f.rank());
    if h.shape() != (n, m) {
        return Err(Error::dims("gamma_blocks", (n, m), h.shape()));
    }
    let g = f.v().transpose() * h * f.u();
    Ok(GammaBlocks {
        x: g.view((0, 0), (r, r)).into_owned(),
        y: g.view((0, r), (r, m - r)).into_owned(),
        z: g.view((r, 0), (n - r, r)).into_owned(),
        w: g.view((r, r), (n - r, m - r)).into_owned(),
    })
}

/// `H = V Gamma U^T`.
pub fn reconstruct_from_blocks<T: Real>(g: &GammaBlocks<T>, f: &SvdFactors<T>) -> Result<DMatrix<T>> {
    g.check_dims(f)?;
    Ok(f.v() * g.assemble() * f.u().transpose())
}
