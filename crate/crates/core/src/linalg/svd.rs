use nalgebra::{DMatrix, DVector};

use super::ensure_finite;
use crate::error::{Error, Result};
use crate::scalar::Real;

const SVD_MAX_SWEEPS: usize = 10_000;

struct RawSvd<T: Real> {
    u: Option<DMatrix<T>>,
    sigma: DVector<T>,
    v: Option<DMatrix<T>>,
}

/// Thin SVD through faer, computed in `f64`.
fn faer_svd<T: Real>(a: &DMatrix<T>, vectors: bool) -> Option<RawSvd<T>> {
    let (m, n) = a.shape();
    let fa = faer::Mat::<f64>::from_fn(m, n, |i, j| a[(i, j)].as_f64());
    let back = |x: f64| T::lit(x);
    if !vectors {
        let sv = fa.singular_values().ok()?;
        return Some(RawSvd { u: None, sigma: DVector::from_iterator(sv.len(), sv.into_iter().map(back)), v: None });
    }
    let svd = fa.thin_svd().ok()?;
    let (u, d, v) = (svd.U(), svd.S().column_vector(), svd.V());
    let k = m.min(n);
    Some(RawSvd {
        u: Some(DMatrix::from_fn(m, k, |i, j| back(u[(i, j)]))),
        sigma: DVector::from_fn(k, |i, _| back(d[i])),
        v: Some(DMatrix::from_fn(n, k, |i, j| back(v[(i, j)]))),
    })
}

fn nalgebra_svd<T: Real>(a: &DMatrix<T>, vectors: bool, transposed: bool) -> Option<RawSvd<T>> {
    let src = if transposed { a.transpose() } else { a.clone() };
    let eps = T::default_epsilon() * T::lit(5.0);
    let svd = src.try_svd(vectors, vectors, eps, SVD_MAX_SWEEPS)?;
    let (u, v) = match (svd.u, svd.v_t) {
        (Some(u), Some(vt)) if transposed => (Some(vt.transpose()), Some(u)),
        (Some(u), Some(vt)) => (Some(u), Some(vt.transpose())),
        _ => (None, None),
    };
    Some(RawSvd { u, sigma: svd.singular_values, v })
}

fn accurate<T: Real>(a: &DMatrix<T>, f: &RawSvd<T>, tol: T) -> bool {
    if (f.sigma.norm() - a.norm()).abs() > tol {
        return false;
    }
    let (Some(u), Some(v)) = (&f.u, &f.v) else {
        return true;
    };
    let k = f.sigma.len();
    let orth_tol = T::default_epsilon() * T::lit(100.0 * k as f64);
    let ident = DMatrix::<T>::identity(k, k);
    if (u.tr_mul(u) - &ident).norm() > orth_tol || (v.tr_mul(v) - &ident).norm() > orth_tol {
        return false;
    }
    let mut us = u.clone();
    for (j, s) in f.sigma.iter().enumerate() {
        us.column_mut(j).scale_mut(*s);
    }
    (us * v.transpose() - a).norm() <= tol
}

/// Thin SVD whose output is checked against `a`.
///
/// nalgebra's `try_svd` occasionally stalls on rank-deficient inputs and
/// returns factors that do not reproduce `a`. An attempt is accepted only if
/// `||sigma||_2` matches `||a||_F`, the singular vectors are orthonormal and
/// `U Sigma V^T` reproduces `a`, all to `100 max(m, n) eps` (what a
/// backward-stable SVD delivers). The order is nalgebra on `a`, nalgebra on
/// `a^T`, then faer.
fn checked_svd<T: Real>(a: &DMatrix<T>, vectors: bool) -> Result<RawSvd<T>> {
    let (m, n) = a.shape();
    let tol = T::default_epsilon() * T::lit(100.0 * m.max(n) as f64) * a.norm();
    let attempts: [&dyn Fn() -> Option<RawSvd<T>>; 3] = [
        &|| nalgebra_svd(a, vectors, false),
        &|| nalgebra_svd(a, vectors, true),
        &|| faer_svd(a, vectors),
    ];
    for attempt in attempts {
        let Some(f) = attempt() else {
            continue;
        };
        let f = RawSvd { sigma: f.sigma.map(|s| s.max(T::zero())), ..f };
        if accurate(a, &f, tol) {
            return Ok(f);
        }
    }
    Err(Error::Numeric(format!("SVD of a {m}x{n} matrix failed its accuracy check")))
}

/// Complete singular value decomposition `A = U Sigma V^T` with a numeric
/// rank.
///
/// `U` is `m x m` and `V` is `n x n`, both orthogonal. The leading `rank`
/// columns (`U1`, `V1`) span the ranges of `A` and `A^T`; the trailing ones
/// (`U2`, `V2`) span the null spaces of `A^T` and `A`. `D` is the diagonal of
/// the leading `rank` singular values.
#[derive(Debug, Clone)]
pub struct SvdFactors<T: Real> {
    u: DMatrix<T>,
    sigma: DVector<T>,
    v: DMatrix<T>,
    rank: usize,
    rank_tol: T,
}

impl<T: Real> SvdFactors<T> {
    pub fn u(&self) -> &DMatrix<T> {
        &self.u
    }

    pub fn v(&self) -> &DMatrix<T> {
        &self.v
    }

    /// Singular values in nonincreasing order, length `min(m, n)`.
    pub fn sigma(&self) -> &DVector<T> {
        &self.sigma
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn rank_tol(&self) -> T {
        self.rank_tol
    }

    /// Rows of the factored matrix.
    pub fn rows(&self) -> usize {
        self.u.nrows()
    }

    /// Columns of the factored matrix.
    pub fn cols(&self) -> usize {
        self.v.nrows()
    }

    /// Leading `rank` singular values (the diagonal of `D`).
    pub fn d(&self) -> DVector<T> {
        self.sigma.rows(0, self.rank).into_owned()
    }

    pub fn u1(&self) -> DMatrix<T> {
        self.u.columns(0, self.rank).into_owned()
    }

    pub fn u2(&self) -> DMatrix<T> {
        let m = self.rows();
        self.u.columns(self.rank, m - self.rank).into_owned()
    }

    pub fn v1(&self) -> DMatrix<T> {
        self.v.columns(0, self.rank).into_owned()
    }

    pub fn v2(&self) -> DMatrix<T> {
        let n = self.cols();
        self.v.columns(self.rank, n - self.rank).into_owned()
    }

    /// The `m x n` matrix `Sigma`, all singular values included.
    pub fn sigma_matrix(&self) -> DMatrix<T> {
        let mut s = DMatrix::zeros(self.rows(), self.cols());
        for (i, &v) in self.sigma.iter().enumerate() {
            s[(i, i)] = v;
        }
        s
    }

    /// `U Sigma V^T`.
    pub fn reconstruct(&self) -> DMatrix<T> {
        &self.u * self.sigma_matrix() * self.v.transpose()
    }

    /// `V1 D^{-1} U1^T`, the Moore-Penrose pseudoinverse.
    pub fn pseudoinverse(&self) -> DMatrix<T> {
        let mut v1 = self.v1();
        for (j, mut col) in v1.column_iter_mut().enumerate() {
            col /= self.sigma[j];
        }
        v1 * self.u1().transpose()
    }
}

/// Full SVD of `a` with numeric rank `#{i : sigma_i > rank_tol * sigma_0}`.
pub fn svd_full<T: Real>(a: &DMatrix<T>, rank_tol: T) -> Result<SvdFactors<T>> {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return Err(Error::Input("matrix has a zero dimension".into()));
    }
    if !(rank_tol > T::zero() && rank_tol < T::one()) {
        return Err(Error::Input(format!("rank_tol must lie in (0, 1), got {rank_tol}")));
    }
    ensure_finite(a, "matrix")?;

    let svd = checked_svd(a, true)?;
    let u_thin = svd.u.expect("requested U");
    let v_thin = svd.v.expect("requested V");
    let k = m.min(n);

    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| svd.sigma[j].partial_cmp(&svd.sigma[i]).expect("finite singular values"));
    let sigma = DVector::from_iterator(k, order.iter().map(|&i| svd.sigma[i]));
    let u_sorted = DMatrix::from_columns(&order.iter().map(|&i| u_thin.column(i)).collect::<Vec<_>>());
    let v_sorted = DMatrix::from_columns(&order.iter().map(|&i| v_thin.column(i)).collect::<Vec<_>>());

    let rank = if sigma[0] > T::zero() {
        let cut = rank_tol * sigma[0];
        sigma.iter().take_while(|&&s| s > cut).count()
    } else {
        0
    };

    Ok(SvdFactors {
        u: complete_basis(u_sorted),
        sigma,
        v: complete_basis(v_sorted),
        rank,
        rank_tol,
    })
}

/// Extends orthonormal columns `q` (`p x k`, `k <= p`) to an orthogonal
/// `p x p` matrix whose first `k` columns are `q`.
fn complete_basis<T: Real>(q: DMatrix<T>) -> DMatrix<T> {
    let (p, k) = q.shape();
    if k == p {
        return q;
    }
    let mut aug = DMatrix::zeros(p, k + p);
    aug.columns_mut(0, k).copy_from(&q);
    aug.columns_mut(k, p).fill_with_identity();
    // Householder QR keeps span(Q[:, ..k]) = span(q), so the trailing columns
    // are an orthonormal basis of the complement.
    let full_q = aug.qr().q();
    let mut out = DMatrix::zeros(p, p);
    out.columns_mut(0, k).copy_from(&q);
    out.columns_mut(k, p - k).copy_from(&full_q.columns(k, p - k));
    out
}

/// Numeric rank from singular values alone.
pub fn numeric_rank<T: Real>(m: &DMatrix<T>, rank_tol: T) -> Result<usize> {
    if m.is_empty() {
        return Ok(0);
    }
    ensure_finite(m, "matrix")?;
    let sigma = checked_svd(m, false)?.sigma;
    let smax = sigma.max();
    if smax <= T::zero() {
        return Ok(0);
    }
    let cut = rank_tol * smax;
    Ok(sigma.iter().filter(|&&s| s > cut).count())
}

/// Convenience wrapper for `svd_full(a, rank_tol)?.pseudoinverse()`.
pub fn pseudoinverse<T: Real>(a: &DMatrix<T>, rank_tol: T) -> Result<DMatrix<T>> {
    Ok(svd_full(a, rank_tol)?.pseudoinverse())
}
