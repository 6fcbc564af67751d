//! Closed-form least-squares and generalized Tikhonov solvers built on
//! generalized inverses.
//!
//! For `min ||A theta - b||^2 + lambda ||L theta||^2` the optimality system is
//! `(A^T A + lambda L^T L) theta = A^T b`, which is always consistent. Any
//! generalized inverse `Hhat` of `Ahat = A^T A + lambda L^T L` gives a
//! solution `theta = Hhat A^T b`; for `lambda = 0` any ah-symmetric
//! generalized inverse `H` of `A` gives `theta = H b`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::drs::{solve_ahref_ginv, solve_symmetric_ginv, DrsConfig};
use crate::error::{Error, Result};
use crate::linalg::{ensure_finite, mp_residuals, norm0, norm1, numeric_rank, svd_full, symmetrize};
use crate::scalar::Real;

/// Relative Penrose residual accepted for a generalized-inverse argument.
pub const GINV_TOL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct LsqInstance<T: Real> {
    pub a: DMatrix<T>,
    pub b: DVector<T>,
    pub l: Option<DMatrix<T>>,
    /// Weight of `||L theta||^2`; distinct from the DRS step.
    pub ridge_lambda: T,
}

impl<T: Real> LsqInstance<T> {
    pub fn new(a: DMatrix<T>, b: DVector<T>, l: Option<DMatrix<T>>, ridge_lambda: T) -> Result<Self> {
        ensure_finite(&a, "A")?;
        if b.len() != a.nrows() {
            return Err(Error::dims("LsqInstance b", (a.nrows(), 1), (b.len(), 1)));
        }
        if !(ridge_lambda >= T::zero()) || !ridge_lambda.finite() {
            return Err(Error::Input(format!("ridge_lambda must be >= 0, got {ridge_lambda}")));
        }
        if let Some(l) = &l {
            ensure_finite(l, "L")?;
            if l.ncols() != a.ncols() {
                return Err(Error::dims("LsqInstance L", (l.nrows(), a.ncols()), l.shape()));
            }
        } else if ridge_lambda > T::zero() {
            return Err(Error::Input("ridge_lambda > 0 requires a regularization matrix L".into()));
        }
        Ok(LsqInstance { a, b, l, ridge_lambda })
    }

    /// Plain least squares, `lambda = 0`.
    pub fn least_squares(a: DMatrix<T>, b: DVector<T>) -> Result<Self> {
        Self::new(a, b, None, T::zero())
    }

    pub fn ahat(&self) -> DMatrix<T> {
        build_ahat(&self.a, self.l.as_ref(), self.ridge_lambda).expect("validated on construction")
    }

    /// `A^T b`
    pub fn atb(&self) -> DVector<T> {
        self.a.tr_mul(&self.b)
    }

    /// `||A theta - b||^2 + lambda ||L theta||^2`
    pub fn objective(&self, theta: &DVector<T>) -> T {
        let r = &self.a * theta - &self.b;
        let mut f = r.norm_squared();
        if let Some(l) = &self.l {
            f += self.ridge_lambda * (l * theta).norm_squared();
        }
        f
    }

    /// `2 (A^T A + lambda L^T L) theta - 2 A^T b`
    pub fn gradient(&self, theta: &DVector<T>) -> DVector<T> {
        let two = T::lit(2.0);
        (self.ahat() * theta - self.atb()) * two
    }

    /// `||(A^T A + lambda L^T L) theta - A^T b||_inf`
    pub fn normal_residual(&self, theta: &DVector<T>) -> T {
        (self.ahat() * theta - self.atb()).amax()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// `theta = Hhat A^T b`
    ViaHhat,
    /// `theta = H b`
    ViaH,
}

#[derive(Debug, Clone)]
pub struct LsqSolution<T: Real> {
    pub theta: DVector<T>,
    pub strategy: Strategy,
    pub normal_residual: T,
    pub objective: T,
    /// Scalar products spent applying the operator(s): `||H||_0` or
    /// `||Hhat||_0 + ||A^T||_0`.
    pub mult_count: usize,
}

/// `A^T A + lambda L^T L`, exactly symmetric.
pub fn build_ahat<T: Real>(a: &DMatrix<T>, l: Option<&DMatrix<T>>, ridge_lambda: T) -> Result<DMatrix<T>> {
    if !(ridge_lambda >= T::zero()) {
        return Err(Error::Input(format!("ridge_lambda must be >= 0, got {ridge_lambda}")));
    }
    let mut ahat = a.tr_mul(a);
    if let Some(l) = l {
        if l.ncols() != a.ncols() {
            return Err(Error::dims("build_ahat L", (l.nrows(), a.ncols()), l.shape()));
        }
        if ridge_lambda > T::zero() {
            ahat += l.tr_mul(l) * ridge_lambda;
        }
    }
    Ok(symmetrize(&ahat))
}

/// `theta = Hhat A^T b` with `Hhat` a generalized inverse of `Ahat`.
pub fn solve_via_hhat<T: Real>(inst: &LsqInstance<T>, hhat: &DMatrix<T>, zero_tol: T) -> Result<LsqSolution<T>> {
    let ahat = inst.ahat();
    let n = inst.a.ncols();
    if hhat.shape() != (n, n) {
        return Err(Error::dims("solve_via_hhat", (n, n), hhat.shape()));
    }
    let res = mp_residuals(&ahat, hhat)?;
    if res.p1_rel > GINV_TOL {
        return Err(Error::Precondition(format!(
            "Hhat is not a generalized inverse of A^T A + lambda L^T L (relative P1 residual {:e})",
            res.p1_rel
        )));
    }
    let theta = hhat * inst.atb();
    Ok(LsqSolution {
        normal_residual: inst.normal_residual(&theta),
        objective: inst.objective(&theta),
        mult_count: norm0(hhat, zero_tol) + norm0(&inst.a, zero_tol),
        strategy: Strategy::ViaHhat,
        theta,
    })
}

/// `theta = H b` with `H` an ah-symmetric generalized inverse of `A`. Only
/// defined for plain least squares.
pub fn solve_via_h<T: Real>(inst: &LsqInstance<T>, h: &DMatrix<T>, zero_tol: T) -> Result<LsqSolution<T>> {
    if inst.ridge_lambda > T::zero() {
        return Err(Error::Unsupported(
            "theta = H b solves only the unregularized problem; use the Hhat strategy".into(),
        ));
    }
    let res = mp_residuals(&inst.a, h)?;
    if res.p1_rel > GINV_TOL || res.p3_rel > GINV_TOL {
        return Err(Error::Precondition(format!(
            "H is not an ah-symmetric generalized inverse of A (P1 {:e}, P3 {:e})",
            res.p1_rel, res.p3_rel
        )));
    }
    let theta = h * &inst.b;
    Ok(LsqSolution {
        normal_residual: inst.normal_residual(&theta),
        objective: inst.objective(&theta),
        mult_count: norm0(h, zero_tol),
        strategy: Strategy::ViaH,
        theta,
    })
}

/// Witness that the optimality system is consistent.
#[derive(Debug, Clone)]
pub struct Solvability<T: Real> {
    pub solvable: bool,
    /// `Ahat^+ A^T b`
    pub theta: DVector<T>,
    /// `||Ahat theta - A^T b||_2 / (||Ahat||_F ||theta||_2 + ||A^T b||_2)`
    pub relative_residual: f64,
}

/// Solves the optimality system with the pseudoinverse of `Ahat` and reports
/// whether the residual vanishes to `1e-8` relative.
pub fn check_solvability<T: Real>(inst: &LsqInstance<T>, rank_tol: T) -> Result<Solvability<T>> {
    let ahat = inst.ahat();
    let atb = inst.atb();
    let theta = svd_full(&ahat, rank_tol)?.pseudoinverse() * &atb;
    let resid = (&ahat * &theta - &atb).norm().as_f64();
    let scale = ahat.norm().as_f64() * theta.norm().as_f64() + atb.norm().as_f64();
    let relative_residual = if scale > 0.0 { resid / scale } else { resid };
    Ok(Solvability {
        solvable: relative_residual <= 1e-8,
        theta,
        relative_residual,
    })
}

/// One right-hand side solved both ways.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleComparison {
    /// `||A theta - b||_2` with `theta = H b`.
    pub residual_via_h: f64,
    /// `||A theta - b||_2` with `theta = Hhat A^T b`.
    pub residual_via_hhat: f64,
    /// `|difference| / max(residuals, tiny)`.
    pub relative_gap: f64,
    pub normal_residual_via_h: f64,
    pub normal_residual_via_hhat: f64,
}

/// Cost and accuracy of the two closed-form least-squares strategies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyReport {
    pub m: usize,
    pub n: usize,
    pub rank: usize,
    pub h_norm0: usize,
    pub h_norm1: f64,
    pub hhat_norm0: usize,
    pub hhat_norm1: f64,
    pub at_norm0: usize,
    pub mult_count_via_h: usize,
    pub mult_count_via_hhat: usize,
    pub h_iterations: usize,
    pub hhat_iterations: usize,
    pub h_converged: bool,
    pub hhat_converged: bool,
    pub samples: Vec<SampleComparison>,
}

impl StrategyReport {
    pub fn max_relative_gap(&self) -> f64 {
        self.samples.iter().map(|s| s.relative_gap).fold(0.0, f64::max)
    }
}

/// Computes a sparse ah-symmetric reflexive inverse `H` of `A` and a sparse
/// symmetric generalized inverse `Hhat` of `A^T A`, then solves every
/// right-hand side in `b_samples` both ways.
pub fn compare_strategies<T: Real>(
    a: &DMatrix<T>,
    cfg: &DrsConfig<T>,
    b_samples: &[DVector<T>],
    zero_tol: T,
) -> Result<StrategyReport> {
    let h_run = solve_ahref_ginv(a, cfg)?;
    let ahat = build_ahat(a, None, T::zero())?;
    let hhat_run = solve_symmetric_ginv(&ahat, cfg)?;
    let (h, hhat) = (&h_run.h, &hhat_run.h);

    let samples = b_samples
        .iter()
        .map(|b| {
            let inst = LsqInstance::least_squares(a.clone(), b.clone())?;
            let via_h = solve_via_h(&inst, h, zero_tol)?;
            let via_hhat = solve_via_hhat(&inst, hhat, zero_tol)?;
            let rh = via_h.objective.as_f64().sqrt();
            let rhh = via_hhat.objective.as_f64().sqrt();
            let scale = rh.max(rhh).max(f64::MIN_POSITIVE);
            Ok(SampleComparison {
                residual_via_h: rh,
                residual_via_hhat: rhh,
                relative_gap: (rh - rhh).abs() / scale,
                normal_residual_via_h: via_h.normal_residual.as_f64(),
                normal_residual_via_hhat: via_hhat.normal_residual.as_f64(),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let h_norm0 = norm0(h, zero_tol);
    let hhat_norm0 = norm0(hhat, zero_tol);
    let at_norm0 = norm0(a, zero_tol);
    Ok(StrategyReport {
        m: a.nrows(),
        n: a.ncols(),
        rank: numeric_rank(a, cfg.rank_tol)?,
        h_norm0,
        h_norm1: norm1(h).as_f64(),
        hhat_norm0,
        hhat_norm1: norm1(hhat).as_f64(),
        at_norm0,
        mult_count_via_h: h_norm0,
        mult_count_via_hhat: hhat_norm0 + at_norm0,
        h_iterations: h_run.iterations,
        hhat_iterations: hhat_run.iterations,
        h_converged: h_run.converged,
        hhat_converged: hhat_run.converged,
        samples,
    })
}
