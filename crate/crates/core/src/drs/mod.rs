//! Douglas-Rachford splitting for `min ||H||_1` over an affine set.
//!
//! With `f = ||.||_1` and `g` the indicator of the feasible set, one sweep is
//!
//! ```text
//! H_half = S_lambda(V)             soft thresholding
//! V_half = 2 H_half - V
//! H_next = Pi(V_half)              projection onto the set
//! V      = V + H_next - H_half
//! ```
//!
//! The returned iterate is always a projection output and therefore feasible.

mod ahref;
mod symmetric;

pub use ahref::{solve_ahref_ginv, AhRefGinvSet};
pub use symmetric::{check_sym_characterization, solve_symmetric_ginv, SymmetricGinvSet};

use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{mp_residuals, norm1, MpResiduals, DEFAULT_RANK_TOL};
use crate::scalar::Real;

/// Parameters of a DRS run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DrsConfig<T> {
    /// Prox step: threshold of the soft-thresholding step.
    pub step_lambda: T,
    pub eps_abs: T,
    pub eps_rel: T,
    pub max_iter: usize,
    /// Keep per-iteration objective, step norm and feasibility.
    pub record_history: bool,
    /// Wall-clock budget, checked between iterations.
    pub time_limit: Option<Duration>,
    /// Relative SVD cutoff used when the feasible set is built.
    pub rank_tol: T,
}

impl<T: Real> Default for DrsConfig<T> {
    fn default() -> Self {
        DrsConfig {
            step_lambda: T::lit(1e-2),
            eps_abs: T::lit(1e-5),
            eps_rel: T::lit(1e-3),
            max_iter: 50_000,
            record_history: false,
            time_limit: None,
            rank_tol: T::lit(DEFAULT_RANK_TOL),
        }
    }
}

impl<T: Real> DrsConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let pos = |v: T, name: &str| {
            if v > T::zero() && v.finite() {
                Ok(())
            } else {
                Err(Error::Input(format!("{name} must be positive, got {v}")))
            }
        };
        pos(self.step_lambda, "step_lambda")?;
        pos(self.eps_abs, "eps_abs")?;
        pos(self.eps_rel, "eps_rel")?;
        if self.max_iter == 0 {
            return Err(Error::Input("max_iter must be at least 1".into()));
        }
        if !(self.rank_tol > T::zero() && self.rank_tol < T::one()) {
            return Err(Error::Input(format!("rank_tol must lie in (0, 1), got {}", self.rank_tol)));
        }
        Ok(())
    }
}

/// One entry of the optional iteration trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    /// `||H_next||_1`
    pub objective: f64,
    /// `||V_{k+1} - V_k||_F`
    pub tau_norm: f64,
    /// Relative violation of the set equations by `H_next`.
    pub feasibility: f64,
}

#[derive(Debug, Clone)]
pub struct DrsResult<T: Real> {
    /// Last projection output.
    pub h: DMatrix<T>,
    /// `||h||_1`
    pub objective: T,
    pub iterations: usize,
    pub converged: bool,
    pub timed_out: bool,
    pub tau_norm: T,
    /// `||V_1 - V_0||_F`, the scale of the relative stopping test.
    pub ref_norm: T,
    pub residuals: MpResiduals,
    pub elapsed: Duration,
    pub history: Option<Vec<IterationRecord>>,
}

/// A closed convex (here: affine) set with an exact Euclidean projection.
pub trait AffineProjector<T: Real> {
    /// Shape `(rows, cols)` of the points of the set.
    fn shape(&self) -> (usize, usize);

    /// Frobenius-nearest point of the set. `m` must have shape `self.shape()`.
    fn project(&self, m: &DMatrix<T>) -> DMatrix<T>;

    /// Relative violation of the defining equations at `h`.
    fn membership_residual(&self, h: &DMatrix<T>) -> T;

    /// The matrix whose generalized inverses form the set.
    fn matrix(&self) -> &DMatrix<T>;
}

/// Entrywise soft thresholding, the proximal map of `t * ||.||_1`.
pub fn soft_threshold<T: Real>(m: &DMatrix<T>, t: T) -> DMatrix<T> {
    m.map(|x| shrink(x, t))
}

#[inline]
fn shrink<T: Real>(x: T, t: T) -> T {
    if x > t {
        x - t
    } else if x < -t {
        x + t
    } else {
        T::zero()
    }
}

/// Iterates of the splitting scheme.
#[derive(Debug, Clone)]
pub struct DrsState<T: Real> {
    /// Governing sequence `V_k`.
    pub v: DMatrix<T>,
    pub h_half: DMatrix<T>,
    pub h_next: DMatrix<T>,
    /// Completed sweeps.
    pub k: usize,
    pub tau_norm: T,
    /// `||V_1 - V_0||_F`, set after the first sweep.
    pub ref_norm: T,
}

impl<T: Real> DrsState<T> {
    pub fn new(start: DMatrix<T>) -> Self {
        DrsState {
            h_half: start.clone(),
            h_next: start.clone(),
            v: start,
            k: 0,
            tau_norm: T::zero(),
            ref_norm: T::zero(),
        }
    }

    /// One sweep; returns `||V_{k+1} - V_k||_F`.
    pub fn step<P: AffineProjector<T> + ?Sized>(&mut self, proj: &P, lambda: T) -> T {
        self.h_half = soft_threshold(&self.v, lambda);
        let two = T::lit(2.0);
        let v_half = &self.h_half * two - &self.v;
        self.h_next = proj.project(&v_half);
        let tau = &self.h_next - &self.h_half;
        self.tau_norm = tau.norm();
        self.v += tau;
        if self.k == 0 {
            self.ref_norm = self.tau_norm;
        }
        self.k += 1;
        self.tau_norm
    }

    /// `||tau_k||_F <= eps_abs + eps_rel ||V_1 - V_0||_F`, tested from the second sweep on.
    pub fn should_stop(&self, eps_abs: T, eps_rel: T) -> bool {
        self.k > 1 && self.tau_norm <= eps_abs + eps_rel * self.ref_norm
    }
}

/// Runs the splitting scheme from `start` until the stopping test, the
/// iteration cap or the time limit. Hitting a limit is reported through
/// `converged = false`, never as an error.
pub fn drs_solve<T, P>(proj: &P, start: &DMatrix<T>, cfg: &DrsConfig<T>) -> Result<DrsResult<T>>
where
    T: Real,
    P: AffineProjector<T> + ?Sized,
{
    cfg.validate()?;
    if start.shape() != proj.shape() {
        return Err(Error::dims("drs_solve start", proj.shape(), start.shape()));
    }
    let clock = Instant::now();
    let deadline = cfg.time_limit.map(|d| clock + d);
    let mut state = DrsState::new(start.clone());
    let mut history = cfg.record_history.then(Vec::new);
    let mut converged = false;
    let mut timed_out = false;

    while state.k < cfg.max_iter {
        state.step(proj, cfg.step_lambda);
        if let Some(h) = history.as_mut() {
            h.push(IterationRecord {
                objective: norm1(&state.h_next).as_f64(),
                tau_norm: state.tau_norm.as_f64(),
                feasibility: proj.membership_residual(&state.h_next).as_f64(),
            });
        }
        if state.should_stop(cfg.eps_abs, cfg.eps_rel) {
            converged = true;
            break;
        }
        if deadline.is_some_and(|d| Instant::now() >= d) {
            timed_out = true;
            break;
        }
    }

    let residuals = mp_residuals(proj.matrix(), &state.h_next)?;
    Ok(DrsResult {
        objective: norm1(&state.h_next),
        iterations: state.k,
        converged,
        timed_out,
        tau_norm: state.tau_norm,
        ref_norm: state.ref_norm,
        residuals,
        elapsed: clock.elapsed(),
        history,
        h: state.h_next,
    })
}
