use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Frobenius residuals of the four Penrose equations for a candidate `H`.
///
/// Relative forms divide `p1` by `||A||_F` and `p2..p4` by `||H||_F`; when
/// the divisor is zero the relative value equals the absolute one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MpResiduals {
    /// `||AHA - A||_F`
    pub p1: f64,
    /// `||HAH - H||_F`
    pub p2: f64,
    /// `||(AH)^T - AH||_F`
    pub p3: f64,
    /// `||(HA)^T - HA||_F`
    pub p4: f64,
    pub p1_rel: f64,
    pub p2_rel: f64,
    pub p3_rel: f64,
    pub p4_rel: f64,
}

impl MpResiduals {
    /// Largest relative residual among P1, P2 and P3.
    pub fn max_rel_123(&self) -> f64 {
        self.p1_rel.max(self.p2_rel).max(self.p3_rel)
    }

    pub fn max_rel(&self) -> f64 {
        self.max_rel_123().max(self.p4_rel)
    }
}

fn rel(abs: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        abs / scale
    } else {
        abs
    }
}

fn skew_norm<T: Real>(m: &DMatrix<T>) -> f64 {
    crate::linalg::asymmetry(m).as_f64()
}

pub fn mp_residuals<T: Real>(a: &DMatrix<T>, h: &DMatrix<T>) -> Result<MpResiduals> {
    let (m, n) = a.shape();
    if h.shape() != (n, m) {
        return Err(Error::dims("mp_residuals", (n, m), h.shape()));
    }
    let ah = a * h;
    let ha = h * a;
    let p1 = (&ah * a - a).norm().as_f64();
    let p2 = (&ha * h - h).norm().as_f64();
    let p3 = skew_norm(&ah);
    let p4 = skew_norm(&ha);
    let na = a.norm().as_f64();
    let nh = h.norm().as_f64();
    Ok(MpResiduals {
        p1,
        p2,
        p3,
        p4,
        p1_rel: rel(p1, na),
        p2_rel: rel(p2, nh),
        p3_rel: rel(p3, nh),
        p4_rel: rel(p4, nh),
    })
}
