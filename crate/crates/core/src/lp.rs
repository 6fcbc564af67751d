//! Export of the linear program behind the sparse symmetric generalized
//! inverse problem, in the text LP format read by most LP solvers.
//!
//! ```text
//! min  sum_ij t_i_j
//! s.t. t_i_j - h_i_j >= 0,  t_i_j + h_i_j >= 0       (abs_pos_i_j, abs_neg_i_j)
//!      sum_kl A[p,k] A[l,q] h_k_l = A[p,q]            (gi_p_q, i.e. AHA = A)
//!      h_i_j - h_j_i = 0                 for i < j    (sym_i_j)
//!      h free, t >= 0
//! ```
//!
//! Indices are 1-based; variables are ordered row-major. The file has `n^2`
//! equality rows with up to `n^2` terms each, so it is meant for small `n`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{asymmetry, ensure_finite};
use crate::scalar::Real;

const TERMS_PER_LINE: usize = 6;

fn push_terms(out: &mut String, terms: &[String]) {
    for chunk in terms.chunks(TERMS_PER_LINE) {
        out.push_str("   ");
        for t in chunk {
            out.push(' ');
            out.push_str(t);
        }
        out.push('\n');
    }
}

fn signed_term<T: Real>(c: T, var: &str) -> String {
    if c < T::zero() {
        format!("- {:.16e} {var}", -c)
    } else {
        format!("+ {c:.16e} {var}")
    }
}

/// Renders the LP for symmetric `a` as a string.
pub fn lp_string<T: Real>(a: &DMatrix<T>) -> Result<String> {
    if !a.is_square() {
        return Err(Error::Input("LP export needs a square symmetric matrix".into()));
    }
    ensure_finite(a, "matrix")?;
    if asymmetry(a) > T::lit(1e-10) * a.norm() {
        return Err(Error::Input("LP export needs a symmetric matrix".into()));
    }
    let n = a.nrows();
    let h = |i: usize, j: usize| format!("h_{}_{}", i + 1, j + 1);
    let t = |i: usize, j: usize| format!("t_{}_{}", i + 1, j + 1);
    let cells: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect();

    let mut out = String::new();
    out.push_str("\\ min ||H||_1 subject to AHA = A and H = H^T\n");
    let _ = writeln!(out, "\\ n = {n}");
    out.push_str("Minimize\n obj:\n");
    let obj: Vec<String> = cells.iter().map(|&(i, j)| format!("+ {}", t(i, j))).collect();
    push_terms(&mut out, &obj);

    out.push_str("Subject To\n");
    for &(p, q) in &cells {
        let terms: Vec<String> = cells
            .iter()
            .filter_map(|&(k, l)| {
                let c = a[(p, k)] * a[(l, q)];
                (c != T::zero()).then(|| signed_term(c, &h(k, l)))
            })
            .collect();
        if terms.is_empty() {
            // A has a zero row or column: the equation reads 0 = 0.
            continue;
        }
        let _ = writeln!(out, " gi_{}_{}:", p + 1, q + 1);
        push_terms(&mut out, &terms);
        let _ = writeln!(out, "    = {:.16e}", a[(p, q)]);
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let _ = writeln!(out, " sym_{}_{}: + {} - {} = 0", i + 1, j + 1, h(i, j), h(j, i));
        }
    }
    for &(i, j) in &cells {
        let _ = writeln!(out, " abs_pos_{}_{}: + {} - {} >= 0", i + 1, j + 1, t(i, j), h(i, j));
        let _ = writeln!(out, " abs_neg_{}_{}: + {} + {} >= 0", i + 1, j + 1, t(i, j), h(i, j));
    }

    out.push_str("Bounds\n");
    for &(i, j) in &cells {
        let _ = writeln!(out, " {} free", h(i, j));
    }
    out.push_str("End\n");
    Ok(out)
}

/// Writes the LP for symmetric `a` to `path`.
pub fn export_lp<T: Real>(a: &DMatrix<T>, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path.as_ref(), lp_string(a)?)?;
    Ok(())
}
