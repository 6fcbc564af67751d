//! Test oracles that share no code with the solvers under test: a reader for
//! the exported LP text, a dense two-phase simplex and random instances.

#![allow(dead_code, clippy::type_complexity, clippy::needless_range_loop)]

use std::collections::HashMap;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
pub struct LpProblem {
    pub vars: Vec<String>,
    pub obj: Vec<f64>,
    pub rows: Vec<(Vec<f64>, Sense, f64)>,
    pub free: Vec<bool>,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub objective: f64,
    pub values: HashMap<String, f64>,
}

#[derive(Default)]
struct Builder {
    index: HashMap<String, usize>,
    vars: Vec<String>,
}

impl Builder {
    fn var(&mut self, name: &str) -> usize {
        if let Some(&i) = self.index.get(name) {
            return i;
        }
        self.vars.push(name.to_string());
        self.index.insert(name.to_string(), self.vars.len() - 1);
        self.vars.len() - 1
    }
}

/// Parses `sign [coef] var` sequences until a sense token; returns the sparse
/// terms, the sense and the right-hand side.
fn parse_linear(tokens: &[&str], b: &mut Builder) -> (Vec<(usize, f64)>, Option<(Sense, f64)>) {
    let mut terms = Vec::new();
    let mut i = 0;
    let mut sign = 1.0;
    let mut coef = 1.0;
    while i < tokens.len() {
        let tok = tokens[i];
        match tok {
            "+" => sign = 1.0,
            "-" => sign = -1.0,
            ">=" | "<=" | "=" => {
                let sense = match tok {
                    ">=" => Sense::Ge,
                    "<=" => Sense::Le,
                    _ => Sense::Eq,
                };
                let rhs: f64 = tokens[i + 1].parse().expect("rhs");
                return (terms, Some((sense, rhs)));
            }
            _ => {
                if let Ok(c) = tok.parse::<f64>() {
                    coef = c;
                } else {
                    terms.push((b.var(tok), sign * coef));
                    sign = 1.0;
                    coef = 1.0;
                }
            }
        }
        i += 1;
    }
    (terms, None)
}

/// Reads the subset of the LP text format that the exporter writes.
pub fn parse_lp(text: &str) -> LpProblem {
    #[derive(PartialEq)]
    enum Sec {
        None,
        Obj,
        Cons,
        Bounds,
    }
    let mut sec = Sec::None;
    let mut obj_tokens: Vec<String> = Vec::new();
    let mut cons: Vec<Vec<String>> = Vec::new();
    let mut free_names = Vec::new();
    for line in text.lines() {
        let l = line.trim();
        if l.is_empty() || l.starts_with('\\') {
            continue;
        }
        match l {
            "Minimize" => sec = Sec::Obj,
            "Subject To" => sec = Sec::Cons,
            "Bounds" => sec = Sec::Bounds,
            "End" => sec = Sec::None,
            _ => {
                let toks: Vec<String> = l.split_whitespace().map(str::to_string).collect();
                match sec {
                    Sec::Obj => obj_tokens.extend(toks.into_iter().filter(|t| !t.ends_with(':'))),
                    Sec::Cons => {
                        if toks[0].ends_with(':') {
                            cons.push(toks[1..].to_vec());
                        } else {
                            cons.last_mut().expect("constraint name").extend(toks);
                        }
                    }
                    Sec::Bounds => {
                        assert_eq!(toks.len(), 2, "unsupported bound line {l}");
                        assert_eq!(toks[1], "free");
                        free_names.push(toks[0].clone());
                    }
                    Sec::None => panic!("text outside a section: {l}"),
                }
            }
        }
    }
    let mut b = Builder::default();
    let ot: Vec<&str> = obj_tokens.iter().map(String::as_str).collect();
    let (obj_terms, none) = parse_linear(&ot, &mut b);
    assert!(none.is_none());
    let mut sparse_rows = Vec::new();
    for c in &cons {
        let ct: Vec<&str> = c.iter().map(String::as_str).collect();
        let (terms, sense) = parse_linear(&ct, &mut b);
        let (sense, rhs) = sense.expect("constraint without sense");
        sparse_rows.push((terms, sense, rhs));
    }
    for f in &free_names {
        b.var(f);
    }
    let nv = b.vars.len();
    let mut obj = vec![0.0; nv];
    for (j, c) in obj_terms {
        obj[j] += c;
    }
    let rows = sparse_rows
        .into_iter()
        .map(|(terms, s, rhs)| {
            let mut r = vec![0.0; nv];
            for (j, c) in terms {
                r[j] += c;
            }
            (r, s, rhs)
        })
        .collect();
    let mut free = vec![false; nv];
    for f in &free_names {
        free[b.index[f]] = true;
    }
    LpProblem { vars: b.vars, obj, rows, free }
}

const EPS: f64 = 1e-9;

struct Tableau {
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
    ncols: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.t[r][c];
        for v in self.t[r].iter_mut() {
            *v /= p;
        }
        let prow = self.t[r].clone();
        for (i, row) in self.t.iter_mut().enumerate() {
            if i != r {
                let f = row[c];
                if f != 0.0 {
                    for (v, pv) in row.iter_mut().zip(&prow) {
                        *v -= f * pv;
                    }
                }
            }
        }
        self.basis[r] = c;
    }

    fn reduced_costs(&self, cost: &[f64]) -> Vec<f64> {
        let mut rc = cost.to_vec();
        for (i, &bi) in self.basis.iter().enumerate() {
            let cb = cost[bi];
            if cb != 0.0 {
                for j in 0..self.ncols {
                    rc[j] -= cb * self.t[i][j];
                }
            }
        }
        rc
    }

    /// Bland's rule; columns with `allowed[j] == false` never enter.
    fn optimize(&mut self, cost: &[f64], allowed: &[bool]) {
        for _ in 0..100_000 {
            let rc = self.reduced_costs(cost);
            let Some(enter) = (0..self.ncols).find(|&j| allowed[j] && rc[j] < -EPS) else {
                return;
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.t.len() {
                let a = self.t[i][enter];
                if a > EPS {
                    let ratio = self.t[i][self.ncols] / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((li, lr)) => {
                            if ratio < lr - EPS || (ratio <= lr + EPS && self.basis[i] < self.basis[li]) {
                                Some((i, ratio))
                            } else {
                                Some((li, lr))
                            }
                        }
                    };
                }
            }
            let (r, _) = leave.expect("LP is unbounded");
            self.pivot(r, enter);
        }
        panic!("simplex did not terminate");
    }
}

/// Minimizes the problem with a two-phase dense simplex. Variables are
/// nonnegative unless marked free. Returns a basic (vertex) solution.
pub fn solve_lp(p: &LpProblem) -> LpSolution {
    let nv = p.vars.len();
    // Column layout: one column per variable, a negative part for free ones,
    // one slack/surplus per inequality, one artificial per row.
    let mut neg_col = vec![None; nv];
    let mut ncols = nv;
    for j in 0..nv {
        if p.free[j] {
            neg_col[j] = Some(ncols);
            ncols += 1;
        }
    }
    let mut slack_col = vec![None; p.rows.len()];
    for (i, (_, s, _)) in p.rows.iter().enumerate() {
        if *s != Sense::Eq {
            slack_col[i] = Some(ncols);
            ncols += 1;
        }
    }
    let art0 = ncols;
    ncols += p.rows.len();

    let mut t = Vec::with_capacity(p.rows.len());
    for (i, (coef, s, rhs)) in p.rows.iter().enumerate() {
        let mut row = vec![0.0; ncols + 1];
        for j in 0..nv {
            row[j] = coef[j];
            if let Some(nc) = neg_col[j] {
                row[nc] = -coef[j];
            }
        }
        if let Some(sc) = slack_col[i] {
            row[sc] = if *s == Sense::Ge { -1.0 } else { 1.0 };
        }
        row[ncols] = *rhs;
        if *rhs < 0.0 {
            for v in row.iter_mut() {
                *v = -*v;
            }
        }
        row[art0 + i] = 1.0;
        t.push(row);
    }
    let mut tab = Tableau { t, basis: (art0..art0 + p.rows.len()).collect(), ncols };

    let mut cost1 = vec![0.0; ncols];
    for c in cost1.iter_mut().skip(art0) {
        *c = 1.0;
    }
    let all = vec![true; ncols];
    tab.optimize(&cost1, &all);
    let infeas: f64 = (0..tab.t.len()).filter(|&i| tab.basis[i] >= art0).map(|i| tab.t[i][ncols]).sum();
    assert!(infeas < 1e-7, "LP is infeasible (phase one objective {infeas})");

    // Drive zero-level artificials out of the basis; drop redundant rows.
    let mut i = 0;
    while i < tab.t.len() {
        if tab.basis[i] >= art0 {
            if let Some(c) = (0..art0).find(|&j| tab.t[i][j].abs() > 1e-7) {
                tab.pivot(i, c);
                i += 1;
            } else {
                tab.t.remove(i);
                tab.basis.remove(i);
            }
        } else {
            i += 1;
        }
    }

    let mut cost2 = vec![0.0; ncols];
    for j in 0..nv {
        cost2[j] = p.obj[j];
        if let Some(nc) = neg_col[j] {
            cost2[nc] = -p.obj[j];
        }
    }
    let allowed: Vec<bool> = (0..ncols).map(|j| j < art0).collect();
    tab.optimize(&cost2, &allowed);

    let mut x = vec![0.0; ncols];
    for (i, &bi) in tab.basis.iter().enumerate() {
        x[bi] = tab.t[i][ncols];
    }
    let mut values = HashMap::new();
    let mut objective = 0.0;
    for j in 0..nv {
        let v = x[j] - neg_col[j].map_or(0.0, |nc| x[nc]);
        objective += p.obj[j] * v;
        values.insert(p.vars[j].clone(), v);
    }
    LpSolution { objective, values }
}

/// Reads `h_i_j` values of an LP solution back into an `n x n` matrix.
pub fn h_from_solution(sol: &LpSolution, n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| *sol.values.get(&format!("h_{}_{}", i + 1, j + 1)).unwrap_or(&0.0))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Dense `m x n` matrix with entries uniform in `[-1, 1]`.
pub fn uniform(rng: &mut ChaCha8Rng, m: usize, n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(m, n, |_, _| rng.random_range(-1.0..=1.0))
}

/// `m x n` matrix of rank exactly `r` (with probability one): `B C`.
pub fn low_rank(rng: &mut ChaCha8Rng, m: usize, n: usize, r: usize) -> DMatrix<f64> {
    uniform(rng, m, r) * uniform(rng, r, n)
}

/// Symmetric `n x n` matrix of rank `r` with mixed-sign eigenvalues: `B D B^T`.
pub fn sym_low_rank(rng: &mut ChaCha8Rng, n: usize, r: usize) -> DMatrix<f64> {
    let b = uniform(rng, n, r);
    let d = DMatrix::from_fn(r, r, |i, j| {
        if i != j {
            0.0
        } else {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            sign * rng.random_range(0.5..=2.0)
        }
    });
    let s = &b * d * b.transpose();
    (&s + s.transpose()) * 0.5
}

pub fn rel_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

/// Exact minimum of `||c + P s||_1` over `s` for `P` with one or two columns,
/// by enumerating the vertices of the piecewise-linear objective: points
/// where one (1-D) or two (2-D) entries vanish.
pub fn l1_scan_min(c: &[f64], p: &DMatrix<f64>) -> f64 {
    let f = |s: &[f64]| -> f64 {
        (0..c.len()).map(|i| (c[i] + (0..p.ncols()).map(|k| p[(i, k)] * s[k]).sum::<f64>()).abs()).sum()
    };
    let mut best = f(&vec![0.0; p.ncols()]);
    match p.ncols() {
        1 => {
            for i in 0..c.len() {
                if p[(i, 0)].abs() > 1e-12 {
                    best = best.min(f(&[-c[i] / p[(i, 0)]]));
                }
            }
        }
        2 => {
            for i in 0..c.len() {
                for j in (i + 1)..c.len() {
                    let det = p[(i, 0)] * p[(j, 1)] - p[(i, 1)] * p[(j, 0)];
                    if det.abs() > 1e-12 {
                        let s0 = (-c[i] * p[(j, 1)] + c[j] * p[(i, 1)]) / det;
                        let s1 = (-c[j] * p[(i, 0)] + c[i] * p[(j, 0)]) / det;
                        best = best.min(f(&[s0, s1]));
                    }
                }
            }
        }
        k => panic!("scan supports 1 or 2 parameters, got {k}"),
    }
    best
}

/// Optimum of `min ||H||_1` over ah-symmetric reflexive inverses of the
/// rank-one matrix `u v^T`, for `n = len(v)` in {2, 3}.
///
/// Every such `H` equals `x u^T / ||u||^2` with `v^T x = 1`, so the
/// objective is `||x||_1 ||u||_1 / ||u||^2`; `x = x0 + N s` with `x0` a
/// particular solution and `N` a basis of the orthogonal complement of `v`.
pub fn rank_one_ahref_optimum(u: &[f64], v: &[f64]) -> f64 {
    let n = v.len();
    let vv: f64 = v.iter().map(|x| x * x).sum();
    let x0: Vec<f64> = v.iter().map(|x| x / vv).collect();
    // Complement basis by Gram-Schmidt against v of the unit vectors.
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for k in 0..n {
        let mut e = vec![0.0; n];
        e[k] = 1.0;
        let proj = |w: &mut Vec<f64>, b: &[f64]| {
            let bb: f64 = b.iter().map(|x| x * x).sum();
            let d: f64 = w.iter().zip(b).map(|(a, b)| a * b).sum::<f64>() / bb;
            for (wi, bi) in w.iter_mut().zip(b) {
                *wi -= d * bi;
            }
        };
        proj(&mut e, v);
        for b in &basis {
            proj(&mut e, b);
        }
        if e.iter().map(|x| x * x).sum::<f64>() > 1e-10 && basis.len() < n - 1 {
            basis.push(e);
        }
    }
    let p = DMatrix::from_fn(n, basis.len(), |i, k| basis[k][i]);
    let uu: f64 = u.iter().map(|x| x * x).sum();
    let u1: f64 = u.iter().map(|x| x.abs()).sum();
    l1_scan_min(&x0, &p) * u1 / uu
}

/// Entries uniform in `[0.5, 1]` with random sign: perturbations that stay
/// well away from zero.
pub fn bounded_away(rng: &mut ChaCha8Rng, m: usize, n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(m, n, |_, _| {
        let s = if rng.random::<bool>() { 1.0 } else { -1.0 };
        s * rng.random_range(0.5..=1.0)
    })
}

/// A generalized-inverse candidate built from its blocks in the SVD basis,
/// with the truth value of each block condition fixed by construction.
pub struct BlockCase {
    pub a: DMatrix<f64>,
    pub h: DMatrix<f64>,
    /// `X = D^{-1}`, `W = Z D Y`, `Y = 0`, `Z = 0`.
    pub truth: [bool; 4],
}

/// `bits` selects which of the four block conditions are imposed.
pub fn block_case(rng: &mut ChaCha8Rng, m: usize, n: usize, r: usize, bits: u8) -> BlockCase {
    let a = low_rank(rng, m, n, r);
    let f = sparse_ginv::svd_full(&a, 1e-10).unwrap();
    assert_eq!(f.rank(), r);
    let d = DMatrix::from_diagonal(&f.d());
    let dinv = DMatrix::from_diagonal(&f.d().map(|x| 1.0 / x));
    let x = if bits & 1 != 0 { dinv.clone() } else { &dinv + bounded_away(rng, r, r) };
    let y = if bits & 4 != 0 { DMatrix::zeros(r, m - r) } else { bounded_away(rng, r, m - r) };
    let z = if bits & 8 != 0 { DMatrix::zeros(n - r, r) } else { bounded_away(rng, n - r, r) };
    let zdy = &z * &d * &y;
    let w = if bits & 2 != 0 { zdy.clone() } else { &zdy + bounded_away(rng, n - r, m - r) };
    let mut gamma = DMatrix::zeros(n, m);
    gamma.view_mut((0, 0), (r, r)).copy_from(&x);
    gamma.view_mut((0, r), (r, m - r)).copy_from(&y);
    gamma.view_mut((r, 0), (n - r, r)).copy_from(&z);
    gamma.view_mut((r, r), (n - r, m - r)).copy_from(&w);
    let h = f.v() * gamma * f.u().transpose();
    let truth = [
        bits & 1 != 0,
        bits & 2 != 0 || (n == r || m == r),
        bits & 4 != 0 || m == r,
        bits & 8 != 0 || n == r,
    ];
    BlockCase { a, h, truth }
}

/// Penrose residuals computed directly: `||AHA - A|| / ||A||` and
/// `||HAH - H||`, `||AH - (AH)^T||`, `||HA - (HA)^T||` over `||H||`.
pub fn penrose_rel(a: &DMatrix<f64>, h: &DMatrix<f64>) -> [f64; 4] {
    let ah = a * h;
    let ha = h * a;
    let nh = h.norm().max(f64::MIN_POSITIVE);
    [
        (&ah * a - a).norm() / a.norm().max(f64::MIN_POSITIVE),
        (&ha * h - h).norm() / nh,
        (&ah - ah.transpose()).norm() / nh,
        (&ha - ha.transpose()).norm() / nh,
    ]
}

/// Symmetric rank-`r` matrix and a candidate inverse of kind `kind % 5`:
/// the pseudoinverse, another symmetric generalized inverse, a nonsymmetric
/// generalized inverse, a symmetric non-inverse, or an unrelated matrix.
pub fn sym_pair(rng: &mut ChaCha8Rng, n: usize, r: usize, kind: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    let a = sym_low_rank(rng, n, r);
    let pinv = sparse_ginv::pseudoinverse(&a, 1e-10).unwrap();
    let p = &a * &pinv;
    let comp = DMatrix::identity(n, n) - &p;
    let s = {
        let m = uniform(rng, n, n);
        &m + m.transpose()
    };
    let h = match kind % 5 {
        0 => pinv,
        1 => &pinv + &s - &p * &s * &p,
        2 => {
            let m = uniform(rng, n, n);
            &pinv + &comp * m
        }
        3 => &pinv + &p * bounded_away(rng, n, n).map(|x| x.abs()) * &p,
        _ => uniform(rng, n, n),
    };
    (a, h)
}
