//! Seeded synthetic instances: sparse random matrices, sparse low-rank
//! rectangular matrices and symmetric positive semidefinite Gram matrices.
//!
//! All randomness comes from `ChaCha8Rng::seed_from_u64(seed)` (rand_chacha),
//! a portable counter-based generator, so a `GenSpec` fully determines the
//! instance.

use nalgebra::DMatrix;
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{numeric_rank, SparseMatrix};
use crate::scalar::Real;

const RANK_CHECK_TOL: f64 = 1e-8;
const MAX_ATTEMPTS: u64 = 10;
/// Number of base columns mixed into each appended dependent column.
const COMBINATION_TERMS: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GenKind {
    /// `m x n`, rank `r`: `r` sparse random columns followed by `n - r`
    /// sparse combinations of them.
    RectLowrank,
    /// `B^T B` with `B` an `n x n` `RectLowrank` sample of rank `r`.
    SymGram,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    pub m: usize,
    pub n: usize,
    pub r: usize,
    pub density: f64,
    pub seed: u64,
    pub kind: GenKind,
}

impl GenSpec {
    pub fn rect(m: usize, n: usize, r: usize, density: f64, seed: u64) -> Self {
        GenSpec { m, n, r, density, seed, kind: GenKind::RectLowrank }
    }

    pub fn sym(n: usize, r: usize, density: f64, seed: u64) -> Self {
        GenSpec { m: n, n, r, density, seed, kind: GenKind::SymGram }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.density > 0.0 && self.density <= 1.0) {
            return Err(Error::Input(format!("density must lie in (0, 1], got {}", self.density)));
        }
        if self.r == 0 || self.r > self.m.min(self.n) {
            return Err(Error::Input(format!(
                "rank {} must lie in [1, min({}, {})]",
                self.r, self.m, self.n
            )));
        }
        if self.density * (self.m as f64) < 1.0 {
            return Err(Error::Input(format!(
                "density {} leaves fewer than one expected nonzero per column of a {}-row matrix",
                self.density, self.m
            )));
        }
        if self.kind == GenKind::SymGram && self.m != self.n {
            return Err(Error::Input("sym_gram instances are square: set m = n".into()));
        }
        Ok(())
    }

    /// Seed of retry `attempt`; attempt 0 uses the spec seed unchanged.
    fn attempt_seed(&self, attempt: u64) -> u64 {
        self.seed.wrapping_add(attempt.wrapping_mul(0x9E37_79B9_7F4A_7C15))
    }
}

fn unit_open_closed(rng: &mut ChaCha8Rng) -> f64 {
    // (0, 1]: stored values are never exactly zero
    1.0 - rng.random::<f64>()
}

fn sample_sparse<T: Real>(rng: &mut ChaCha8Rng, m: usize, n: usize, density: f64) -> SparseMatrix<T> {
    let cells = m * n;
    let k = ((density * cells as f64).round() as usize).min(cells);
    let mut positions = index::sample(rng, cells, k).into_vec();
    positions.sort_unstable();
    let triplets = positions
        .into_iter()
        .map(|p| (p % m, p / m, T::lit(unit_open_closed(rng))))
        .collect();
    SparseMatrix::new(m, n, triplets).expect("sampled positions are in range and distinct")
}

/// `m x n` matrix with `round(density * m * n)` nonzeros at uniformly chosen
/// distinct positions, values uniform on `(0, 1]`.
pub fn gen_sparse<T: Real>(m: usize, n: usize, density: f64, seed: u64) -> Result<SparseMatrix<T>> {
    if !(density > 0.0 && density <= 1.0) {
        return Err(Error::Input(format!("density must lie in (0, 1], got {density}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(sample_sparse(&mut rng, m, n, density))
}

fn rect_once<T: Real>(m: usize, n: usize, r: usize, density: f64, seed: u64) -> DMatrix<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = sample_sparse::<T>(&mut rng, m, r, density).to_dense();
    let mut a = DMatrix::zeros(m, n);
    a.columns_mut(0, r).copy_from(&base);
    let terms = COMBINATION_TERMS.min(r);
    for j in r..n {
        let mut picks = index::sample(&mut rng, r, terms).into_vec();
        picks.sort_unstable();
        for src in picks {
            let c = T::lit(unit_open_closed(&mut rng));
            for i in 0..m {
                let v = base[(i, src)];
                if v != T::zero() {
                    a[(i, j)] += c * v;
                }
            }
        }
    }
    a
}

/// Sparse `m x n` matrix of numeric rank exactly `r`.
pub fn gen_rect_lowrank<T: Real>(spec: &GenSpec) -> Result<DMatrix<T>> {
    spec.validate()?;
    for attempt in 0..MAX_ATTEMPTS {
        let a = rect_once::<T>(spec.m, spec.n, spec.r, spec.density, spec.attempt_seed(attempt));
        if numeric_rank(&a, T::lit(RANK_CHECK_TOL))? == spec.r {
            return Ok(a);
        }
    }
    Err(Error::Numeric(format!(
        "no rank-{} sample found for {}x{} at density {} after {MAX_ATTEMPTS} attempts",
        spec.r, spec.m, spec.n, spec.density
    )))
}

/// `B^T B` for a sparse `n x n` rank-`r` `B`; the upper triangle is copied
/// from the lower one so the result is exactly symmetric.
pub fn gram<T: Real>(b: &DMatrix<T>) -> DMatrix<T> {
    let mut a = b.tr_mul(b);
    let n = a.nrows();
    for j in 0..n {
        for i in (j + 1)..n {
            a[(j, i)] = a[(i, j)];
        }
    }
    a
}

/// Symmetric positive semidefinite `n x n` matrix of numeric rank `r`.
pub fn gen_sym_gram<T: Real>(spec: &GenSpec) -> Result<DMatrix<T>> {
    spec.validate()?;
    for attempt in 0..MAX_ATTEMPTS {
        let b = rect_once::<T>(spec.n, spec.n, spec.r, spec.density, spec.attempt_seed(attempt));
        let a = gram(&b);
        if numeric_rank(&a, T::lit(RANK_CHECK_TOL))? == spec.r {
            return Ok(a);
        }
    }
    Err(Error::Numeric(format!(
        "no rank-{} Gram matrix found for n = {} at density {} after {MAX_ATTEMPTS} attempts",
        spec.r, spec.n, spec.density
    )))
}

/// Dispatches on `spec.kind`.
pub fn generate<T: Real>(spec: &GenSpec) -> Result<DMatrix<T>> {
    match spec.kind {
        GenKind::RectLowrank => gen_rect_lowrank(spec),
        GenKind::SymGram => gen_sym_gram(spec),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{asymmetry, norm0, svd_full};

    #[test]
    fn full_density_is_dense() {
        let s = gen_sparse::<f64>(4, 5, 1.0, 1).unwrap();
        assert_eq!(s.nnz(), 20);
    }

    #[test]
    fn deterministic_in_seed() {
        let a = gen_sparse::<f64>(30, 20, 0.2, 42).unwrap();
        let b = gen_sparse::<f64>(30, 20, 0.2, 42).unwrap();
        let c = gen_sparse::<f64>(30, 20, 0.2, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        let spec = GenSpec::rect(40, 12, 5, 0.3, 9);
        let x = gen_rect_lowrank::<f64>(&spec).unwrap();
        let y = gen_rect_lowrank::<f64>(&spec).unwrap();
        assert!(x.iter().zip(y.iter()).all(|(p, q)| p.to_bits() == q.to_bits()));
    }

    #[test]
    fn nnz_concentrates() {
        let s = gen_sparse::<f64>(100, 100, 0.1, 5).unwrap();
        assert!((900..=1100).contains(&s.nnz()), "{}", s.nnz());
        assert!(s.triplets().iter().all(|t| t.2 > 0.0 && t.2 <= 1.0));
    }

    #[test]
    fn full_rank_request_returns_base_sample() {
        let spec = GenSpec::rect(20, 6, 6, 0.5, 3);
        let a = gen_rect_lowrank::<f64>(&spec).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let base = sample_sparse::<f64>(&mut rng, 20, 6, 0.5).to_dense();
        assert_eq!(a, base);
    }

    #[test]
    fn rank_one_columns_are_parallel() {
        let spec = GenSpec::rect(10, 3, 1, 0.6, 8);
        let a = gen_rect_lowrank::<f64>(&spec).unwrap();
        let c0 = a.column(0);
        for j in 1..3 {
            let cj = a.column(j);
            let ratio = cj.dot(&c0) / c0.dot(&c0);
            assert!((cj - c0 * ratio).norm() < 1e-12);
        }
    }

    #[test]
    fn tall_low_rank_regime() {
        let spec = GenSpec::rect(1000, 100, 75, 0.1, 1);
        let a = gen_rect_lowrank::<f64>(&spec).unwrap();
        assert_eq!(svd_full(&a, 1e-8).unwrap().rank(), 75);
        let density = norm0(&a, 0.0) as f64 / 1e5;
        assert!((0.05..=0.2).contains(&density), "{density}");
    }

    #[test]
    fn gram_is_symmetric_psd_low_rank() {
        let spec = GenSpec::sym(100, 25, 0.1, 7);
        let a = gen_sym_gram::<f64>(&spec).unwrap();
        assert_eq!(asymmetry(&a), 0.0);
        let eig = a.clone().symmetric_eigenvalues();
        assert!(eig.min() >= -1e-10 * a.norm());
        assert_eq!(svd_full(&a, 1e-8).unwrap().rank(), 25);
    }

    #[test]
    fn identity_gram() {
        let i = DMatrix::<f64>::identity(4, 4);
        assert_eq!(gram(&i), i);
    }

    #[test]
    fn spec_validation() {
        assert!(GenSpec::rect(10, 5, 0, 0.5, 1).validate().is_err());
        assert!(GenSpec::rect(10, 5, 6, 0.5, 1).validate().is_err());
        assert!(GenSpec::rect(10, 5, 2, 0.0, 1).validate().is_err());
        assert!(GenSpec::rect(10, 5, 2, 0.05, 1).validate().is_err());
        let mut s = GenSpec::sym(5, 2, 0.5, 1);
        s.m = 6;
        assert!(s.validate().is_err());
    }
}
