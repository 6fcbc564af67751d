//! Benchmark grids over generated and file-based instances, reported as one
//! row per instance plus per-cell averages in CSV and JSON.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::drs::{solve_ahref_ginv, solve_symmetric_ginv, DrsConfig, DrsResult};
use crate::error::{Error, Result};
use crate::generate::{generate, GenKind, GenSpec};
use crate::linalg::{norm0, norm1, numeric_rank, svd_full, DEFAULT_ZERO_TOL};
use crate::lsq::build_ahat;
use crate::mtx::read_matrix_market_with_info;

/// Which sparse generalized inverse a row reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Problem {
    /// Symmetric generalized inverse of a symmetric input.
    Symmetric,
    /// Ah-symmetric reflexive generalized inverse of the input.
    AhRef,
    /// Symmetric generalized inverse of `A^T A` for the input `A`.
    NormalSymmetric,
}

impl Problem {
    fn tag(self) -> &'static str {
        match self {
            Problem::Symmetric => "sym",
            Problem::AhRef => "ahref",
            Problem::NormalSymmetric => "normal_sym",
        }
    }
}

/// Grid cell without a seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellSpec {
    pub m: usize,
    pub n: usize,
    pub r: usize,
    pub density: f64,
    pub kind: GenKind,
    /// Defaults to `symmetric` for `sym_gram` and `ah_ref` for `rect_lowrank`.
    #[serde(default)]
    pub problem: Option<Problem>,
}

impl CellSpec {
    pub fn problem(&self) -> Problem {
        self.problem.unwrap_or(match self.kind {
            GenKind::SymGram => Problem::Symmetric,
            GenKind::RectLowrank => Problem::AhRef,
        })
    }

    pub fn label(&self) -> String {
        let kind = match self.kind {
            GenKind::SymGram => "sym_gram",
            GenKind::RectLowrank => "rect_lowrank",
        };
        format!(
            "{}_{kind}_m{}_n{}_r{}_d{}",
            self.problem().tag(),
            self.m,
            self.n,
            self.r,
            self.density
        )
    }

    pub fn with_seed(&self, seed: u64) -> GenSpec {
        GenSpec { m: self.m, n: self.n, r: self.r, density: self.density, seed, kind: self.kind }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileInstance {
    pub path: PathBuf,
    #[serde(default = "default_file_problem")]
    pub problem: Problem,
}

fn default_file_problem() -> Problem {
    Problem::AhRef
}

fn default_seeds() -> usize {
    5
}

fn default_seed_base() -> u64 {
    1
}

fn default_zero_tol() -> f64 {
    DEFAULT_ZERO_TOL
}

fn default_workers() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    #[serde(default)]
    pub grid: Vec<CellSpec>,
    #[serde(default)]
    pub files: Vec<FileInstance>,
    /// Instances per grid cell; seeds are `base_seed, base_seed + 1, ...`.
    #[serde(default = "default_seeds")]
    pub seeds_per_cell: usize,
    #[serde(default = "default_seed_base")]
    pub base_seed: u64,
    #[serde(default)]
    pub drs: DrsConfig<f64>,
    /// Per-instance wall-clock limit in seconds.
    #[serde(default)]
    pub time_limit_secs: Option<f64>,
    #[serde(default = "default_zero_tol")]
    pub zero_tol: f64,
    #[serde(default = "default_workers")]
    pub workers: usize,
    /// Directory receiving the CSV and JSON tables, see [`write_report`].
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            grid: Vec::new(),
            files: Vec::new(),
            seeds_per_cell: default_seeds(),
            base_seed: default_seed_base(),
            drs: DrsConfig::default(),
            time_limit_secs: None,
            zero_tol: DEFAULT_ZERO_TOL,
            workers: 1,
            output_dir: None,
        }
    }
}

impl BenchConfig {
    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = fs::read_to_string(path.as_ref())?;
        let cfg: BenchConfig = serde_json::from_str(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds_per_cell == 0 {
            return Err(Error::Input("seeds_per_cell must be at least 1".into()));
        }
        if self.workers == 0 {
            return Err(Error::Input("workers must be at least 1".into()));
        }
        if let Some(t) = self.time_limit_secs {
            if !(t > 0.0) {
                return Err(Error::Input(format!("time_limit_secs must be positive, got {t}")));
            }
        }
        self.drs.validate()
    }

    fn drs_config(&self) -> DrsConfig<f64> {
        DrsConfig {
            time_limit: self.time_limit_secs.map(Duration::from_secs_f64).or(self.drs.time_limit),
            ..self.drs
        }
    }
}

/// One solved instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub instance_id: String,
    pub cell: String,
    pub problem: Problem,
    /// Shape of the input, before any `A^T A` is formed.
    pub m: usize,
    pub n: usize,
    /// Rank of the matrix whose inverse is computed.
    pub r: usize,
    /// `stored nonzeros / (m n)` of the input.
    pub density: f64,
    pub seed: Option<u64>,
    /// Stored nonzeros of the matrix whose inverse is computed.
    pub a_nnz: usize,
    pub a_norm0: usize,
    pub apinv_norm0: usize,
    pub apinv_norm1: f64,
    pub h_norm0: usize,
    pub h_norm1: f64,
    pub h_rank: usize,
    /// `||H||_0 / (r^2 + r)`
    pub ratio_h0_bound: f64,
    /// `||H||_0 / ||A^+||_0`
    pub ratio_h0_apinv0: f64,
    /// `||H||_1 / ||A^+||_1`
    pub ratio_h1_apinv1: f64,
    /// `rank(H) / r`
    pub ratio_rank: f64,
    pub iterations: usize,
    pub elapsed_secs: f64,
    pub converged: bool,
    pub timed_out: bool,
    /// `*` when the time limit was hit.
    pub mark: String,
    pub error: Option<String>,
}

fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

impl ExperimentRow {
    fn failed(instance_id: String, cell: String, problem: Problem, seed: Option<u64>, err: &Error) -> Self {
        ExperimentRow {
            instance_id,
            cell,
            problem,
            m: 0,
            n: 0,
            r: 0,
            density: 0.0,
            seed,
            a_nnz: 0,
            a_norm0: 0,
            apinv_norm0: 0,
            apinv_norm1: 0.0,
            h_norm0: 0,
            h_norm1: 0.0,
            h_rank: 0,
            ratio_h0_bound: 0.0,
            ratio_h0_apinv0: 0.0,
            ratio_h1_apinv1: 0.0,
            ratio_rank: 0.0,
            iterations: 0,
            elapsed_secs: 0.0,
            converged: false,
            timed_out: false,
            mark: String::new(),
            error: Some(err.to_string()),
        }
    }

    /// `r^2 + r`, the nonzero bound of extreme points of the LP.
    pub fn extreme_point_bound(&self) -> usize {
        self.r * self.r + self.r
    }

    /// The four ratio columns recomputed from the raw norms.
    pub fn recomputed_ratios(&self) -> [f64; 4] {
        [
            ratio(self.h_norm0 as f64, self.extreme_point_bound() as f64),
            ratio(self.h_norm0 as f64, self.apinv_norm0 as f64),
            ratio(self.h_norm1, self.apinv_norm1),
            ratio(self.h_rank as f64, self.r as f64),
        ]
    }

    pub fn ratios(&self) -> [f64; 4] {
        [self.ratio_h0_bound, self.ratio_h0_apinv0, self.ratio_h1_apinv1, self.ratio_rank]
    }
}

/// Averages over the successful rows of one cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellAverage {
    pub cell: String,
    pub problem: Problem,
    pub instances: usize,
    pub failed: usize,
    pub converged: usize,
    pub timed_out: usize,
    pub a_norm0: f64,
    pub apinv_norm0: f64,
    pub apinv_norm1: f64,
    pub h_norm0: f64,
    pub h_norm1: f64,
    pub ratio_h0_bound: f64,
    pub ratio_h0_apinv0: f64,
    pub ratio_h1_apinv1: f64,
    pub ratio_rank: f64,
    pub iterations: f64,
    pub elapsed_secs: f64,
    pub mark: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub rows: Vec<ExperimentRow>,
    pub averages: Vec<CellAverage>,
}

/// Solves `problem` for `a` and fills a report row.
pub fn evaluate_instance(
    a: &DMatrix<f64>,
    problem: Problem,
    cfg: &DrsConfig<f64>,
    zero_tol: f64,
) -> Result<(ExperimentRow, DrsResult<f64>)> {
    let (m, n) = a.shape();
    let density = ratio(norm0(a, 0.0) as f64, (m * n) as f64);
    let target = match problem {
        Problem::NormalSymmetric => build_ahat(a, None, 0.0)?,
        _ => a.clone(),
    };
    let f = svd_full(&target, cfg.rank_tol)?;
    let apinv = f.pseudoinverse();
    let run = match problem {
        Problem::Symmetric | Problem::NormalSymmetric => solve_symmetric_ginv(&target, cfg)?,
        Problem::AhRef => solve_ahref_ginv(&target, cfg)?,
    };
    let h_rank = numeric_rank(&run.h, cfg.rank_tol)?;
    let mut row = ExperimentRow {
        instance_id: String::new(),
        cell: String::new(),
        problem,
        m,
        n,
        r: f.rank(),
        density,
        seed: None,
        a_nnz: norm0(&target, 0.0),
        a_norm0: norm0(&target, zero_tol),
        apinv_norm0: norm0(&apinv, zero_tol),
        apinv_norm1: norm1(&apinv),
        h_norm0: norm0(&run.h, zero_tol),
        h_norm1: run.objective,
        h_rank,
        ratio_h0_bound: 0.0,
        ratio_h0_apinv0: 0.0,
        ratio_h1_apinv1: 0.0,
        ratio_rank: 0.0,
        iterations: run.iterations,
        elapsed_secs: run.elapsed.as_secs_f64(),
        converged: run.converged,
        timed_out: run.timed_out,
        mark: if run.timed_out { "*".into() } else { String::new() },
        error: None,
    };
    let [a0, a1, a2, a3] = row.recomputed_ratios();
    row.ratio_h0_bound = a0;
    row.ratio_h0_apinv0 = a1;
    row.ratio_h1_apinv1 = a2;
    row.ratio_rank = a3;
    Ok((row, run))
}

enum Task {
    Generated { cell: CellSpec, seed: u64 },
    File(FileInstance),
}

impl Task {
    fn ids(&self) -> (String, String, Problem, Option<u64>) {
        match self {
            Task::Generated { cell, seed } => {
                let label = cell.label();
                (format!("{label}_s{seed}"), label, cell.problem(), Some(*seed))
            }
            Task::File(f) => {
                let stem = f
                    .path
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| f.path.display().to_string());
                let label = format!("{}_{stem}", f.problem.tag());
                (label.clone(), label, f.problem, None)
            }
        }
    }

    fn run(&self, cfg: &DrsConfig<f64>, zero_tol: f64) -> ExperimentRow {
        let (id, cell, problem, seed) = self.ids();
        let matrix = match self {
            Task::Generated { cell, seed } => generate::<f64>(&cell.with_seed(*seed)),
            Task::File(f) => read_matrix_market_with_info::<f64>(&f.path).map(|(s, _)| s.to_dense()),
        };
        match matrix.and_then(|a| evaluate_instance(&a, problem, cfg, zero_tol)) {
            Ok((mut row, _)) => {
                row.instance_id = id;
                row.cell = cell;
                row.seed = seed;
                row
            }
            Err(e) => ExperimentRow::failed(id, cell, problem, seed, &e),
        }
    }
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (s, c) = xs.fold((0.0, 0usize), |(s, c), x| (s + x, c + 1));
    if c == 0 {
        0.0
    } else {
        s / c as f64
    }
}

pub fn averages(rows: &[ExperimentRow]) -> Vec<CellAverage> {
    let mut groups: BTreeMap<(String, Problem), Vec<&ExperimentRow>> = BTreeMap::new();
    let mut order = Vec::new();
    for r in rows {
        let key = (r.cell.clone(), r.problem);
        if !groups.contains_key(&key) {
            order.push(key.clone());
        }
        groups.entry(key).or_default().push(r);
    }
    order
        .into_iter()
        .map(|key| {
            let all = &groups[&key];
            let ok: Vec<&&ExperimentRow> = all.iter().filter(|r| r.error.is_none()).collect();
            let avg = |f: fn(&ExperimentRow) -> f64| mean(ok.iter().map(|r| f(r)));
            let timed_out = ok.iter().filter(|r| r.timed_out).count();
            CellAverage {
                cell: key.0.clone(),
                problem: key.1,
                instances: all.len(),
                failed: all.len() - ok.len(),
                converged: ok.iter().filter(|r| r.converged).count(),
                timed_out,
                a_norm0: avg(|r| r.a_norm0 as f64),
                apinv_norm0: avg(|r| r.apinv_norm0 as f64),
                apinv_norm1: avg(|r| r.apinv_norm1),
                h_norm0: avg(|r| r.h_norm0 as f64),
                h_norm1: avg(|r| r.h_norm1),
                ratio_h0_bound: avg(|r| r.ratio_h0_bound),
                ratio_h0_apinv0: avg(|r| r.ratio_h0_apinv0),
                ratio_h1_apinv1: avg(|r| r.ratio_h1_apinv1),
                ratio_rank: avg(|r| r.ratio_rank),
                iterations: avg(|r| r.iterations as f64),
                elapsed_secs: avg(|r| r.elapsed_secs),
                mark: if timed_out > 0 { "*".into() } else { String::new() },
            }
        })
        .collect()
}

/// Runs every instance of the grid (and every listed file), `workers` at a
/// time. Failures become rows with `error` set; the grid never aborts. Rows
/// are sorted by instance id, independent of completion order.
pub fn run_benchmark(cfg: &BenchConfig) -> Result<BenchReport> {
    cfg.validate()?;
    let drs = cfg.drs_config();
    let mut tasks = Vec::new();
    for cell in &cfg.grid {
        for s in 0..cfg.seeds_per_cell as u64 {
            tasks.push(Task::Generated { cell: *cell, seed: cfg.base_seed + s });
        }
    }
    tasks.extend(cfg.files.iter().cloned().map(Task::File));

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::Input(format!("cannot start worker pool: {e}")))?;
    let mut rows: Vec<ExperimentRow> =
        pool.install(|| tasks.par_iter().map(|t| t.run(&drs, cfg.zero_tol)).collect());
    rows.sort_by(|a, b| a.instance_id.cmp(&b.instance_id));
    let report = BenchReport { averages: averages(&rows), rows };
    if let Some(dir) = &cfg.output_dir {
        write_report(&report, dir)?;
    }
    Ok(report)
}

fn to_csv<S: Serialize>(items: &[S]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for it in items {
        w.serialize(it)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn rows_csv(rows: &[ExperimentRow]) -> Result<String> {
    if rows.is_empty() {
        return Ok(String::new());
    }
    to_csv(rows)
}

pub fn averages_csv(avgs: &[CellAverage]) -> Result<String> {
    if avgs.is_empty() {
        return Ok(String::new());
    }
    to_csv(avgs)
}

pub fn parse_rows_csv(text: &str) -> Result<Vec<ExperimentRow>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    r.deserialize().map(|x| x.map_err(Error::from)).collect()
}

/// JSON array of row objects.
pub fn rows_json(rows: &[ExperimentRow]) -> Result<String> {
    Ok(serde_json::to_string_pretty(rows)?)
}

pub fn averages_json(avgs: &[CellAverage]) -> Result<String> {
    Ok(serde_json::to_string_pretty(avgs)?)
}

/// Writes `rows.csv`, `rows.json`, `averages.csv` and `averages.json` into `dir`.
pub fn write_report(report: &BenchReport, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("rows.csv"), rows_csv(&report.rows)?)?;
    fs::write(dir.join("rows.json"), rows_json(&report.rows)?)?;
    fs::write(dir.join("averages.csv"), averages_csv(&report.averages)?)?;
    fs::write(dir.join("averages.json"), averages_json(&report.averages)?)?;
    Ok(())
}
