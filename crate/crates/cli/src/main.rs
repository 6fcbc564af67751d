#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use sparse_ginv::bench::{self, BenchConfig, Problem};
use sparse_ginv::drs::{check_sym_characterization, solve_ahref_ginv, solve_symmetric_ginv, DrsConfig};
use sparse_ginv::generate::{generate, GenKind, GenSpec};
use sparse_ginv::linalg::{asymmetry, frobenius, is_symmetric, norm0, pseudoinverse, DEFAULT_ZERO_TOL};
use sparse_ginv::lsq::{build_ahat, compare_strategies, solve_via_h, solve_via_hhat, LsqInstance, Strategy};
use sparse_ginv::mtx::{read_dense, write_dense, write_dense_matrix_market, write_matrix_market};
use sparse_ginv::{lp, mp_residuals, Error, SparseMatrix};

const EXIT_INPUT: u8 = 2;
const EXIT_NOT_CONVERGED: u8 = 3;

#[derive(Parser)]
#[command(name = "sparse-ginv", version, about = "Sparse generalized inverses by 1-norm minimization")]
struct Cli {
    #[command(flatten)]
    opts: Opts,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Opts {
    /// Relative singular-value cutoff for numeric rank
    #[arg(long, global = true)]
    rank_tol: Option<f64>,
    /// Magnitude at or below which an entry counts as zero
    #[arg(long, global = true)]
    zero_tol: Option<f64>,
    /// Soft-thresholding step of the splitting scheme
    #[arg(long, global = true)]
    step_lambda: Option<f64>,
    #[arg(long, global = true)]
    eps_abs: Option<f64>,
    #[arg(long, global = true)]
    eps_rel: Option<f64>,
    #[arg(long, global = true)]
    max_iter: Option<usize>,
    /// Wall-clock limit per solve, in seconds
    #[arg(long, global = true)]
    time_limit: Option<f64>,
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    SymGram,
    RectLowrank,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    /// theta = Hhat A^T b with Hhat a symmetric inverse of A^T A + lambda L^T L
    ViaHhat,
    /// theta = H b with H an ah-symmetric reflexive inverse of A
    ViaH,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a seeded synthetic instance as a Matrix Market file
    Gen {
        #[arg(long, value_enum)]
        kind: KindArg,
        /// Rows; defaults to n
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        density: f64,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Moore-Penrose pseudoinverse
    Pinv {
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Sparse symmetric generalized inverse of a symmetric matrix
    SolveSym {
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Sparse ah-symmetric reflexive generalized inverse
    SolveAhref {
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Least squares or generalized Tikhonov through a generalized inverse
    Lsq {
        input: PathBuf,
        /// Right-hand side, an m x 1 Matrix Market file
        #[arg(long)]
        b: PathBuf,
        /// Regularization matrix, p x n
        #[arg(long)]
        l: Option<PathBuf>,
        #[arg(long, default_value_t = 0.0)]
        ridge_lambda: f64,
        #[arg(long, value_enum, default_value_t = StrategyArg::ViaHhat)]
        strategy: StrategyArg,
        /// Precomputed generalized inverse (H or Hhat); computed when absent
        #[arg(long)]
        ginv: Option<PathBuf>,
        /// Where to write theta
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Cost and accuracy of theta = H b versus theta = Hhat A^T b
    Compare {
        input: PathBuf,
        /// Number of right-hand sides with standard normal entries, seeded by --seed
        #[arg(long, default_value_t = 10)]
        samples: usize,
    },
    /// Write the linear program for the symmetric problem in LP format
    ExportLp {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Run a benchmark grid described by a JSON config
    Bench {
        config: PathBuf,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Penrose residuals of H for A and the symmetric characterization verdict
    Verify {
        a: PathBuf,
        h: PathBuf,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
}

impl Opts {
    fn drs(&self) -> DrsConfig<f64> {
        let mut cfg = DrsConfig::default();
        self.apply(&mut cfg);
        cfg
    }

    fn apply(&self, cfg: &mut DrsConfig<f64>) {
        if let Some(v) = self.rank_tol {
            cfg.rank_tol = v;
        }
        if let Some(v) = self.step_lambda {
            cfg.step_lambda = v;
        }
        if let Some(v) = self.eps_abs {
            cfg.eps_abs = v;
        }
        if let Some(v) = self.eps_rel {
            cfg.eps_rel = v;
        }
        if let Some(v) = self.max_iter {
            cfg.max_iter = v;
        }
        if let Some(t) = self.time_limit {
            cfg.time_limit = Some(Duration::from_secs_f64(t));
        }
    }

    fn zero_tol(&self) -> f64 {
        self.zero_tol.unwrap_or(DEFAULT_ZERO_TOL)
    }

    fn validate(&self) -> Result<(), Error> {
        if let Some(t) = self.time_limit {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::Input(format!("--time-limit must be positive, got {t}")));
            }
        }
        if !(self.zero_tol() >= 0.0) {
            return Err(Error::Input("--zero-tol must be >= 0".into()));
        }
        self.drs().validate()
    }
}

enum Failure {
    Input(String),
    Other(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_input_error() || matches!(e, Error::Io(_)) {
            Failure::Input(e.to_string())
        } else {
            Failure::Other(e.to_string())
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Other(e.to_string())
    }
}

type Outcome = Result<bool, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_INPUT) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_NOT_CONVERGED),
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_INPUT)
        }
        Err(Failure::Other(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}

/// `Ok(false)` means a solve stopped before meeting its tolerance.
fn run(cli: &Cli) -> Outcome {
    let o = &cli.opts;
    o.validate()?;
    match &cli.cmd {
        Cmd::Gen { kind, m, n, r, density, output } => {
            let kind = match kind {
                KindArg::SymGram => GenKind::SymGram,
                KindArg::RectLowrank => GenKind::RectLowrank,
            };
            let spec = GenSpec { m: m.unwrap_or(*n), n: *n, r: *r, density: *density, seed: o.seed, kind };
            let a = generate::<f64>(&spec)?;
            write_matrix_market(&SparseMatrix::from_dense(&a), output)?;
            Ok(true)
        }
        Cmd::Pinv { input, output } => {
            let a = load(input)?;
            let p = pseudoinverse(&a, o.drs().rank_tol)?;
            write_matrix(&p, output.as_deref())?;
            Ok(true)
        }
        Cmd::SolveSym { input, output } => solve(o, input, output.as_deref(), Problem::Symmetric),
        Cmd::SolveAhref { input, output } => solve(o, input, output.as_deref(), Problem::AhRef),
        Cmd::Lsq { input, b, l, ridge_lambda, strategy, ginv, output } => {
            lsq(o, input, b, l.as_deref(), *ridge_lambda, *strategy, ginv.as_deref(), output.as_deref())
        }
        Cmd::Compare { input, samples } => compare(o, input, *samples),
        Cmd::ExportLp { input, output } => {
            let a = load(input)?;
            lp::export_lp(&a, output)?;
            Ok(true)
        }
        Cmd::Bench { config, workers, output_dir } => {
            let mut cfg = BenchConfig::from_json_file(config)?;
            o.apply(&mut cfg.drs);
            if let Some(t) = o.time_limit {
                cfg.time_limit_secs = Some(t);
            }
            if let Some(z) = o.zero_tol {
                cfg.zero_tol = z;
            }
            if let Some(w) = workers {
                cfg.workers = *w;
            }
            if output_dir.is_some() {
                cfg.output_dir = output_dir.clone();
            }
            let report = bench::run_benchmark(&cfg)?;
            let text = match o.format {
                Format::Csv => bench::averages_csv(&report.averages)?,
                Format::Json => bench::averages_json(&report.averages)? + "\n",
            };
            io::stdout().write_all(text.as_bytes())?;
            Ok(true)
        }
        Cmd::Verify { a, h, tol } => verify(o, a, h, *tol),
    }
}

fn load(path: &Path) -> Result<DMatrix<f64>, Failure> {
    read_dense::<f64>(path).map_err(|e| match Failure::from(e) {
        Failure::Input(m) => Failure::Input(format!("{}: {m}", path.display())),
        Failure::Other(m) => Failure::Other(format!("{}: {m}", path.display())),
    })
}

fn write_matrix(m: &DMatrix<f64>, path: Option<&Path>) -> Result<(), Failure> {
    match path {
        Some(p) => write_dense_matrix_market(m, p)?,
        None => write_dense(m, io::stdout().lock())?,
    }
    Ok(())
}

fn emit<S: Serialize>(item: &S, format: Format) -> Result<(), Failure> {
    let text = match format {
        Format::Json => serde_json::to_string_pretty(item).map_err(|e| Failure::Other(e.to_string()))? + "\n",
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.serialize(item).map_err(|e| Failure::Other(e.to_string()))?;
            let bytes = w.into_inner().map_err(|e| Failure::Other(e.to_string()))?;
            String::from_utf8_lossy(&bytes).into_owned()
        }
    };
    io::stdout().write_all(text.as_bytes())?;
    Ok(())
}

fn solve(o: &Opts, input: &Path, output: Option<&Path>, problem: Problem) -> Outcome {
    let a = load(input)?;
    let cfg = o.drs();
    let (mut row, run) = bench::evaluate_instance(&a, problem, &cfg, o.zero_tol())?;
    row.instance_id = input.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    row.cell = row.instance_id.clone();
    if let Some(p) = output {
        write_dense_matrix_market(&run.h, p)?;
    }
    emit(&row, o.format)?;
    Ok(run.converged)
}

#[derive(Serialize)]
struct LsqSummary {
    strategy: Strategy,
    m: usize,
    n: usize,
    ridge_lambda: f64,
    objective: f64,
    residual_norm: f64,
    normal_residual: f64,
    mult_count: usize,
    ginv_norm0: usize,
    ginv_iterations: Option<usize>,
    ginv_converged: Option<bool>,
}

#[allow(clippy::too_many_arguments)]
fn lsq(
    o: &Opts,
    input: &Path,
    b: &Path,
    l: Option<&Path>,
    ridge_lambda: f64,
    strategy: StrategyArg,
    ginv: Option<&Path>,
    output: Option<&Path>,
) -> Outcome {
    let a = load(input)?;
    let bm = load(b)?;
    if bm.ncols() != 1 {
        return Err(Failure::Input(format!("b must be a single column, got {}x{}", bm.nrows(), bm.ncols())));
    }
    let b = DVector::from_column_slice(bm.as_slice());
    let l = l.map(read_dense::<f64>).transpose()?;
    let inst = LsqInstance::new(a, b, l, ridge_lambda)?;
    let cfg = o.drs();

    let (op, run) = match (ginv, strategy) {
        (Some(p), _) => (load(p)?, None),
        (None, StrategyArg::ViaHhat) => {
            let ahat = build_ahat(&inst.a, inst.l.as_ref(), inst.ridge_lambda)?;
            let r = solve_symmetric_ginv(&ahat, &cfg)?;
            (r.h.clone(), Some(r))
        }
        (None, StrategyArg::ViaH) => {
            if ridge_lambda > 0.0 {
                return Err(Error::Unsupported("strategy via-h requires --ridge-lambda 0".into()).into());
            }
            let r = solve_ahref_ginv(&inst.a, &cfg)?;
            (r.h.clone(), Some(r))
        }
    };
    let sol = match strategy {
        StrategyArg::ViaHhat => solve_via_hhat(&inst, &op, o.zero_tol())?,
        StrategyArg::ViaH => solve_via_h(&inst, &op, o.zero_tol())?,
    };
    if let Some(p) = output {
        write_dense_matrix_market(&DMatrix::from_column_slice(sol.theta.len(), 1, sol.theta.as_slice()), p)?;
    }
    let summary = LsqSummary {
        strategy: sol.strategy,
        m: inst.a.nrows(),
        n: inst.a.ncols(),
        ridge_lambda,
        objective: sol.objective,
        residual_norm: (&inst.a * &sol.theta - &inst.b).norm(),
        normal_residual: sol.normal_residual,
        mult_count: sol.mult_count,
        ginv_norm0: norm0(&op, o.zero_tol()),
        ginv_iterations: run.as_ref().map(|r| r.iterations),
        ginv_converged: run.as_ref().map(|r| r.converged),
    };
    match o.format {
        Format::Csv => emit(&summary, o.format)?,
        Format::Json => {
            let mut v = serde_json::to_value(&summary).map_err(|e| Failure::Other(e.to_string()))?;
            v["theta"] = serde_json::json!(sol.theta.as_slice());
            emit(&v, o.format)?;
        }
    }
    Ok(run.is_none_or(|r| r.converged))
}

#[derive(Serialize)]
struct CompareSummary {
    m: usize,
    n: usize,
    rank: usize,
    h_norm0: usize,
    h_norm1: f64,
    hhat_norm0: usize,
    hhat_norm1: f64,
    at_norm0: usize,
    mult_count_via_h: usize,
    mult_count_via_hhat: usize,
    h_iterations: usize,
    hhat_iterations: usize,
    h_converged: bool,
    hhat_converged: bool,
    samples: usize,
    max_relative_gap: f64,
}

fn compare(o: &Opts, input: &Path, samples: usize) -> Outcome {
    let a = load(input)?;
    let mut rng = ChaCha8Rng::seed_from_u64(o.seed);
    let bs: Vec<DVector<f64>> =
        (0..samples).map(|_| DVector::from_fn(a.nrows(), |_, _| rng.sample::<f64, _>(StandardNormal))).collect();
    let rep = compare_strategies(&a, &o.drs(), &bs, o.zero_tol())?;
    let converged = rep.h_converged && rep.hhat_converged;
    match o.format {
        Format::Json => emit(&rep, o.format)?,
        Format::Csv => emit(
            &CompareSummary {
                m: rep.m,
                n: rep.n,
                rank: rep.rank,
                h_norm0: rep.h_norm0,
                h_norm1: rep.h_norm1,
                hhat_norm0: rep.hhat_norm0,
                hhat_norm1: rep.hhat_norm1,
                at_norm0: rep.at_norm0,
                mult_count_via_h: rep.mult_count_via_h,
                mult_count_via_hhat: rep.mult_count_via_hhat,
                h_iterations: rep.h_iterations,
                hhat_iterations: rep.hhat_iterations,
                h_converged: rep.h_converged,
                hhat_converged: rep.hhat_converged,
                samples: rep.samples.len(),
                max_relative_gap: rep.max_relative_gap(),
            },
            o.format,
        )?,
    }
    Ok(converged)
}

#[derive(Serialize)]
struct VerifyReport {
    p1: f64,
    p2: f64,
    p3: f64,
    p4: f64,
    p1_rel: f64,
    p2_rel: f64,
    p3_rel: f64,
    p4_rel: f64,
    tol: f64,
    generalized_inverse: bool,
    a_symmetric: bool,
    /// `AHA + H = A + H^T`; only meaningful for symmetric `A`.
    characterization: Option<bool>,
    /// `AHA = A` and `H = H^T` checked directly.
    direct: Option<bool>,
}

fn verify(o: &Opts, a: &Path, h: &Path, tol: f64) -> Outcome {
    if !(tol > 0.0) {
        return Err(Failure::Input(format!("--tol must be positive, got {tol}")));
    }
    let a = load(a)?;
    let h = load(h)?;
    let r = mp_residuals(&a, &h)?;
    let a_symmetric = is_symmetric(&a, 1e-10);
    let generalized_inverse = r.p1 <= tol * frobenius(&a).max(1.0);
    let (characterization, direct) = if a_symmetric {
        let sym = asymmetry(&h) <= tol * frobenius(&h).max(1.0);
        (Some(check_sym_characterization(&a, &h, tol)), Some(generalized_inverse && sym))
    } else {
        (None, None)
    };
    emit(
        &VerifyReport {
            p1: r.p1,
            p2: r.p2,
            p3: r.p3,
            p4: r.p4,
            p1_rel: r.p1_rel,
            p2_rel: r.p2_rel,
            p3_rel: r.p3_rel,
            p4_rel: r.p4_rel,
            tol,
            generalized_inverse,
            a_symmetric,
            characterization,
            direct,
        },
        o.format,
    )?;
    Ok(true)
}
