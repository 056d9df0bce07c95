//! Batch front end for the tgspec library: benchmark and user-defined
//! regulator solves, quadrature parameter sweeps, and parameter advice.
//! Emits CSV and plain-text reports suitable for external plotting.
//!
//! Exit codes: 0 success, 2 input error, 3 solver error.

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::exit;
use std::time::Instant;
use tgspec::ihoc::{
    advise_parameters, assemble_ips, assemble_is, make_benchmark_problem, recover,
    sample_trajectory, solve_kkt, AdviceRegime, BenchmarkId, IHOCProblem, SolveReport,
};
use tgspec::quadrature::{benchmark_error, IntegralId, QuadratureSweepRow};
use tgspec::tgbasis::{build_grid, TGFamily, TGGrid, TGMap};
use tgspec::GegenbauerIndex;

const EXIT_INPUT: i32 = 2;
const EXIT_SOLVER: i32 = 3;

fn fail(code: i32, msg: String) -> ! {
    eprintln!("error: {msg}");
    exit(code)
}

#[derive(Parser)]
#[command(
    name = "tgspec",
    about = "Semi-infinite-domain spectral quadrature and output-feedback regulator solves"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a regulator problem and write trajectory.csv, report.txt,
    /// and the resolved problem.json to the output directory.
    Solve(SolveArgs),
    /// Run a quadrature error sweep over a parameter grid and write
    /// sweep.csv to the output directory.
    Sweep(SweepArgs),
    /// Print a recommended Gegenbauer index and map-scale range.
    Advise(AdviseArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    /// Rational map (t - L)/(t + L).
    Rg,
    /// Exponential map 1 - 2 exp(-t/L).
    Eg,
}

impl FamilyArg {
    fn family(self) -> TGFamily {
        match self {
            FamilyArg::Rg => TGFamily::Rational,
            FamilyArg::Eg => TGFamily::Exponential,
        }
    }

    fn label(self) -> &'static str {
        match self {
            FamilyArg::Rg => "rg",
            FamilyArg::Eg => "eg",
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    /// Modal (spectral) transcription; unknowns are expansion coefficients.
    Is,
    /// Nodal (pseudospectral) transcription; unknowns are grid values.
    Ips,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long, value_enum, default_value = "eg")]
    family: FamilyArg,
    /// Fixed Gegenbauer index.
    #[arg(long, conflicts_with = "alpha_schedule", allow_negative_numbers = true)]
    alpha: Option<f64>,
    /// Mesh-dependent index schedule `n:alpha,...` with strictly
    /// increasing n; a solve at mesh n uses the entry with the largest
    /// n not exceeding it.
    #[arg(long = "alpha-schedule")]
    alpha_schedule: Option<String>,
    /// Map scaling parameter.
    #[arg(long = "L", default_value_t = 1.0)]
    l: f64,
    /// Mesh size(s); with several values each solve goes to an `n<k>`
    /// subdirectory.
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<usize>,
    #[arg(long, value_enum, default_value = "is")]
    method: MethodArg,
    /// Problem file path or builtin id (`dcs`, `f16`).
    #[arg(long)]
    problem: String,
    /// Override the initial state, comma-separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    x0: Option<Vec<f64>>,
    /// Number of equally spaced trajectory samples.
    #[arg(long, default_value_t = 100)]
    samples: usize,
    /// Output directory (created if absent).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_enum, default_value = "eg")]
    family: FamilyArg,
    /// Benchmark integrals to run (i1, i2, i3).
    #[arg(long, value_delimiter = ',', required = true)]
    integrals: Vec<String>,
    #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
    alphas: Vec<f64>,
    #[arg(long = "Ls", value_delimiter = ',', required = true)]
    ls: Vec<f64>,
    #[arg(long, value_delimiter = ',', required = true)]
    ns: Vec<usize>,
    /// Output directory (created if absent).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum RegimeArg {
    /// L > 1: nodes spread outward.
    Stretching,
    /// L < 1: nodes clustered toward the origin.
    Contracting,
}

#[derive(Args)]
struct AdviseArgs {
    #[arg(long, value_enum, default_value = "eg")]
    family: FamilyArg,
    #[arg(long, value_enum)]
    regime: RegimeArg,
    #[arg(long)]
    n: usize,
}

/// On-disk problem description: row-major nested arrays. `D` is optional
/// (absent means no state equality constraint).
#[derive(Serialize, Deserialize)]
struct ProblemFile {
    #[serde(rename = "A")]
    a: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    b: Vec<Vec<f64>>,
    #[serde(rename = "C")]
    c: Vec<Vec<f64>>,
    #[serde(rename = "D", skip_serializing_if = "Option::is_none")]
    d: Option<Vec<Vec<f64>>>,
    #[serde(rename = "Q")]
    q: Vec<Vec<f64>>,
    #[serde(rename = "R")]
    r: Vec<Vec<f64>>,
    x0: Vec<f64>,
}

fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

fn from_rows(rows: &[Vec<f64>], name: &str) -> DMatrix<f64> {
    if rows.is_empty() {
        fail(EXIT_INPUT, format!("matrix {name} has no rows"));
    }
    let ncols = rows[0].len();
    if ncols == 0 || rows.iter().any(|r| r.len() != ncols) {
        fail(EXIT_INPUT, format!("matrix {name} rows have inconsistent lengths"));
    }
    DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j])
}

impl ProblemFile {
    fn from_problem(p: &IHOCProblem) -> Self {
        ProblemFile {
            a: to_rows(&p.a),
            b: to_rows(&p.b),
            c: to_rows(&p.c),
            d: if p.c1() > 0 { Some(to_rows(&p.d)) } else { None },
            q: to_rows(&p.q),
            r: to_rows(&p.r),
            x0: p.x0.iter().cloned().collect(),
        }
    }

    fn into_problem(self) -> IHOCProblem {
        let a = from_rows(&self.a, "A");
        let n_x = a.nrows();
        let d = match &self.d {
            Some(rows) => from_rows(rows, "D"),
            None => DMatrix::zeros(n_x, 0),
        };
        IHOCProblem::new(
            a,
            from_rows(&self.b, "B"),
            from_rows(&self.c, "C"),
            d,
            from_rows(&self.q, "Q"),
            from_rows(&self.r, "R"),
            DVector::from_vec(self.x0),
        )
        .unwrap_or_else(|e| fail(EXIT_INPUT, format!("invalid problem: {e}")))
    }
}

fn load_problem(spec: &str) -> IHOCProblem {
    if let Ok(id) = spec.parse::<BenchmarkId>() {
        return make_benchmark_problem(id);
    }
    let text = std::fs::read_to_string(spec)
        .unwrap_or_else(|e| fail(EXIT_INPUT, format!("cannot read problem file `{spec}`: {e}")));
    let file: ProblemFile = serde_json::from_str(&text)
        .unwrap_or_else(|e| fail(EXIT_INPUT, format!("cannot parse problem file `{spec}`: {e}")));
    file.into_problem()
}

/// Index schedule as sorted (n, alpha) pairs.
struct AlphaSchedule(Vec<(usize, f64)>);

impl AlphaSchedule {
    fn parse(args: &SolveArgs) -> Self {
        if let Some(a) = args.alpha {
            return AlphaSchedule(vec![(0, a)]);
        }
        let Some(text) = &args.alpha_schedule else {
            fail(EXIT_INPUT, "one of --alpha or --alpha-schedule is required".into());
        };
        let mut pairs = Vec::new();
        for item in text.split(',') {
            let Some((n, a)) = item.split_once(':') else {
                fail(EXIT_INPUT, format!("schedule entry `{item}` is not n:alpha"));
            };
            let n: usize = n
                .trim()
                .parse()
                .unwrap_or_else(|e| fail(EXIT_INPUT, format!("bad mesh size in `{item}`: {e}")));
            let a: f64 = a
                .trim()
                .parse()
                .unwrap_or_else(|e| fail(EXIT_INPUT, format!("bad index in `{item}`: {e}")));
            pairs.push((n, a));
        }
        if pairs.windows(2).any(|w| w[0].0 >= w[1].0) {
            fail(EXIT_INPUT, "schedule mesh sizes must be strictly increasing".into());
        }
        AlphaSchedule(pairs)
    }

    fn alpha_for(&self, n: usize) -> f64 {
        match self.0.iter().rev().find(|(entry, _)| *entry <= n) {
            Some((_, a)) => *a,
            None => fail(
                EXIT_INPUT,
                format!("schedule has no entry at or below mesh size {n}"),
            ),
        }
    }
}

fn make_grid(family: TGFamily, alpha: f64, l: f64, n: usize) -> TGGrid {
    let map = TGMap::new(family, l)
        .unwrap_or_else(|e| fail(EXIT_INPUT, format!("invalid map parameters: {e}")));
    let idx = GegenbauerIndex::new(alpha)
        .unwrap_or_else(|e| fail(EXIT_INPUT, format!("invalid index: {e}")));
    build_grid(map, idx, n).unwrap_or_else(|e| fail(EXIT_SOLVER, format!("grid build failed: {e}")))
}

fn write_file(path: &Path, contents: &str) {
    std::fs::write(path, contents)
        .unwrap_or_else(|e| fail(EXIT_INPUT, format!("cannot write {}: {e}", path.display())));
}

fn solve_one(problem: &IHOCProblem, grid: &TGGrid, method: MethodArg) -> SolveReport {
    let qp = match method {
        MethodArg::Is => assemble_is(problem, grid, grid.n() + 1, grid.n() + 1),
        MethodArg::Ips => assemble_ips(problem, grid),
    }
    .unwrap_or_else(|e| fail(EXIT_SOLVER, format!("assembly failed: {e}")));
    let kkt =
        solve_kkt(&qp).unwrap_or_else(|e| fail(EXIT_SOLVER, format!("KKT solve failed: {e}")));
    recover(problem, grid, &qp, &kkt)
        .unwrap_or_else(|e| fail(EXIT_SOLVER, format!("solution recovery failed: {e}")))
}

fn cmd_solve(args: SolveArgs) {
    if args.samples < 2 {
        fail(EXIT_INPUT, "--samples must be at least 2".into());
    }
    let mut problem = load_problem(&args.problem);
    if let Some(x0) = &args.x0 {
        problem = problem
            .with_initial_state(DVector::from_column_slice(x0))
            .unwrap_or_else(|e| fail(EXIT_INPUT, format!("bad --x0: {e}")));
    }
    let schedule = AlphaSchedule::parse(&args);
    std::fs::create_dir_all(&args.out)
        .unwrap_or_else(|e| fail(EXIT_INPUT, format!("cannot create output directory: {e}")));

    let json = serde_json::to_string_pretty(&ProblemFile::from_problem(&problem))
        .expect("problem serializes");
    write_file(&args.out.join("problem.json"), &(json + "\n"));

    for &n in &args.n {
        let dir = if args.n.len() > 1 {
            let d = args.out.join(format!("n{n}"));
            std::fs::create_dir_all(&d)
                .unwrap_or_else(|e| fail(EXIT_INPUT, format!("cannot create output directory: {e}")));
            d
        } else {
            args.out.clone()
        };
        let start = Instant::now();
        let grid = make_grid(args.family.family(), schedule.alpha_for(n), args.l, n);
        let report = solve_one(&problem, &grid, args.method);
        let elapsed = start.elapsed();

        let rows = sample_trajectory(&report, &grid, &problem, args.samples);
        let mut csv = String::from("t");
        for i in 1..=problem.n_x() {
            csv.push_str(&format!(",x{i}"));
        }
        for i in 1..=problem.n_u() {
            csv.push_str(&format!(",u{i}"));
        }
        for i in 1..=problem.n_y() {
            csv.push_str(&format!(",y{i}"));
        }
        csv.push('\n');
        for row in &rows {
            csv.push_str(&format!("{}", row.t));
            for v in row.x.iter().chain(&row.u).chain(&row.y) {
                csv.push_str(&format!(",{v}"));
            }
            csv.push('\n');
        }
        write_file(&dir.join("trajectory.csv"), &csv);

        let mut txt = String::new();
        txt.push_str(&format!("J_n = {:.6}\n", report.j_n));
        match &report.k_star {
            Some(g) => {
                txt.push_str("K* (row-major):\n");
                for i in 0..g.k.nrows() {
                    let row: Vec<String> =
                        (0..g.k.ncols()).map(|j| format!("{:.6}", g.k[(i, j)])).collect();
                    txt.push_str(&format!("  {}\n", row.join(" ")));
                }
                txt.push_str(&format!("gain residual = {:.6e}\n", g.residual));
            }
            None => txt.push_str("K* not identifiable (output trajectory is rank deficient)\n"),
        }
        let feas = report.feasibility.iter().cloned().fold(0.0f64, f64::max);
        txt.push_str(&format!("max feasibility error = {feas:.6e}\n"));
        txt.push_str(&format!("d_constraint_max = {:.6e}\n", report.d_constraint_max));
        txt.push_str(&format!("kkt_residual = {:.6e}\n", report.kkt_residual));
        txt.push_str(&format!("wall time = {:.3} s\n", elapsed.as_secs_f64()));
        write_file(&dir.join("report.txt"), &txt);
    }
}

fn parse_integral(s: &str) -> IntegralId {
    match s.trim().to_ascii_lowercase().as_str() {
        "i1" => IntegralId::I1,
        "i2" => IntegralId::I2,
        "i3" => IntegralId::I3,
        other => fail(EXIT_INPUT, format!("unknown integral id `{other}` (use i1, i2, i3)")),
    }
}

fn cmd_sweep(args: SweepArgs) {
    let integrals: Vec<IntegralId> = args.integrals.iter().map(|s| parse_integral(s)).collect();
    if integrals.is_empty() || args.alphas.is_empty() || args.ls.is_empty() || args.ns.is_empty() {
        fail(EXIT_INPUT, "all sweep grids must be nonempty".into());
    }
    // Tuples in deterministic grid order; evaluation order is free.
    let mut tuples = Vec::new();
    for &id in &integrals {
        for &alpha in &args.alphas {
            for &l in &args.ls {
                for &n in &args.ns {
                    tuples.push((id, alpha, l, n));
                }
            }
        }
    }
    let family = args.family.family();
    let rows: Vec<QuadratureSweepRow> = tuples
        .par_iter()
        .map(|&(id, alpha, l, n)| benchmark_error(id, family, alpha, l, n))
        .collect::<tgspec::Result<_>>()
        .unwrap_or_else(|e| fail(EXIT_SOLVER, format!("sweep evaluation failed: {e}")));

    std::fs::create_dir_all(&args.out)
        .unwrap_or_else(|e| fail(EXIT_INPUT, format!("cannot create output directory: {e}")));
    let path = args.out.join("sweep.csv");
    let file = std::fs::File::create(&path)
        .unwrap_or_else(|e| fail(EXIT_INPUT, format!("cannot write {}: {e}", path.display())));
    let mut out = std::io::BufWriter::new(file);
    let label = args.family.label();
    writeln!(out, "integral,family,alpha,L,n,max_abs_error,max_log_error").unwrap();
    for r in &rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.integral_id.label(),
            label,
            r.alpha,
            r.l,
            r.n,
            r.max_abs_error,
            r.max_log_error
        )
        .unwrap();
    }
    out.flush().unwrap();
}

fn cmd_advise(args: AdviseArgs) {
    let regime = match args.regime {
        RegimeArg::Stretching => AdviceRegime::Stretching,
        RegimeArg::Contracting => AdviceRegime::Contracting,
    };
    let advice = advise_parameters(args.family.family(), regime, args.n);
    println!(
        "alpha={} L_min={} L_max={}",
        advice.alpha, advice.l_range.0, advice.l_range.1
    );
}

fn main() {
    match Cli::parse().command {
        Command::Solve(args) => cmd_solve(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Advise(args) => cmd_advise(args),
    }
}
