mod manifest;

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand};
use serde_json::json;
use walkernel::bench::{run_benchmark, BenchMethod, BenchReport, BenchmarkPlan, CellStatus, Dataset};
use walkernel::graph::io::read_graph;
use walkernel::graph::{Graph, RngSeed};
use walkernel::kernels::{gram_matrix, psd_check, GraphKernel, KernelConfig, Measure, Method, PowerMode};
use walkernel::verify::{run_suite, SUITES};

use crate::manifest::{GraphFormat, Manifest, SetKind};

const EXIT_VERIFY_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;

/// Relative checksum spread above which a benchmark run is rejected.
const CHECKSUM_TOL: f64 = 1e-6;

#[derive(Debug)]
pub struct CliError {
    code: u8,
    msg: String,
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError { code: EXIT_USAGE, msg: msg.into() }
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::usage(format!("{}: {e}", path.display()))
    }
}

impl From<walkernel::Error> for CliError {
    fn from(e: walkernel::Error) -> Self {
        CliError::usage(e.to_string())
    }
}

#[derive(Parser, Debug)]
#[command(name = "walkernel", version, about = "Random-walk graph kernels: datasets, Gram matrices, timings and checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a seeded random graph dataset and its manifest.
    Generate(GenerateArgs),
    /// Compute the Gram matrix of a set of graphs.
    Gram(GramArgs),
    /// Time Gram-matrix computation per method and graph size.
    Bench(BenchArgs),
    /// Run named property suites.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
struct DatasetArgs {
    /// Dataset family: set1 (2^k vertices, sparse) or set2 (n vertices at given fills).
    #[arg(long, value_enum, default_value = "set1")]
    set: SetKind,
    /// Size exponents for set1.
    #[arg(long, value_delimiter = ',', default_values_t = [1u32, 2, 3, 4])]
    k: Vec<u32>,
    /// Vertex count for set2.
    #[arg(long, default_value_t = 32)]
    n: usize,
    /// Fill percentages for set2.
    #[arg(long, value_delimiter = ',', default_values_t = [10.0, 20.0, 30.0, 40.0, 50.0, 60.0, 70.0, 80.0, 90.0, 100.0])]
    fill: Vec<f64>,
    /// Graphs per size or fill.
    #[arg(long, default_value_t = 10)]
    count: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

impl DatasetArgs {
    fn dataset(&self) -> Dataset {
        match self.set {
            SetKind::Set1 => Dataset::Set1 { exponents: self.k.clone() },
            SetKind::Set2 => Dataset::Set2 { n: self.n, fills: self.fill.clone() },
        }
    }
}

#[derive(Args, Debug)]
struct KernelArgs {
    /// Decay factor of the walk series.
    #[arg(long, default_value_t = 0.001)]
    lambda: f64,
    /// Convergence tolerance of the iterative solvers.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Walk-length weighting: geometric or exponential.
    #[arg(long, default_value = "geometric")]
    measure: String,
    /// Power mode of the Cartesian kernels: even or all.
    #[arg(long, default_value = "even")]
    power_mode: String,
}

impl KernelArgs {
    fn config(&self, method: Method) -> Result<KernelConfig, CliError> {
        let measure: Measure = self.measure.parse()?;
        let cfg = KernelConfig { lambda: self.lambda, tol: self.tol, method, measure, ..KernelConfig::default() };
        cfg.validate()?;
        Ok(cfg)
    }

    fn power_mode(&self) -> Result<PowerMode, CliError> {
        Ok(self.power_mode.parse()?)
    }
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[command(flatten)]
    data: DatasetArgs,
    /// Regenerate the files listed in an existing manifest.
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: GraphFormat,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct GramArgs {
    /// Graph files (JSON or edge list).
    graphs: Vec<PathBuf>,
    /// Read the graph list from a manifest written by `generate`.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Kernel: random-walk, geometric, cartesian, cartesian-laplacian or composite.
    #[arg(long, default_value = "random-walk")]
    kernel: String,
    /// Solver: direct, sylvester, cg, fixed_point or spectral.
    #[arg(long, default_value = "fixed_point")]
    method: String,
    #[command(flatten)]
    kernel_args: KernelArgs,
    /// Exit with status 1 when the Gram matrix fails the PSD check.
    #[arg(long)]
    require_psd: bool,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[command(flatten)]
    data: DatasetArgs,
    /// Methods to time; `fixed_point_explicit` assembles the product matrix.
    #[arg(long, value_delimiter = ',', default_value = "direct,sylvester,cg,fixed_point")]
    method: Vec<String>,
    #[command(flatten)]
    kernel_args: KernelArgs,
    /// Repetitions per cell; the median is reported.
    #[arg(long, default_value_t = 3)]
    reps: usize,
    /// Per-repetition time limit; slower cells are excluded.
    #[arg(long)]
    timeout_secs: Option<f64>,
    /// Timing CSV path; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Path for the text summary; written next to the CSV by default.
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Suites to run; `all` or nothing runs every suite.
    suites: Vec<String>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Also write the reports as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| match cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Gram(a) => cmd_gram(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Verify(a) => cmd_verify(a),
    });
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.msg);
            ExitCode::from(e.code)
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("WALKERNEL_THREADS") else { return Ok(()) };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t >= 1)
        .ok_or_else(|| CliError::usage(format!("WALKERNEL_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::usage(format!("cannot configure thread pool: {e}")))
}

fn write_output(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::io(path, e)),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| CliError::usage(e.to_string())),
    }
}

fn cmd_generate(a: GenerateArgs) -> Result<u8, CliError> {
    let manifest = match &a.manifest {
        Some(path) => Manifest::read(path)?,
        None => {
            if a.data.count == 0 {
                return Err(CliError::usage("--count must be at least 1"));
            }
            Manifest::plan(a.data.set, &a.data.dataset(), a.data.count, RngSeed(a.data.seed), a.format)
        }
    };
    let path = manifest.write_all(&a.out)?;
    println!("wrote {} graphs and {}", manifest.graphs.len(), path.display());
    Ok(0)
}

fn load_graphs(a: &GramArgs) -> Result<(Vec<String>, Vec<Graph>), CliError> {
    let mut files: Vec<PathBuf> = a.graphs.clone();
    if let Some(m) = &a.manifest {
        let manifest = Manifest::read(m)?;
        let dir = m.parent().unwrap_or(Path::new("."));
        files.extend(manifest.graphs.iter().map(|e| dir.join(&e.file)));
    }
    if files.is_empty() {
        return Err(CliError::usage("no input graphs given"));
    }
    let mut ids = Vec::with_capacity(files.len());
    let mut graphs = Vec::with_capacity(files.len());
    for f in &files {
        graphs.push(read_graph(f)?);
        ids.push(f.file_stem().map_or_else(|| f.display().to_string(), |s| s.to_string_lossy().into_owned()));
    }
    Ok((ids, graphs))
}

fn cmd_gram(a: GramArgs) -> Result<u8, CliError> {
    let method: Method = a.method.parse()?;
    let cfg = a.kernel_args.config(method)?;
    let kernel = GraphKernel::parse(&a.kernel, a.kernel_args.power_mode()?)?;
    let (ids, graphs) = load_graphs(&a)?;
    let started = Instant::now();
    let gram = gram_matrix(&graphs, |g, h| kernel.evaluate(g, h, &cfg), true)
        .map_err(|e| match e {
            walkernel::Error::Pair { i, j, source } => {
                CliError::usage(format!("kernel failed on ({}, {}): {source}", ids[i], ids[j]))
            }
            other => other.into(),
        })?
        .with_ids(ids)?;
    let seconds = started.elapsed().as_secs_f64();
    let psd = psd_check(&gram)?;
    let header = json!({
        "format": "walkernel-gram",
        "version": 1,
        "kernel": kernel.name(),
        "method": method.name(),
        "measure": cfg.measure.name(),
        "power_mode": a.kernel_args.power_mode()?.name(),
        "lambda": cfg.lambda,
        "tol": cfg.tol,
        "size": gram.size(),
        "ids": gram.ids,
        "psd": psd,
        "seconds": seconds,
    });
    let mut text = format!("{header}\n---\n");
    for i in 0..gram.size() {
        let row: Vec<String> = (0..gram.size()).map(|j| format!("{:.17e}", gram.get(i, j))).collect();
        text.push_str(&row.join(" "));
        text.push('\n');
    }
    write_output(a.out.as_deref(), &text)?;
    let verdict = if psd.is_psd { "PSD" } else { "not PSD" };
    let report = format!(
        "{}x{} Gram matrix: {verdict} (min eigenvalue {:.6e}, trace {:.6e})",
        gram.size(),
        gram.size(),
        psd.min_eigenvalue,
        psd.trace
    );
    if a.out.is_some() {
        println!("{report}");
    } else {
        eprintln!("{report}");
    }
    Ok(if a.require_psd && !psd.is_psd { EXIT_VERIFY_FAILED } else { 0 })
}

fn timing_csv(report: &BenchReport) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::usage(e.to_string());
    w.write_record(["method", "n", "fill", "rep", "seconds", "checksum"]).map_err(err)?;
    let fill = |f: Option<f64>| f.map_or(String::new(), |f| f.to_string());
    for cell in &report.cells {
        match &cell.status {
            CellStatus::Measured { .. } => {
                for r in report.records.iter().filter(|r| r.method == cell.method && r.n == cell.n && r.fill == cell.fill) {
                    w.write_record([
                        r.method.name().to_string(),
                        r.n.to_string(),
                        fill(r.fill),
                        r.rep.to_string(),
                        format!("{:.9}", r.seconds),
                        format!("{:.17e}", r.checksum),
                    ])
                    .map_err(err)?;
                }
            }
            CellStatus::Excluded(_) => {
                w.write_record([cell.method.name().to_string(), cell.n.to_string(), fill(cell.fill), "excluded".into(), String::new(), String::new()])
                    .map_err(err)?;
            }
        }
    }
    let bytes = w.into_inner().map_err(|e| CliError::usage(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn cmd_bench(a: BenchArgs) -> Result<u8, CliError> {
    let methods = a.method.iter().map(|m| m.parse::<BenchMethod>()).collect::<Result<Vec<_>, _>>()?;
    let timeout = match a.timeout_secs {
        Some(t) if t > 0.0 && t.is_finite() => Some(Duration::from_secs_f64(t)),
        Some(t) => return Err(CliError::usage(format!("--timeout-secs must be positive, got {t}"))),
        None => None,
    };
    let plan = BenchmarkPlan {
        dataset: a.data.dataset(),
        graphs_per_cell: a.data.count,
        methods,
        config: a.kernel_args.config(Method::FixedPoint)?,
        reps: a.reps,
        timeout,
        seed: RngSeed(a.data.seed),
    };
    let report = run_benchmark(&plan)?;
    write_output(a.out.as_deref(), &timing_csv(&report)?)?;
    let summary = report.summary();
    let summary_path = a.summary.clone().or_else(|| a.out.as_ref().map(|p| p.with_extension("summary.txt")));
    match &summary_path {
        Some(p) => {
            std::fs::write(p, &summary).map_err(|e| CliError::io(p, e))?;
            eprint!("{summary}");
        }
        None => eprint!("{summary}"),
    }
    let spread = report.checksum_spread();
    if spread > CHECKSUM_TOL {
        eprintln!("checksums disagree across methods: relative spread {spread:.3e} exceeds {CHECKSUM_TOL:e}");
        return Ok(EXIT_VERIFY_FAILED);
    }
    Ok(0)
}

fn cmd_verify(a: VerifyArgs) -> Result<u8, CliError> {
    let names: Vec<String> = if a.suites.is_empty() || a.suites.iter().any(|s| s == "all") {
        SUITES.iter().map(|s| s.to_string()).collect()
    } else {
        a.suites.clone()
    };
    for n in &names {
        if !SUITES.contains(&n.as_str()) {
            return Err(CliError::usage(format!("unknown suite {n:?}, expected one of: {}", SUITES.join(", "))));
        }
    }
    let seed = RngSeed(a.seed);
    let mut reports = Vec::new();
    let mut text = String::new();
    for name in &names {
        let report = match run_suite(name, seed) {
            Ok(r) => r,
            Err(e) => {
                let _ = writeln!(text, "FAIL {name}: aborted: {e} (seed {})", seed.0);
                reports.push(json!({"suite": name, "seed": seed.0, "passed": false, "error": e.to_string()}));
                continue;
            }
        };
        let status = if report.passed() { "PASS" } else { "FAIL" };
        let _ = writeln!(
            text,
            "{status} {name}: {} cases, max error {:.3e}, seed {}",
            report.cases, report.max_error, report.seed
        );
        for note in &report.notes {
            let _ = writeln!(text, "    {note}");
        }
        for f in &report.failures {
            let _ = writeln!(text, "    failure: {f}");
        }
        let mut v = serde_json::to_value(&report).expect("report serializes");
        v["passed"] = json!(report.passed());
        reports.push(v);
    }
    print!("{text}");
    if let Some(path) = &a.out {
        let doc = serde_json::to_string_pretty(&reports).expect("reports serialize");
        std::fs::write(path, doc + "\n").map_err(|e| CliError::io(path, e))?;
    }
    let failed = reports.iter().any(|r| r["passed"] != json!(true));
    Ok(if failed { EXIT_VERIFY_FAILED } else { 0 })
}
