//! Timing harness for Gram-matrix computation over generated datasets.

use std::fmt::{self, Write as _};
use std::str::FromStr;
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::graph::{direct_product, random_graph_set1, random_graph_set2, Graph, RngSeed};
use crate::kernels::{random_walk_kernel, KernelConfig, KernelResult, Method, DIRECT_MAX_DIM};
use crate::linalg::{dot, fixed_point_solve};

/// A timed computation: one of the kernel solvers, or fixed-point
/// iteration on the explicitly assembled product weight matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BenchMethod {
    Kernel(Method),
    ExplicitFixedPoint,
}

impl BenchMethod {
    pub fn name(self) -> &'static str {
        match self {
            BenchMethod::Kernel(m) => m.name(),
            BenchMethod::ExplicitFixedPoint => "fixed_point_explicit",
        }
    }

    /// Random-walk kernel value of one pair.
    pub fn evaluate(self, g: &Graph, h: &Graph, cfg: &KernelConfig) -> Result<f64> {
        match self {
            BenchMethod::Kernel(m) => random_walk_kernel(g, h, &cfg.clone().with_method(m)).map(|r| r.value),
            BenchMethod::ExplicitFixedPoint => explicit_fixed_point_kernel(g, h, cfg).map(|r| r.value),
        }
    }
}

impl fmt::Display for BenchMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BenchMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fixed_point_explicit" | "explicit" => Ok(BenchMethod::ExplicitFixedPoint),
            _ => s.parse().map(BenchMethod::Kernel),
        }
    }
}

/// Fixed-point random-walk kernel with the product weight matrix
/// assembled as an explicit sparse matrix and applied by ordinary mat-vecs.
pub fn explicit_fixed_point_kernel(g: &Graph, h: &Graph, cfg: &KernelConfig) -> Result<KernelResult> {
    cfg.validate()?;
    let started = Instant::now();
    let prod = direct_product(g, h, cfg.degree_normalize)?;
    let w = prod.weight_matrix();
    let rep = fixed_point_solve(&w, prod.start(), cfg.lambda, cfg.tol, cfg.max_iter)?;
    Ok(KernelResult {
        value: dot(prod.stop(), &rep.solution),
        method: Method::FixedPoint,
        iterations: rep.iterations,
        residual: rep.residual_norm,
        converged: rep.converged,
        wall_time: started.elapsed(),
    })
}

/// Which generated graphs a benchmark runs on.
#[derive(Clone, Debug, PartialEq)]
pub enum Dataset {
    /// Sparse graphs on `2^k` vertices for each exponent.
    Set1 { exponents: Vec<u32> },
    /// Graphs on `n` vertices at each fill percentage.
    Set2 { n: usize, fills: Vec<f64> },
}

/// Graphs of one dataset cell with their generator seeds.
#[derive(Clone, Debug)]
pub struct DatasetCell {
    pub n: usize,
    pub fill: Option<f64>,
    pub graphs: Vec<(RngSeed, Graph)>,
}

impl Dataset {
    pub fn cells(&self) -> Vec<(usize, Option<f64>)> {
        match self {
            Dataset::Set1 { exponents } => exponents.iter().map(|&k| (1usize << k, None)).collect(),
            Dataset::Set2 { n, fills } => fills.iter().map(|&f| (*n, Some(f))).collect(),
        }
    }

    /// Generates `per_cell` graphs for every cell. Graph `i` of the cell
    /// at position `c` uses seed `seed.derive(c).derive(i)`.
    pub fn generate(&self, per_cell: usize, seed: RngSeed) -> Result<Vec<DatasetCell>> {
        let mut out = Vec::new();
        for (c, (n, fill)) in self.cells().into_iter().enumerate() {
            let cell_seed = seed.derive(c as u64);
            let graphs = (0..per_cell as u64)
                .map(|i| {
                    let s = cell_seed.derive(i);
                    let g = match (self, fill) {
                        (Dataset::Set1 { .. }, _) => random_graph_set1(n.trailing_zeros(), s)?,
                        (Dataset::Set2 { .. }, Some(f)) => random_graph_set2(n, f, s)?,
                        (Dataset::Set2 { .. }, None) => unreachable!("set 2 cells carry a fill"),
                    };
                    Ok((s, g))
                })
                .collect::<Result<Vec<_>>>()?;
            out.push(DatasetCell { n, fill, graphs });
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchmarkPlan {
    pub dataset: Dataset,
    pub graphs_per_cell: usize,
    pub methods: Vec<BenchMethod>,
    pub config: KernelConfig,
    pub reps: usize,
    /// Wall-time limit per repetition of a cell.
    pub timeout: Option<Duration>,
    pub seed: RngSeed,
}

impl BenchmarkPlan {
    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::InvalidArgument("repetitions must be at least 1".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::InvalidArgument("benchmark needs at least one method".into()));
        }
        if self.graphs_per_cell == 0 {
            return Err(Error::InvalidArgument("benchmark needs at least one graph per cell".into()));
        }
        if self.dataset.cells().is_empty() {
            return Err(Error::InvalidArgument("dataset has no cells".into()));
        }
        self.config.validate()
    }
}

/// One timed repetition of one cell.
#[derive(Clone, Debug, PartialEq)]
pub struct TimingRecord {
    pub method: BenchMethod,
    pub n: usize,
    pub fill: Option<f64>,
    pub rep: usize,
    pub seconds: f64,
    /// Sum of all Gram-matrix entries.
    pub checksum: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum CellStatus {
    Measured { median_seconds: f64, checksum: f64 },
    /// Left out of slope fits, with the reason.
    Excluded(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct CellResult {
    pub method: BenchMethod,
    pub n: usize,
    pub fill: Option<f64>,
    pub status: CellStatus,
}

impl CellResult {
    pub fn median_seconds(&self) -> Option<f64> {
        match self.status {
            CellStatus::Measured { median_seconds, .. } => Some(median_seconds),
            CellStatus::Excluded(_) => None,
        }
    }

    pub fn checksum(&self) -> Option<f64> {
        match self.status {
            CellStatus::Measured { checksum, .. } => Some(checksum),
            CellStatus::Excluded(_) => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchReport {
    pub records: Vec<TimingRecord>,
    /// Every planned `(method, cell)` pair, in plan order.
    pub cells: Vec<CellResult>,
}

/// Least-squares slope of `ln y` against `ln x`; `None` with fewer than two
/// points.
pub fn log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let k = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / k;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

fn median(xs: &mut [f64]) -> f64 {
    xs.sort_by(f64::total_cmp);
    let m = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[m]
    } else {
        (xs[m - 1] + xs[m]) / 2.0
    }
}

/// Gram checksum of one repetition, or why it was abandoned.
fn timed_gram(
    method: BenchMethod,
    graphs: &[Graph],
    cfg: &KernelConfig,
    deadline: Option<Duration>,
) -> std::result::Result<(f64, f64), String> {
    let started = Instant::now();
    let mut checksum = 0.0;
    for i in 0..graphs.len() {
        for j in i..graphs.len() {
            let v = method.evaluate(&graphs[i], &graphs[j], cfg).map_err(|e| format!("pair ({i}, {j}): {e}"))?;
            checksum += if i == j { v } else { 2.0 * v };
            if let Some(limit) = deadline {
                if started.elapsed() > limit {
                    return Err(format!("timeout after {:.3}s", started.elapsed().as_secs_f64()));
                }
            }
        }
    }
    Ok((started.elapsed().as_secs_f64(), checksum))
}

/// Runs every `(method, cell)` pair sequentially. A cell is excluded when
/// a repetition exceeds the timeout or fails, when the direct method would
/// exceed its size limit, or when a smaller cell of the same method was
/// already excluded. One untimed pair evaluation precedes each cell.
pub fn run_benchmark(plan: &BenchmarkPlan) -> Result<BenchReport> {
    plan.validate()?;
    let data = plan.dataset.generate(plan.graphs_per_cell, plan.seed)?;
    let mut records = Vec::new();
    let mut cells = Vec::new();
    for &method in &plan.methods {
        let mut blocked: Option<String> = None;
        for cell in &data {
            let graphs: Vec<Graph> = cell.graphs.iter().map(|(_, g)| g.clone()).collect();
            let too_large = method == BenchMethod::Kernel(Method::Direct) && cell.n * cell.n > DIRECT_MAX_DIM;
            let status = if let Some(reason) = &blocked {
                CellStatus::Excluded(format!("smaller size already excluded ({reason})"))
            } else if too_large {
                CellStatus::Excluded(format!("product system exceeds {DIRECT_MAX_DIM} unknowns"))
            } else {
                let _ = method.evaluate(&graphs[0], &graphs[0], &plan.config);
                let mut times = Vec::with_capacity(plan.reps);
                let mut status = None;
                let mut checksum = 0.0;
                for rep in 0..plan.reps {
                    match timed_gram(method, &graphs, &plan.config, plan.timeout) {
                        Ok((seconds, c)) => {
                            records.push(TimingRecord { method, n: cell.n, fill: cell.fill, rep, seconds, checksum: c });
                            times.push(seconds);
                            checksum = c;
                        }
                        Err(reason) => {
                            records.retain(|r| !(r.method == method && r.n == cell.n && r.fill == cell.fill));
                            status = Some(CellStatus::Excluded(reason));
                            break;
                        }
                    }
                }
                status.unwrap_or_else(|| CellStatus::Measured { median_seconds: median(&mut times), checksum })
            };
            if let CellStatus::Excluded(reason) = &status {
                if plan.dataset.cells().iter().all(|c| c.1.is_none()) {
                    blocked.get_or_insert_with(|| reason.clone());
                }
            }
            cells.push(CellResult { method, n: cell.n, fill: cell.fill, status });
        }
    }
    Ok(BenchReport { records, cells })
}

impl BenchReport {
    pub fn cells_of(&self, method: BenchMethod) -> impl Iterator<Item = &CellResult> {
        self.cells.iter().filter(move |c| c.method == method)
    }

    /// Log-log slope of median time against `n` over the measured cells
    /// of `method` with `n` in `range`.
    pub fn slope(&self, method: BenchMethod, range: std::ops::RangeInclusive<usize>) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self
            .cells_of(method)
            .filter(|c| range.contains(&c.n))
            .filter_map(|c| c.median_seconds().map(|t| (c.n as f64, t)))
            .collect();
        log_log_slope(&pts)
    }

    pub fn median(&self, method: BenchMethod, n: usize, fill: Option<f64>) -> Option<f64> {
        self.cells_of(method).find(|c| c.n == n && c.fill == fill).and_then(CellResult::median_seconds)
    }

    /// Largest relative checksum deviation between methods on a common cell.
    pub fn checksum_spread(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for c in &self.cells {
            let Some(reference) = c.checksum() else { continue };
            for d in self.cells.iter().filter(|d| d.n == c.n && d.fill == c.fill) {
                if let Some(x) = d.checksum() {
                    worst = worst.max((x - reference).abs() / reference.abs().max(f64::MIN_POSITIVE));
                }
            }
        }
        worst
    }

    /// Plain-text summary: per-cell medians, slopes and the explicit versus
    /// vec-trick comparison.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        let mut methods: Vec<BenchMethod> = Vec::new();
        for c in &self.cells {
            if !methods.contains(&c.method) {
                methods.push(c.method);
            }
        }
        let _ = writeln!(out, "{:<22} {:>7} {:>7} {:>14}  status", "method", "n", "fill", "median_s");
        for c in &self.cells {
            let fill = c.fill.map_or("-".to_string(), |f| format!("{f}"));
            match &c.status {
                CellStatus::Measured { median_seconds, .. } => {
                    let _ = writeln!(out, "{:<22} {:>7} {:>7} {:>14.6e}  measured", c.method.name(), c.n, fill, median_seconds);
                }
                CellStatus::Excluded(reason) => {
                    let _ = writeln!(out, "{:<22} {:>7} {:>7} {:>14}  excluded: {reason}", c.method.name(), c.n, fill, "-");
                }
            }
        }
        if self.cells.iter().all(|c| c.fill.is_none()) {
            let _ = writeln!(out, "\nlog-log slope of median time against n:");
            for &m in &methods {
                match self.slope(m, 0..=usize::MAX) {
                    Some(s) => {
                        let _ = writeln!(out, "  {:<22} {s:.3}", m.name());
                    }
                    None => {
                        let _ = writeln!(out, "  {:<22} n/a (fewer than two measured sizes)", m.name());
                    }
                }
            }
        }
        let vec_trick = BenchMethod::Kernel(Method::FixedPoint);
        if methods.contains(&vec_trick) && methods.contains(&BenchMethod::ExplicitFixedPoint) {
            let _ = writeln!(out, "\nexplicit product vs vec-trick (fixed point):");
            for c in self.cells_of(vec_trick) {
                if let (Some(v), Some(e)) = (c.median_seconds(), self.median(BenchMethod::ExplicitFixedPoint, c.n, c.fill)) {
                    let _ = writeln!(out, "  n={:<6} speedup {:.2}x", c.n, e / v);
                }
            }
        }
        let _ = writeln!(out, "\nmax relative checksum spread across methods: {:.3e}", self.checksum_spread());
        out
    }
}
