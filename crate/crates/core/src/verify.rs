//! Named randomized property suites.
//!
//! Every suite draws its inputs from a single [`RngSeed`]; case `i` uses
//! `seed.derive(i)`, so a failure can be replayed by rerunning the suite
//! with the reported seed.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{
    cartesian_product, direct_product, laplacian, normalized_adjacency, random_graph_set2, transition_matrix,
    CartesianWeight, EdgeLabels, Graph, RngSeed,
};
use crate::kernels::{
    assignment_psd_counterexample, cartesian_walk_kernel, diffusion_vertex_kernel, walk_count_kernel,
    geometric_kernel, gram_matrix, marginalized_kernel, psd_check, random_walk_kernel, regularized_laplacian_transform,
    spectral_kernel_family, truncated_walk_kernel, walk_series_terms, GramMatrix, KernelConfig, Measure, Method,
    PowerMode,
};
use crate::linalg::{
    dense_solve, dot, hadamard, kron, matrix_exp_oracle, max_abs_diff, vec, DenseMatrix, FeatureMatrix,
};
use crate::semiring::{check_axioms, check_morphism, pushthrough_mat_mat, pushthrough_mat_vec, Semiring, SemiringMatrix};
use crate::transducer::{rational_kernel, rw_equivalence_check, Transition, WeightedTransducer};

pub const SUITES: [&str; 12] = [
    "lemma2",
    "cross-method",
    "psd",
    "semiring-axioms",
    "transducer-equivalence",
    "diffusion-deficiency",
    "assignment-npsd",
    "walk-count",
    "geometric",
    "cartesian-binomial",
    "marginalized",
    "kronecker-identities",
];

/// Outcome of one suite.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub cases: usize,
    /// Largest error observed, in the units of each check.
    pub max_error: f64,
    pub failures: Vec<String>,
    /// Informational lines, such as a counterexample found.
    pub notes: Vec<String>,
}

impl SuiteReport {
    fn new(suite: &str, seed: RngSeed) -> Self {
        Self { suite: suite.to_string(), seed: seed.0, cases: 0, max_error: 0.0, failures: Vec::new(), notes: Vec::new() }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    fn check(&mut self, what: impl FnOnce() -> String, error: f64, tol: f64) {
        if error.is_nan() || error > tol {
            self.failures.push(format!("{}: error {error:e} exceeds {tol:e}", what()));
        }
        if error > self.max_error {
            self.max_error = error;
        }
    }

    fn fail(&mut self, msg: String) {
        self.failures.push(msg);
    }
}

/// Runs the suite called `name`.
pub fn run_suite(name: &str, seed: RngSeed) -> Result<SuiteReport> {
    let mut r = SuiteReport::new(name, seed);
    match name {
        "lemma2" => walk_powers(&mut r, seed)?,
        "cross-method" => cross_method(&mut r, seed)?,
        "psd" => psd(&mut r, seed)?,
        "semiring-axioms" => semiring_axioms(&mut r, seed)?,
        "transducer-equivalence" => transducer_equivalence(&mut r, seed)?,
        "diffusion-deficiency" => diffusion_deficiency(&mut r, seed)?,
        "assignment-npsd" => assignment_npsd(&mut r, seed),
        "walk-count" => walk_count(&mut r, seed)?,
        "geometric" => geometric(&mut r, seed)?,
        "cartesian-binomial" => cartesian_binomial(&mut r, seed)?,
        "marginalized" => marginalized(&mut r, seed)?,
        "kronecker-identities" => kronecker_identities(&mut r, seed)?,
        _ => {
            return Err(Error::InvalidArgument(format!(
                "unknown suite {name:?}, expected one of {}",
                SUITES.join(", ")
            )))
        }
    }
    Ok(r)
}

/// Runs every suite; a suite that errors out is reported as failed.
pub fn run_all(seed: RngSeed) -> Vec<SuiteReport> {
    SUITES
        .iter()
        .map(|name| {
            run_suite(name, seed).unwrap_or_else(|e| {
                let mut r = SuiteReport::new(name, seed);
                r.fail(format!("suite aborted: {e}"));
                r
            })
        })
        .collect()
}

fn case_tag(suite_seed: RngSeed, i: u64) -> String {
    format!("case {i} (seed {})", suite_seed.derive(i).0)
}

/// A connected undirected graph on `n_min..=n_max` vertices, with random
/// discrete labels from `0..labels` when `labels > 0`.
fn random_graph(rng: &mut ChaCha8Rng, n_min: usize, n_max: usize, labels: usize) -> Result<Graph> {
    let n = rng.gen_range(n_min..=n_max);
    let tree = if n > 1 { 200.0 * (n - 1) as f64 / (n * n) as f64 } else { 100.0 };
    let fill = rng.gen_range(tree..=100.0f64.max(tree)).min(tree + 50.0);
    let g = random_graph_set2(n, fill, RngSeed(rng.gen()))?;
    if labels == 0 {
        return Ok(g);
    }
    let edges: Vec<(usize, usize, usize)> =
        g.edges().iter().map(|e| (e.source, e.target, rng.gen_range(0..labels))).collect();
    Graph::undirected_labeled(n, labels, &edges)
}

fn random_vec(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(lo..hi)).collect()
}

fn random_dense(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols, |_, _| rng.gen_range(-1.0..1.0))
}

fn random_feature(rng: &mut ChaCha8Rng, rows: usize, cols: usize, dim: usize) -> FeatureMatrix {
    FeatureMatrix::from_fn(rows, cols, dim, |_, _, _| rng.gen_range(-1.0..1.0))
}

fn mat_pow_vec(a: &DenseMatrix, x: &[f64], k: usize) -> Result<Vec<f64>> {
    let mut v = x.to_vec();
    for _ in 0..k {
        v = a.mul_vec(&v)?;
    }
    Ok(v)
}

/// `vec(u vᵀ)` with `u` of length `n′`: entry `i·n′ + i′` is `v_i u_i′`.
fn vec_outer(u: &[f64], v: &[f64]) -> Vec<f64> {
    v.iter().flat_map(|&a| u.iter().map(move |&b| a * b)).collect()
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn walk_powers(r: &mut SuiteReport, seed: RngSeed) -> Result<()> {
    for c in 0..100 {
        let mut rng = seed.derive(c).rng();
        let (g, h) = (random_graph(&mut rng, 1, 10, 0)?, random_graph(&mut rng, 1, 10, 0)?);
        let (n, m) = (g.num_vertices(), h.num_vertices());
        let (a, b) = (transition_matrix(&g).to_dense(), transition_matrix(&h).to_dense());
        let (p, pp) = (random_vec(&mut rng, n, 0.0, 1.0), random_vec(&mut rng, m, 0.0, 1.0));
        let (q, qp) = (random_vec(&mut rng, n, 0.0, 1.0), random_vec(&mut rng, m, 0.0, 1.0));
        let prod = direct_product(&g, &h, true)?.with_distributions(&p, &pp, &q, &qp)?;
        let terms = walk_series_terms(&prod, 5);
        let mut x = prod.start().to_vec();
        for k in 0..=5 {
            if k > 0 {
                x = prod.apply_weight(&x)?;
            }
            let (ak, bk) = (mat_pow_vec(&a, &p, k)?, mat_pow_vec(&b, &pp, k)?);
            let expected = vec_outer(&bk, &ak);
            r.check(|| format!("{} k={k}: W^k p vs vec[A'^k p' (A^k p)^T]", case_tag(seed, c)), max_abs_diff(&x, &expected), 1e-10);
            let factored = dot(&q, &ak) * dot(&qp, &bk);
            r.check(|| format!("{} k={k}: series term factorization", case_tag(seed, c)), (terms[k] - factored).abs(), 1e-10);
        }
        r.cases += 1;
    }
    Ok(())
}

fn cross_method(r: &mut SuiteReport, seed: RngSeed) -> Result<()> {
    for c in 0..30 {
        let mut rng = seed.derive(c).rng();
        let labels = if c % 3 == 2 { 3 } else { 0 };
        let (g, h) = (random_graph(&mut rng, 2, 16, labels)?, random_graph(&mut rng, 2, 16, labels)?);
        let lambda = [0.001, 0.05, 0.3][c as usize % 3];
        let base = KernelConfig { lambda, tol: 1e-10, ..KernelConfig::default() };
        let direct = random_walk_kernel(&g, &h, &base.clone().with_method(Method::Direct))?.value;
        for method in [Method::Sylvester, Method::Cg, Method::FixedPoint, Method::Spectral] {
            if method == Method::Spectral && labels > 0 {
                continue;
            }
            match random_walk_kernel(&g, &h, &base.clone().with_method(method)) {
                Ok(v) => r.check(
                    || format!("{} lambda={lambda}: direct vs {method}", case_tag(seed, c)),
                    (v.value - direct).abs() / (1.0 + direct.abs()),
                    1e-6,
                ),
                Err(e) => r.fail(format!("{} lambda={lambda}: {method} failed: {e}", case_tag(seed, c))),
            }
        }
        r.cases += 1;
    }
    Ok(())
}

fn record_psd(r: &mut SuiteReport, name: &str, gram: &GramMatrix) -> Result<()> {
    let rep = psd_check(gram)?;
    r.notes.push(format!("{name}: min eigenvalue {:e}, trace {:e}", rep.min_eigenvalue, rep.trace));
    if !rep.is_psd {
        r.fail(format!("{name}: min eigenvalue {:e} below -1e-8 * trace {:e}", rep.min_eigenvalue, rep.trace));
    }
    r.cases += 1;
    Ok(())
}

/// A random real-valued transducer over `{0, 1}` and its Log-semiring copy.
fn random_transducer(rng: &mut ChaCha8Rng, semiring: Semiring) -> Result<WeightedTransducer> {
    let states = rng.gen_range(1..=3);
    let mut transitions = Vec::new();
    for src in 0..states {
        for dst in 0..states {
            for input in 0..2 {
                for output in 0..2 {
                    if rng.gen_bool(0.6) {
                        let w: f64 = rng.gen_range(0.1..1.0);
                        let weight = if semiring == Semiring::Logarithmic { w.ln() } else { w };
                        transitions.push(Transition { src, input, output, dst, weight });
                    }
                }
            }
        }
    }
    let mut dist = || {
        (0..states)
            .map(|_| {
                let w: f64 = rng.gen_range(0.1..1.0);
                if semiring == Semiring::Logarithmic {
                    w.ln()
                } else {
                    w
                }
            })
            .collect::<Vec<_>>()
    };
    let (p, q) = (dist(), dist());
    WeightedTransducer::new(semiring, states, 2, transitions, p, q)
}

fn psd(r: &mut SuiteReport, seed: RngSeed) -> Result<()> {
    let mut rng = seed.rng();
    let graphs = (0..10).map(|_| random_graph(&mut rng, 2, 12, 0)).collect::<Result<Vec<_>>>()?;
    let cfg = KernelConfig { lambda: 0.1, tol: 1e-10, ..KernelConfig::default() };
    let rw = gram_matrix(&graphs, |a, b| random_walk_kernel(a, b, &cfg).map(|v| v.value), true)?;
    record_psd(r, "random-walk", &rw)?;
    let geo = gram_matrix(&graphs, |a, b| geometric_kernel(a, b, 0.5), true)?;
    record_psd(r, "geometric", &geo)?;
    let ccfg = KernelConfig { lambda: 0.05, ..cfg.clone() };
    let cart = gram_matrix(
        &graphs,
        |a, b| cartesian_walk_kernel(a, b, &ccfg, CartesianWeight::Adjacency, PowerMode::Even).map(|v| v.value),
        true,
    )?;
    record_psd(r, "cartesian-even", &cart)?;

    for semiring in [Semiring::Real, Semiring::Logarithmic] {
        let t = random_transducer(&mut rng, semiring)?;
        let st = t.compose(&t.inverse())?;
        let psi = semiring.morphism().expect("real and log semirings carry morphisms");
        let strings: Vec<Vec<usize>> = (0..10)
            .map(|_| (0..rng.gen_range(0..=3)).map(|_| rng.gen_range(0..2)).collect())
            .collect();
        let gram = gram_matrix(&strings, |a, b| rational_kernel(&st, a, b, &psi), false)?;
        record_psd(r, &format!("rational T∘T⁻¹ ({semiring})"), &gram)?;
    }

    for (i, g) in graphs.iter().enumerate().take(3) {
        let k = diffusion_vertex_kernel(g, 0.7)?;
        let gram = GramMatrix { ids: (0..k.rows()).map(|v| v.to_string()).collect(), values: k.clone() };
        record_psd(r, &format!("diffusion graph {i}"), &gram)?;
        let row_err = (0..k.rows()).map(|v| (k.row(v).iter().sum::<f64>() - 1.0).abs()).fold(0.0, f64::max);
        r.check(|| format!("diffusion graph {i}: row sums"), row_err, 1e-9);
        let s = spectral_kernel_family(g, regularized_laplacian_transform(1.0))?;
        let gram = GramMatrix { ids: (0..s.rows()).map(|v| v.to_string()).collect(), values: s };
        record_psd(r, &format!("regularized Laplacian graph {i}"), &gram)?;
    }
    Ok(())
}

fn semiring_axioms(r: &mut SuiteReport, seed: RngSeed) -> Result<()> {
    for (i, s) in Semiring::ALL.into_iter().enumerate() {
        let rep = check_axioms(s, 1000, seed.derive(i as u64));
        r.failures.extend(rep.failures.iter().map(|f| format!("{s}: {f}")));
        r.cases += 1;
        if s.morphism().is_some() {
            let rep = check_morphism(s, 1000, seed.derive(100 + i as u64))?;
            r.failures.extend(rep.failures.iter().map(|f| format!("{s} morphism: {f}")));
            r.cases += 1;
        }
    }
    let mut rng = seed.derive(1000).rng();
    for c in 0..50 {
        let (n, m, k) = (rng.gen_range(1..=5), rng.gen_range(1..=5), rng.gen_range(1..=5));
        let log = Semiring::Logarithmic;
        let mut draw = |len: usize| -> Vec<f64> {
            (0..len).map(|_| if rng.gen_bool(0.1) { f64::NEG_INFINITY } else { rng.gen_range(-20.0..20.0) }).collect()
        };
        let a = SemiringMatrix::new(log, n, m, draw(n * m))?;
        let b = SemiringMatrix::new(log, m, k, draw(m * k))?;
        let x = draw(m);
        if !pushthrough_mat_vec(&a, &x, 1e-9)? {
            r.fail(format!("log push-through of a mat-vec, draw {c}"));
        }
        if !pushthrough_mat_mat(&a, &b, 1e-9)? {
            r.fail(format!("log push-through of a mat-mat, draw {c}"));
        }
        r.cases += 1;
    }
    Ok(())
}

fn transducer_equivalence(r: &mut SuiteReport, seed: RngSeed) -> Result<()> {
    for c in 0..20 {
        let mut rng = seed.derive(c).rng();
        let (g, h) = (random_graph(&mut rng, 1, 16, 0)?, random_graph(&mut rng, 1, 16, 0)?);
        let rep = rw_equivalence_check(&g, &h, 10)?;
        r.check(|| format!("{}: composed automaton vs Kronecker powers", case_tag(seed, c)), rep.max_abs_diff, 1e-10);
        let prod = direct_product(&g, &h, true)?;
        let lazy = walk_series_terms(&prod, 10);
        r.check(
            || format!("{}: composed automaton vs lazy product terms", case_tag(seed, c)),
            max_abs_diff(&rep.transducer_terms, &lazy[1..]),
            1e-10,
        );
        r.cases += 1;
    }
    Ok(())
}

fn diffusion_deficiency(r: &mut SuiteReport, seed: RngSeed) -> Result<()> {
    for c in 0..30 {
        let mut rng = seed.derive(c).rng();
        let (g, h) = (random_graph(&mut rng, 1, 8, 0)?, random_graph(&mut rng, 1, 8, 0)?);
        let prod = cartesian_product(&g, &h, CartesianWeight::Laplacian)?;
        let terms = walk_series_terms(&prod, 6);
        for (k, t) in terms.iter().enumerate().skip(1) {
            r.check(|| format!("{} k={k}: uniform Laplacian term", case_tag(seed, c)), t.abs(), 1e-12);
        }
        let cfg = KernelConfig { lambda: 1e-4, method: Method::FixedPoint, tol: 1e-12, ..KernelConfig::default() };
        let v = cartesian_walk_kernel(&g, &h, &cfg, CartesianWeight::Laplacian, PowerMode::All)?.value;
        r.check(|| format!("{}: Laplacian Cartesian kernel", case_tag(seed, c)), v.abs(), 1e-12);
        r.cases += 1;
    }
    r.notes.push("Laplacian-weight Cartesian kernel with uniform distributions is identically zero".into());
    Ok(())
}

fn assignment_npsd(r: &mut SuiteReport, seed: RngSeed) {
    match assignment_psd_counterexample(seed) {
        Ok(ce) => {
            r.cases = ce.attempts;
            r.notes.push(format!(
                "Gaussian base kernel (sigma = {}), min eigenvalue {:e} after {} attempts",
                ce.sigma, ce.min_eigenvalue, ce.attempts
            ));
            for (i, inst) in ce.instances.iter().enumerate() {
                r.notes.push(format!("instance {i}: {inst:?}"));
            }
        }
        Err(e) => r.fail(format!("no indefinite optimal-assignment Gram found: {e}")),
    }
}

fn walk_count(r: &mut SuiteReport, seed: RngSeed) -> Result<()> {
    for c in 0..20 {
        let mut rng = seed.derive(c).rng();
        let (g, h) = (random_graph(&mut rng, 1, 10, 0)?, random_graph(&mut rng, 1, 10, 0)?);
        let lambda = rng.gen_range(0.01..0.9);
        let (n, m) = (g.num_vertices() as f64, h.num_vertices() as f64);
        let prod = direct_product(&g, &h, true)?;
        let ours = (n * m).powi(2) * truncated_walk_kernel(&prod, lambda, Measure::Geometric, 6, 1);
        let reference = walk_count_kernel(&g, &h, lambda, 6)?;
        r.check(
            || format!("{} lambda={lambda}: scaled uniform walk kernel", case_tag(seed, c)),
            (ours - reference).abs() / reference.abs().max(f64::MIN_POSITIVE),
            1e-8,
        );
        r.cases += 1;
    }
    Ok(())
}

fn geometric(r: &mut SuiteReport, seed: RngSeed) -> Result<()> {
    let k2 = Graph::complete(2);
    let v = geometric_kernel(&k2, &k2, 0.1)?;
    r.check(|| "K2/K2 closed form 4e^0.1".into(), (v - 4.0 * 0.1f64.exp()).abs(), 1e-10);
    for c in 0..50 {
        let mut rng = seed.derive(c).rng();
        let (g, h) = (random_graph(&mut rng, 2, 16, 0)?, random_graph(&mut rng, 2, 16, 0)?);
        let lambda = rng.gen_range(0.0..2.0);
        let ax = kron(&normalized_adjacency(&g)?.to_dense(), &normalized_adjacency(&h)?.to_dense());
        let oracle: f64 = matrix_exp_oracle(&ax, lambda)?.as_slice().iter().sum();
        let v = geometric_kernel(&g, &h, lambda)?;
        r.check(|| format!("{} lambda={lambda}: spectral vs exponential", case_tag(seed, c)), (v - oracle).abs() / oracle, 1e-8);
        r.cases += 1;
    }
    Ok(())
}

fn cartesian_binomial(r: &mut SuiteReport, seed: RngSeed) -> Result<()> {
    for c in 0..50 {
        let mut rng = seed.derive(c).rng();
        let (g, h) = (random_graph(&mut rng, 1, 8, 0)?, random_graph(&mut rng, 1, 8, 0)?);
        let (n, m) = (g.num_vertices(), h.num_vertices());
        let (l, lp) = (laplacian(&g)?.to_dense(), laplacian(&h)?.to_dense());
        let (p, pp) = (random_vec(&mut rng, n, 0.0, 1.0), random_vec(&mut rng, m, 0.0, 1.0));
        let (q, qp) = (random_vec(&mut rng, n, 0.0, 1.0), random_vec(&mut rng, m, 0.0, 1.0));
        let prod = cartesian_product(&g, &h, CartesianWeight::Laplacian)?.with_distributions(&p, &pp, &q, &qp)?;
        let lp_pows: Vec<Vec<f64>> = (0..=12).map(|i| mat_pow_vec(&l, &p, i)).collect::<Result<_>>()?;
        let lpp_pows: Vec<Vec<f64>> = (0..=12).map(|i| mat_pow_vec(&lp, &pp, i)).collect::<Result<_>>()?;
        let mut x = prod.start().to_vec();
        for k in 1..=6 {
            x = prod.apply_weight(&x)?;
            let mut expected = vec![0.0; n * m];
            for i in 0..=k {
                let term = vec_outer(&lpp_pows[k - i], &lp_pows[i]);
                for (e, t) in expected.iter_mut().zip(term) {
                    *e += binomial(k, i) * t;
                }
            }
            let scale = expected.iter().fold(1.0f64, |a, v| a.max(v.abs()));
            r.check(|| format!("{} k={k}: binomial expansion", case_tag(seed, c)), max_abs_diff(&x, &expected) / scale, 1e-9);
        }
        let terms = walk_series_terms(&prod, 6);
        for k in 1..=3 {
            let expected: f64 = (0..=2 * k)
                .map(|i| binomial(2 * k, i) * dot(&q, &lp_pows[i]) * dot(&qp, &lpp_pows[2 * k - i]))
                .sum();
            let scale = expected.abs().max(1.0);
            r.check(|| format!("{} 2k={}: even-power factorization", case_tag(seed, c), 2 * k), (terms[2 * k] - expected).abs() / scale, 1e-9);
        }
        r.cases += 1;
    }
    Ok(())
}

/// Random row-substochastic transition probabilities supported on the
/// edges, each row summing to 0.8.
fn random_transitions(rng: &mut ChaCha8Rng, g: &Graph) -> DenseMatrix {
    let n = g.num_vertices();
    let mut pm = DenseMatrix::zeros(n, n);
    for (i, j, _, _) in g.arcs() {
        pm.set(i, j, rng.gen_range(0.1..1.0));
    }
    for i in 0..n {
        let s: f64 = pm.row(i).iter().sum();
        if s > 0.0 {
            for j in 0..n {
                pm.set(i, j, 0.8 * pm.get(i, j) / s);
            }
        }
    }
    pm
}

fn arc_labels(g: &Graph) -> Vec<(usize, usize, usize)> {
    g.arcs()
        .map(|(i, j, _, k)| match g.labels() {
            EdgeLabels::Discrete { labels, .. } => (i, j, labels[k]),
            _ => (i, j, 0),
        })
        .collect()
}

fn marginalized(r: &mut SuiteReport, seed: RngSeed) -> Result<()> {
    for c in 0..20 {
        let mut rng = seed.derive(c).rng();
        let (g, h) = (random_graph(&mut rng, 1, 10, 3)?, random_graph(&mut rng, 1, 10, 3)?);
        let (n, m) = (g.num_vertices(), h.num_vertices());
        let (pm, pmp) = (random_transitions(&mut rng, &g), random_transitions(&mut rng, &h));
        let (p, pp) = (random_vec(&mut rng, n, 0.0, 1.0), random_vec(&mut rng, m, 0.0, 1.0));
        let (q, qp) = (random_vec(&mut rng, n, 0.0, 1.0), random_vec(&mut rng, m, 0.0, 1.0));

        let mut system = DenseMatrix::identity(n * m);
        for &(i, j, a) in &arc_labels(&g) {
            for &(ip, jp, b) in &arc_labels(&h) {
                if a == b {
                    let (row, col) = (i * m + ip, j * m + jp);
                    system.set(row, col, system.get(row, col) - pm.get(i, j) * pmp.get(ip, jp));
                }
            }
        }
        let x = dense_solve(&system, &vec_outer(&pp, &p))?;
        let oracle = dot(&vec_outer(&qp, &q), &x);

        for method in [Method::Direct, Method::FixedPoint, Method::Cg] {
            let cfg = KernelConfig { method, tol: 1e-12, ..KernelConfig::default() };
            let v = marginalized_kernel(&g, &h, (&pm, &pmp), (&p, &pp), (&q, &qp), &cfg)?.value;
            r.check(
                || format!("{} {method}: rescaled random walk vs explicit transition system", case_tag(seed, c)),
                (v - oracle).abs() / oracle.abs().max(1.0),
                1e-8,
            );
        }
        r.cases += 1;
    }
    Ok(())
}

/// Rectangular identity `I_M` of the given shape.
fn eye(rows: usize, cols: usize) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols, |i, j| if i == j { 1.0 } else { 0.0 })
}

fn column(v: Vec<f64>) -> DenseMatrix {
    let n = v.len();
    DenseMatrix::new(n, 1, v).expect("length matches")
}

fn kronecker_identities(r: &mut SuiteReport, seed: RngSeed) -> Result<()> {
    const REAL_TOL: f64 = 1e-12;
    const FEATURE_TOL: f64 = 1e-10;
    for c in 0..40 {
        let mut rng = seed.derive(c).rng();
        let tag = case_tag(seed, c);
        let mut dim = || rng.gen_range(1..=6usize);
        let (n, m, p, q, o, s) = (dim(), dim(), dim(), dim(), dim(), dim());
        let d = rng.gen_range(1..=4);

        // real identities
        let (a, b, cc) = (random_dense(&mut rng, n, m), random_dense(&mut rng, m, p), random_dense(&mut rng, p, q));
        let lhs = vec(&a.matmul(&b)?.matmul(&cc)?);
        let rhs = kron(&cc.transpose(), &a).mul_vec(&vec(&b))?;
        r.check(|| format!("{tag}: vec(ABC) = (C^T kron A) vec(B)"), max_abs_diff(&lhs, &rhs), REAL_TOL);

        let (a2, b2) = (random_dense(&mut rng, n, m), random_dense(&mut rng, p, q));
        let (c2, d2) = (random_dense(&mut rng, m, o), random_dense(&mut rng, q, s));
        let lhs = kron(&a2, &b2).matmul(&kron(&c2, &d2))?;
        let rhs = kron(&a2.matmul(&c2)?, &b2.matmul(&d2)?);
        r.check(|| format!("{tag}: mixed product"), lhs.max_abs_diff(&rhs), REAL_TOL);

        let (c3, d3) = (random_dense(&mut rng, n, m), random_dense(&mut rng, p, q));
        let lhs = hadamard(&kron(&a2, &b2), &kron(&c3, &d3))?;
        let rhs = kron(&hadamard(&a2, &c3)?, &hadamard(&b2, &d3)?);
        r.check(|| format!("{tag}: Hadamard of Kronecker products"), lhs.max_abs_diff(&rhs), REAL_TOL);

        // feature-matrix identities
        let fa = random_feature(&mut rng, n, m, d);
        let fb = random_feature(&mut rng, m, p, d);
        let fc = random_feature(&mut rng, p, q, d);

        let lhs_f = FeatureMatrix::real_mul(&a, &fb)?.mul_real(&cc)?.vec();
        let rhs_f = FeatureMatrix::real_mul(&kron(&cc.transpose(), &a), &fb.vec())?;
        r.check(|| format!("{tag}: vec(A Phi(B) C)"), lhs_f.max_abs_diff(&rhs_f), FEATURE_TOL);

        let lhs = vec(&fa.mul_real(&b)?.mul_feature(&fc)?);
        let rhs = fc.transpose().kron_feature(&fa)?.mul_vec(&vec(&b))?;
        r.check(|| format!("{tag}: vec(Phi(A) B Phi(C))"), max_abs_diff(&lhs, &rhs), FEATURE_TOL);

        let fb2 = random_feature(&mut rng, p, q, d);
        let lhs = fa.kron_feature(&fb2)?.matmul(&kron(&c2, &d2))?;
        let rhs = fa.mul_real(&c2)?.kron_feature(&fb2.mul_real(&d2)?)?;
        r.check(|| format!("{tag}: (Phi(A) kron Phi(B))(C kron D)"), lhs.max_abs_diff(&rhs), FEATURE_TOL);

        let fc2 = random_feature(&mut rng, m, o, d);
        let lhs = fa.kron_real(&b2).mul_feature(&fc2.kron_real(&d2))?;
        let rhs = kron(&fa.mul_feature(&fc2)?, &b2.matmul(&d2)?);
        r.check(|| format!("{tag}: (Phi(A) kron B)(Phi(C) kron D)"), lhs.max_abs_diff(&rhs), FEATURE_TOL);

        let lhs = fa.mul_real(&b.matmul(&cc)?)?.vec();
        let rhs = FeatureMatrix::real_kron(&cc.transpose(), &fa).mul_real(&column(vec(&b)))?;
        r.check(|| format!("{tag}: vec(Phi(A) B C)"), lhs.max_abs_diff(&rhs), FEATURE_TOL);

        let lhs = FeatureMatrix::real_mul(&a.matmul(&b)?, &fc)?.vec();
        let rhs = fc.transpose().kron_real(&a).mul_real(&column(vec(&b)))?;
        r.check(|| format!("{tag}: vec(A B Phi(C))"), lhs.max_abs_diff(&rhs), FEATURE_TOL);

        let lhs = vec(&fa.mul_feature(&fb)?.matmul(&cc)?);
        let rhs = FeatureMatrix::real_kron(&cc.transpose(), &fa).mul_feature(&fb.vec())?.into_vec();
        r.check(|| format!("{tag}: vec(Phi(A) Phi(B) C)"), max_abs_diff(&lhs, &rhs), FEATURE_TOL);

        let fb3 = random_feature(&mut rng, m, p, d);
        let lhs = vec(&FeatureMatrix::real_mul(&a, &fb3)?.mul_feature(&fc)?);
        let rhs = fc.transpose().kron_real(&a).mul_feature(&fb3.vec())?.into_vec();
        r.check(|| format!("{tag}: vec(A Phi(B) Phi(C))"), max_abs_diff(&lhs, &rhs), FEATURE_TOL);

        // Kronecker sums: A is n x m, B is p x q, C is q x m
        let fbs = random_feature(&mut rng, p, q, d);
        let (ia, ib) = (eye(n, m), eye(p, q));
        let fcs = random_feature(&mut rng, q, m, d);
        let lhs = fa.kron_sum_feature(&fbs)?.mul_feature(&fcs.vec())?.into_vec();
        let rhs = FeatureMatrix::real_mul(&ib, &fcs)?
            .mul_feature(&fa.transpose())?
            .add(&fbs.mul_feature(&fcs)?.matmul(&ia.transpose())?)?;
        r.check(|| format!("{tag}: (Phi(A) ksum Phi(B)) vec(Phi(C))"), max_abs_diff(&lhs, &vec(&rhs)), FEATURE_TOL);

        let cs = random_dense(&mut rng, q, m);
        let lhs = fa.kron_sum_feature(&fbs)?.mul_real(&column(vec(&cs)))?;
        let rhs = FeatureMatrix::real_mul(&ib.matmul(&cs)?, &fa.transpose())?
            .add(&fbs.mul_real(&cs.matmul(&ia.transpose())?)?)?
            .vec();
        r.check(|| format!("{tag}: (Phi(A) ksum Phi(B)) vec(C)"), lhs.max_abs_diff(&rhs), FEATURE_TOL);

        let (ar, br) = (random_dense(&mut rng, n, m), random_dense(&mut rng, p, q));
        let ksum = kron(&ar, &ib).add(&kron(&ia, &br))?;
        let lhs = FeatureMatrix::real_mul(&ksum, &fcs.vec())?;
        let rhs = FeatureMatrix::real_mul(&ib, &fcs)?
            .mul_real(&ar.transpose())?
            .add(&FeatureMatrix::real_mul(&br, &fcs)?.mul_real(&ia.transpose())?)?
            .vec();
        r.check(|| format!("{tag}: (A ksum B) vec(Phi(C))"), lhs.max_abs_diff(&rhs), FEATURE_TOL);

        // Hadamard products
        let lhs = hadamard(&fa.kron_feature(&fbs)?, &kron(&c3, &d3))?;
        let rhs = fa.hadamard_real(&c3)?.kron_feature(&fbs.hadamard_real(&d3)?)?;
        r.check(|| format!("{tag}: (Phi(A) kron Phi(B)) had (C kron D)"), lhs.max_abs_diff(&rhs), FEATURE_TOL);

        let fh = random_feature(&mut rng, n, m, d);
        let lhs = fa.kron_real(&b2).hadamard_feature(&fh.kron_real(&d3))?;
        let rhs = kron(&fa.hadamard_feature(&fh)?, &hadamard(&b2, &d3)?);
        r.check(|| format!("{tag}: (Phi(A) kron B) had (Phi(C) kron D)"), lhs.max_abs_diff(&rhs), FEATURE_TOL);

        // one-hot features reduce the feature Kronecker product to a sum over labels
        let labels = d;
        let (la, lb) = (n.max(2), p.max(2));
        let pick = |rng: &mut ChaCha8Rng, k: usize| -> Vec<Option<usize>> {
            (0..k * k).map(|_| if rng.gen_bool(0.6) { Some(rng.gen_range(0..labels)) } else { None }).collect()
        };
        let (ga, gb) = (pick(&mut rng, la), pick(&mut rng, lb));
        let one_hot = |g: &[Option<usize>], k: usize| {
            FeatureMatrix::from_fn(k, k, labels, |i, j, l| if g[i * k + j] == Some(l) { 1.0 } else { 0.0 })
        };
        let lhs = one_hot(&ga, la).kron_feature(&one_hot(&gb, lb))?;
        let mut rhs = DenseMatrix::zeros(la * lb, la * lb);
        for l in 0..labels {
            let fa_l = DenseMatrix::from_fn(la, la, |i, j| if ga[i * la + j] == Some(l) { 1.0 } else { 0.0 });
            let fb_l = DenseMatrix::from_fn(lb, lb, |i, j| if gb[i * lb + j] == Some(l) { 1.0 } else { 0.0 });
            rhs = rhs.add(&kron(&fa_l, &fb_l))?;
        }
        r.check(|| format!("{tag}: one-hot feature Kronecker product"), lhs.max_abs_diff(&rhs), REAL_TOL);
        r.cases += 1;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_suite_is_rejected() {
        assert!(run_suite("nope", RngSeed(1)).is_err());
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(6, 0), 1.0);
        assert_eq!(binomial(6, 3), 20.0);
        assert_eq!(binomial(4, 4), 1.0);
    }

    #[test]
    fn every_suite_passes() {
        for name in SUITES {
            let r = run_suite(name, RngSeed(7)).unwrap();
            assert!(r.passed(), "{name}: {:?}", r.failures);
            assert!(r.cases > 0, "{name}");
        }
    }
}
