use std::time::Instant;

use crate::error::{Error, Result};
use crate::graph::{
    cartesian_product, direct_product, label_indicators, transition_matrix, CartesianWeight, Graph, ProductGraph,
    ProductKind,
};
use crate::kernels::{KernelConfig, KernelResult, Measure, Method, PowerMode};
use crate::linalg::{
    cg_solve, dense_solve, dot, fixed_point_solve, generalized_sylvester_solve, kron, matrix_exp_oracle, norm2,
    spectral_radius_estimate, sym_eig, unvec, vec, DenseMatrix, FnOperator, LinearOperator, ShiftedOperator,
    SparseMatrix,
};

/// Largest product system the direct method will materialize.
pub const DIRECT_MAX_DIM: usize = 4096;

/// `W` or `W²` of a product graph as a lazy operator.
struct Walk<'a> {
    prod: &'a ProductGraph,
    squared: bool,
}

impl LinearOperator for Walk<'_> {
    fn dim(&self) -> usize {
        self.prod.num_vertices()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        if self.squared {
            let mut t = vec![0.0; x.len()];
            self.prod.apply(x, &mut t);
            self.prod.apply(&t, y);
        } else {
            self.prod.apply(x, y);
        }
    }

    fn is_symmetric(&self) -> bool {
        self.prod.is_symmetric()
    }
}

impl Walk<'_> {
    fn apply_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; x.len()];
        self.apply(x, &mut y);
        y
    }

    fn explicit(&self) -> SparseMatrix {
        let w = self.prod.weight_matrix();
        if self.squared {
            w.matmul(&w).expect("square")
        } else {
            w
        }
    }

    /// Factor pairs `(L, R)` with `Σ L ⊗ R` equal to the operator.
    fn pairs(&self) -> Vec<(SparseMatrix, SparseMatrix)> {
        let base = self.prod.pairs();
        if !self.squared {
            return base.to_vec();
        }
        let mut out = Vec::with_capacity(base.len() * base.len());
        for (la, ra) in base {
            for (lb, rb) in base {
                out.push((la.matmul(lb).expect("square"), ra.matmul(rb).expect("square")));
            }
        }
        out
    }

    /// Cheap upper bound on the spectral radius.
    fn norm_bound(&self) -> f64 {
        let b: f64 = self.prod.pairs().iter().map(|(l, r)| l.norm_inf() * r.norm_inf()).sum();
        if self.squared {
            b * b
        } else {
            b
        }
    }

    fn check_spectral(&self, lambda: f64) -> Result<()> {
        if lambda == 0.0 || lambda * self.norm_bound() < 1.0 {
            return Ok(());
        }
        let xi = spectral_radius_estimate(self, self.dim(), 300);
        if lambda * xi >= 1.0 {
            return Err(Error::SpectralCondition { lambda, xi_max: xi, product: lambda * xi });
        }
        Ok(())
    }
}

struct Solved {
    x: Vec<f64>,
    iterations: usize,
    converged: bool,
}

/// Solves `(I − λ W) x = rhs` with the configured backend.
fn solve(walk: &Walk, lambda: f64, rhs: &[f64], cfg: &KernelConfig) -> Result<Solved> {
    let dim = walk.dim();
    match cfg.method {
        Method::Direct => {
            if dim > DIRECT_MAX_DIM {
                return Err(Error::InvalidArgument(format!(
                    "direct method limited to product systems of size {DIRECT_MAX_DIM}, got {dim}"
                )));
            }
            let w = walk.explicit();
            let mut m = DenseMatrix::identity(dim);
            for (i, j, v) in w.iter() {
                m.set(i, j, m.get(i, j) - lambda * v);
            }
            Ok(Solved { x: dense_solve(&m, rhs)?, iterations: 1, converged: true })
        }
        Method::Sylvester => {
            let (n, n_prime) = walk.prod.factor_sizes();
            let pairs = walk.pairs();
            // vec(R M Lᵀ) = (L ⊗ R) vec(M)
            let swapped: Vec<(&SparseMatrix, &SparseMatrix)> = pairs.iter().map(|(l, r)| (r, l)).collect();
            let m0 = unvec(rhs, n_prime, n)?;
            let (m, it) = generalized_sylvester_solve(&swapped, lambda, &m0, cfg.tol, cfg.max_iter)?;
            Ok(Solved { x: vec(&m), iterations: it, converged: true })
        }
        Method::Cg => {
            let rep = if let Some((e, e_prime)) = walk.prod.symmetrizer() {
                // E W E⁻¹ is symmetric for E = diag(e ⊗ e′)
                let scale: Vec<f64> = e.iter().flat_map(|&a| e_prime.iter().map(move |&b| a * b)).collect();
                let op = FnOperator::symmetric(dim, |z: &[f64], y: &mut [f64]| {
                    let t: Vec<f64> = z.iter().zip(&scale).map(|(v, s)| v / s).collect();
                    walk.apply(&t, y);
                    y.iter_mut().zip(&scale).for_each(|(v, s)| *v *= s);
                });
                let b: Vec<f64> = rhs.iter().zip(&scale).map(|(v, s)| v * s).collect();
                let mut rep = cg_solve(&ShiftedOperator { inner: &op, lambda }, &b, cfg.tol, cfg.max_iter)?;
                rep.solution.iter_mut().zip(&scale).for_each(|(v, s)| *v /= s);
                rep
            } else {
                cg_solve(&ShiftedOperator { inner: walk, lambda }, rhs, cfg.tol, cfg.max_iter)?
            };
            Ok(Solved { x: rep.solution, iterations: rep.iterations, converged: rep.converged })
        }
        Method::FixedPoint => {
            let rep = fixed_point_solve(walk, rhs, lambda, cfg.tol, cfg.max_iter)?;
            Ok(Solved { x: rep.solution, iterations: rep.iterations, converged: rep.converged })
        }
        Method::Spectral => Err(Error::InvalidArgument("spectral method has no linear solve".into())),
    }
}

fn relative_residual(walk: &Walk, lambda: f64, rhs: &[f64], x: &[f64]) -> f64 {
    let wx = walk.apply_vec(x);
    let r: Vec<f64> = rhs.iter().zip(x).zip(&wx).map(|((b, xi), wi)| b - (xi - lambda * wi)).collect();
    let nb = norm2(rhs);
    if nb == 0.0 {
        norm2(&r)
    } else {
        norm2(&r) / nb
    }
}

/// `Σ_{k ≥ skip} μ(k) qᵀ Wᵏ p` for the operator of `walk`.
fn evaluate(walk: &Walk, skip_zeroth: bool, cfg: &KernelConfig) -> Result<KernelResult> {
    cfg.validate()?;
    let started = Instant::now();
    let lambda = cfg.lambda;
    let (p, q) = (walk.prod.start(), walk.prod.stop());
    let done = |value: f64, iterations: usize, residual: f64, converged: bool| -> Result<KernelResult> {
        if !value.is_finite() {
            return Err(Error::NonFinite("kernel value".into()));
        }
        Ok(KernelResult { value, method: cfg.method, iterations, residual, converged, wall_time: started.elapsed() })
    };

    if cfg.method == Method::Spectral {
        let value = spectral_walk(walk, cfg.measure, lambda, skip_zeroth)?;
        return done(value, 0, 0.0, true);
    }
    match cfg.measure {
        Measure::Geometric => {
            walk.check_spectral(lambda)?;
            let rhs = if skip_zeroth {
                walk.apply_vec(p).into_iter().map(|v| lambda * v).collect()
            } else {
                p.to_vec()
            };
            let s = solve(walk, lambda, &rhs, cfg)?;
            let residual = relative_residual(walk, lambda, &rhs, &s.x);
            done(dot(q, &s.x), s.iterations, residual, s.converged)
        }
        Measure::Exponential => match cfg.method {
            Method::Direct => {
                if walk.dim() > DIRECT_MAX_DIM {
                    return Err(Error::InvalidArgument(format!(
                        "direct method limited to product systems of size {DIRECT_MAX_DIM}"
                    )));
                }
                let e = matrix_exp_oracle(&walk.explicit().to_dense(), lambda)?;
                let mut x = e.mul_vec(p)?;
                if skip_zeroth {
                    x.iter_mut().zip(p).for_each(|(a, b)| *a -= b);
                }
                done(dot(q, &x), 1, 0.0, true)
            }
            Method::FixedPoint => {
                let mut x = if skip_zeroth { vec![0.0; p.len()] } else { p.to_vec() };
                let mut term = p.to_vec();
                let mut converged = false;
                let mut k = 0;
                while k < cfg.max_iter {
                    k += 1;
                    let next = walk.apply_vec(&term);
                    let c = lambda / k as f64;
                    term = next.into_iter().map(|v| c * v).collect();
                    x.iter_mut().zip(&term).for_each(|(a, b)| *a += b);
                    let nt = norm2(&term);
                    if nt == 0.0 || nt <= f64::EPSILON * norm2(&x) {
                        converged = true;
                        break;
                    }
                }
                done(dot(q, &x), k, 0.0, converged)
            }
            m => Err(Error::InvalidArgument(format!("method {m} solves the geometric measure only"))),
        },
    }
}

/// Closed-form evaluation from the eigendecompositions of the two factors.
fn spectral_walk(walk: &Walk, measure: Measure, lambda: f64, skip_zeroth: bool) -> Result<f64> {
    let prod = walk.prod;
    let Some((e, e_prime)) = prod.symmetrizer() else {
        return Err(Error::Directed);
    };
    let pairs = prod.pairs();
    let (l, r, combine): (&SparseMatrix, &SparseMatrix, fn(f64, f64) -> f64) = match prod.kind() {
        ProductKind::Direct if pairs.len() == 1 => (&pairs[0].0, &pairs[0].1, |s, t| s * t),
        ProductKind::Cartesian if pairs.len() == 2 => (&pairs[0].0, &pairs[1].1, |s, t| s + t),
        _ => {
            return Err(Error::InvalidArgument(
                "spectral method needs a product of single-label factors".into(),
            ))
        }
    };
    let squared = walk.squared;
    let (p, pp, q, qp) = prod.factor_distributions();
    let mu = |s: f64, t: f64| {
        let m = combine(s, t);
        if squared {
            m * m
        } else {
            m
        }
    };
    let phi = |m: f64| -> Result<f64> {
        match measure {
            Measure::Geometric => {
                if lambda * m.abs() >= 1.0 {
                    return Err(Error::SpectralCondition { lambda, xi_max: m.abs(), product: lambda * m.abs() });
                }
                Ok(if skip_zeroth { lambda * m / (1.0 - lambda * m) } else { 1.0 / (1.0 - lambda * m) })
            }
            Measure::Exponential => Ok(if skip_zeroth { (lambda * m).exp_m1() } else { (lambda * m).exp() }),
        }
    };
    spectral_sum((l, e, p, q), (r, e_prime, pp, qp), mu, phi)
}

/// Eigen-route evaluation of `(q ⊗ q′)ᵀ f(L, R) (p ⊗ p′)` where `f` acts on
/// the joint eigenvalue `mu(s, t)` through `phi`. Each factor is given as
/// `(matrix, symmetrizing scaling, p, q)`.
pub(crate) fn spectral_sum(
    left: (&SparseMatrix, &[f64], &[f64], &[f64]),
    right: (&SparseMatrix, &[f64], &[f64], &[f64]),
    mu: impl Fn(f64, f64) -> f64,
    phi: impl Fn(f64) -> Result<f64>,
) -> Result<f64> {
    let (s, qu, up) = factor_spectrum(left.0, left.1, left.2, left.3)?;
    let (t, qu2, up2) = factor_spectrum(right.0, right.1, right.2, right.3)?;
    let mut total = 0.0;
    for a in 0..s.len() {
        let wa = qu[a] * up[a];
        if wa == 0.0 {
            continue;
        }
        let mut row = 0.0;
        for b in 0..t.len() {
            let wb = qu2[b] * up2[b];
            if wb != 0.0 {
                row += wb * phi(mu(s[a], t[b]))?;
            }
        }
        total += wa * row;
    }
    Ok(total)
}

/// Eigenvalues of `X = diag(e)⁻¹ S diag(e)` with `qᵀU` and `U⁻¹p`, where
/// `U = diag(e)⁻¹ P`.
fn factor_spectrum(x: &SparseMatrix, e: &[f64], p: &[f64], q: &[f64]) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let n = x.rows();
    let inv: Vec<f64> = e.iter().map(|v| 1.0 / v).collect();
    let s = x.scale_both(e, &inv).to_dense().symmetrize();
    let eig = sym_eig(&s)?;
    let pm = &eig.eigenvectors;
    let mut qu = vec![0.0; n];
    let mut up = vec![0.0; n];
    for i in 0..n {
        let (qi, pi) = (q[i] * inv[i], p[i] * e[i]);
        for (a, &v) in pm.row(i).iter().enumerate() {
            qu[a] += qi * v;
            up[a] += pi * v;
        }
    }
    Ok((eig.eigenvalues, qu, up))
}

/// `q×ᵀ (I − λ W×)⁻¹ p×`, the series over walks of every length `k ≥ 0`
/// (or `Σ_k λᵏ/k! q×ᵀ W×ᵏ p×` under the exponential measure).
pub fn random_walk_product(prod: &ProductGraph, cfg: &KernelConfig) -> Result<KernelResult> {
    evaluate(&Walk { prod, squared: false }, false, cfg)
}

/// Random-walk kernel with uniform start and stop distributions.
pub fn random_walk_kernel(g: &Graph, h: &Graph, cfg: &KernelConfig) -> Result<KernelResult> {
    random_walk_product(&direct_product(g, h, cfg.degree_normalize)?, cfg)
}

/// Random-walk kernel with caller-supplied distributions.
pub fn random_walk_kernel_with(
    g: &Graph,
    h: &Graph,
    (p, p_prime): (&[f64], &[f64]),
    (q, q_prime): (&[f64], &[f64]),
    cfg: &KernelConfig,
) -> Result<KernelResult> {
    let prod = direct_product(g, h, cfg.degree_normalize)?.with_distributions(p, p_prime, q, q_prime)?;
    random_walk_product(&prod, cfg)
}

/// `[q×ᵀ W×ᵏ p×]` for `k = 0..=k_max`, by repeated lazy mat-vecs.
pub fn walk_series_terms(prod: &ProductGraph, k_max: usize) -> Vec<f64> {
    let mut x = prod.start().to_vec();
    let mut out = Vec::with_capacity(k_max + 1);
    out.push(dot(prod.stop(), &x));
    for _ in 0..k_max {
        x = prod.apply_weight(&x).expect("dimension fixed by the product");
        out.push(dot(prod.stop(), &x));
    }
    out
}

/// `Σ_{k = start}^{k_max} μ(k) q×ᵀ W×ᵏ p×`.
pub fn truncated_walk_kernel(prod: &ProductGraph, lambda: f64, measure: Measure, k_max: usize, start: usize) -> f64 {
    walk_series_terms(prod, k_max)
        .iter()
        .enumerate()
        .skip(start)
        .map(|(k, t)| measure.weight(lambda, k) * t)
        .sum()
}

/// `Σ_{k=1}^{k_max} λᵏ Σ_{all entries} [A×ᵏ]` with `A× = A ⊗ A′` formed
/// explicitly.
pub fn walk_count_kernel(g: &Graph, h: &Graph, lambda: f64, k_max: usize) -> Result<f64> {
    let a = kron(&transition_matrix(g).to_dense(), &transition_matrix(h).to_dense());
    let mut v = vec![1.0; a.rows()];
    let mut total = 0.0;
    let mut scale = 1.0;
    for _ in 1..=k_max {
        v = a.mul_vec(&v)?;
        scale *= lambda;
        total += scale * v.iter().sum::<f64>();
    }
    Ok(total)
}

/// `q×ᵀ (I − T×)⁻¹ p×` with `T×` the product of transition probabilities
/// and the edge-label kernel, `[T×]_{(i,i′),(j,j′)} = P_ij P′_i′j′ κ(X_ij, X′_i′j′)`.
///
/// `P` and `P′` must be nonnegative, row-substochastic and supported on
/// the edges of their graphs. Evaluated as a random-walk kernel with
/// `λ = 1` on the rescaled weight matrix, with the configured method.
pub fn marginalized_kernel(
    g: &Graph,
    h: &Graph,
    (pm, pm_prime): (&DenseMatrix, &DenseMatrix),
    (p, p_prime): (&[f64], &[f64]),
    (q, q_prime): (&[f64], &[f64]),
    cfg: &KernelConfig,
) -> Result<KernelResult> {
    let scaled = |g: &Graph, pm: &DenseMatrix| -> Result<Vec<SparseMatrix>> {
        check_transition(g, pm)?;
        Ok(label_indicators(g)
            .iter()
            .map(|c| {
                let t: Vec<(usize, usize, f64)> = c.iter().map(|(i, j, v)| (i, j, v * pm.get(i, j))).collect();
                SparseMatrix::from_triplets(c.rows(), c.cols(), &t).expect("finite entries")
            })
            .collect())
    };
    let left = scaled(g, pm)?;
    let right = scaled(h, pm_prime)?;
    if g.is_directed() != h.is_directed() || left.len() != right.len() {
        return Err(Error::InvalidArgument("graphs carry incompatible edge labels".into()));
    }
    let prod = ProductGraph::from_pairs(ProductKind::Direct, left.into_iter().zip(right).collect())?
        .with_distributions(p, p_prime, q, q_prime)?;
    let cfg = KernelConfig { lambda: 1.0, ..cfg.clone() };
    random_walk_product(&prod, &cfg)
}

fn check_transition(g: &Graph, pm: &DenseMatrix) -> Result<()> {
    let n = g.num_vertices();
    if pm.rows() != n || pm.cols() != n {
        return Err(Error::DimensionMismatch(format!("transition matrix must be {n}x{n}")));
    }
    for i in 0..n {
        let row = pm.row(i);
        if row.iter().any(|&v| v < 0.0) {
            return Err(Error::InvalidArgument(format!("negative transition probability in row {i}")));
        }
        if row.iter().sum::<f64>() > 1.0 + 1e-12 {
            return Err(Error::InvalidArgument(format!("row {i} of the transition matrix sums above 1")));
        }
        for (j, &v) in row.iter().enumerate() {
            if v != 0.0 && !g.has_edge(i, j) {
                return Err(Error::InvalidArgument(format!("transition probability on non-edge ({i}, {j})")));
            }
        }
    }
    Ok(())
}

/// Cartesian-product kernel `Σ_{k≥1} μ(k) q□ᵀ W□^{k'} p□` with `k' = 2k`
/// (even mode) or `k' = k` (all mode).
pub fn cartesian_walk_product(prod: &ProductGraph, cfg: &KernelConfig, mode: PowerMode) -> Result<KernelResult> {
    let walk = Walk { prod, squared: mode == PowerMode::Even };
    evaluate(&walk, true, cfg)
}

pub fn cartesian_walk_kernel(
    g: &Graph,
    h: &Graph,
    cfg: &KernelConfig,
    weight: CartesianWeight,
    mode: PowerMode,
) -> Result<KernelResult> {
    if g.is_directed() || h.is_directed() {
        return Err(Error::Directed);
    }
    cartesian_walk_product(&cartesian_product(g, h, weight)?, cfg, mode)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::normalized_adjacency;

    fn k2() -> Graph {
        Graph::undirected(2, &[(0, 1)]).unwrap()
    }

    fn cfg(method: Method, lambda: f64) -> KernelConfig {
        KernelConfig { lambda, method, tol: 1e-12, ..KernelConfig::default() }
    }

    const SOLVERS: [Method; 5] = [Method::Direct, Method::Sylvester, Method::Cg, Method::FixedPoint, Method::Spectral];

    #[test]
    fn k2_closed_form() {
        for m in SOLVERS {
            let r = random_walk_kernel(&k2(), &k2(), &cfg(m, 0.1)).unwrap();
            assert!((r.value - 1.0 / 3.6).abs() < 1e-10, "{m}: {}", r.value);
            assert!(r.converged);
        }
    }

    #[test]
    fn lambda_zero_and_edgeless_partner() {
        let g = Graph::undirected(3, &[(0, 1), (1, 2)]).unwrap();
        for m in SOLVERS {
            let r = random_walk_kernel(&g, &g, &cfg(m, 0.0)).unwrap();
            assert!((r.value - 1.0 / 9.0).abs() < 1e-14, "{m}");
            let e = random_walk_kernel(&g, &Graph::edgeless(2), &cfg(m, 0.3)).unwrap();
            assert!((e.value - 1.0 / 6.0).abs() < 1e-14, "{m}");
        }
    }

    #[test]
    fn labeled_methods_agree() {
        let g = Graph::undirected_labeled(4, 2, &[(0, 1, 0), (1, 2, 1), (2, 3, 0), (3, 0, 1), (0, 2, 1)]).unwrap();
        let h = Graph::undirected_labeled(3, 2, &[(0, 1, 1), (1, 2, 0), (0, 2, 1)]).unwrap();
        let reference = random_walk_kernel(&g, &h, &cfg(Method::Direct, 0.3)).unwrap().value;
        for m in [Method::Sylvester, Method::Cg, Method::FixedPoint] {
            let v = random_walk_kernel(&g, &h, &cfg(m, 0.3)).unwrap().value;
            assert!((v - reference).abs() < 1e-10 * reference, "{m}");
        }
        assert!(random_walk_kernel(&g, &h, &cfg(Method::Spectral, 0.3)).is_err());
    }

    #[test]
    fn directed_graphs_use_general_solvers() {
        let g = Graph::directed(3, &[(0, 1), (1, 2), (2, 0), (0, 2)]).unwrap();
        let reference = random_walk_kernel(&g, &g, &cfg(Method::Direct, 0.5)).unwrap().value;
        for m in [Method::Sylvester, Method::Cg, Method::FixedPoint] {
            let v = random_walk_kernel(&g, &g, &cfg(m, 0.5)).unwrap().value;
            assert!((v - reference).abs() < 1e-9, "{m}");
        }
        assert_eq!(random_walk_kernel(&g, &g, &cfg(Method::Spectral, 0.5)).unwrap_err(), Error::Directed);
    }

    #[test]
    fn spectral_condition_is_reported() {
        let g = Graph::complete(4);
        for m in [Method::FixedPoint, Method::Direct, Method::Spectral] {
            match random_walk_kernel(&g, &g, &cfg(m, 1.5)) {
                Err(Error::SpectralCondition { .. }) => {}
                other => panic!("{m}: {other:?}"),
            }
        }
    }

    #[test]
    fn series_terms_factorize() {
        let g = Graph::undirected(4, &[(0, 1), (1, 2), (1, 3)]).unwrap();
        let h = Graph::undirected(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let prod = direct_product(&g, &h, true).unwrap();
        let a = normalized_adjacency(&g).unwrap().to_dense();
        let b = normalized_adjacency(&h).unwrap().to_dense();
        let terms = walk_series_terms(&prod, 5);
        let (mut x, mut y) = (vec![0.25; 4], vec![1.0 / 3.0; 3]);
        for t in terms.iter() {
            let rho = x.iter().sum::<f64>() / 4.0 * y.iter().sum::<f64>() / 3.0;
            assert!((t - rho).abs() < 1e-14);
            x = a.mul_vec(&x).unwrap();
            y = b.mul_vec(&y).unwrap();
        }
        let full = random_walk_product(&prod, &cfg(Method::Direct, 0.2)).unwrap().value;
        let trunc = truncated_walk_kernel(&prod, 0.2, Measure::Geometric, 60, 0);
        assert!((full - trunc).abs() < 1e-14);
    }

    #[test]
    fn walk_count_relation() {
        let prod = direct_product(&k2(), &k2(), true).unwrap();
        let walk = truncated_walk_kernel(&prod, 0.1, Measure::Geometric, 3, 1);
        let reference = walk_count_kernel(&k2(), &k2(), 0.1, 3).unwrap();
        assert!((16.0 * walk - reference).abs() < 1e-12);
        assert_eq!(walk_count_kernel(&k2(), &k2(), 0.0, 3).unwrap(), 0.0);
        assert_eq!(walk_count_kernel(&k2(), &Graph::edgeless(3), 0.5, 3).unwrap(), 0.0);
    }

    #[test]
    fn exponential_measure_routes_agree() {
        let g = Graph::undirected(4, &[(0, 1), (1, 2), (2, 3), (0, 2)]).unwrap();
        let h = Graph::undirected(3, &[(0, 1), (1, 2)]).unwrap();
        let base = KernelConfig { measure: Measure::Exponential, ..cfg(Method::Direct, 0.7) };
        let direct = random_walk_kernel(&g, &h, &base).unwrap().value;
        for m in [Method::FixedPoint, Method::Spectral] {
            let v = random_walk_kernel(&g, &h, &base.clone().with_method(m)).unwrap().value;
            assert!((v - direct).abs() < 1e-13, "{m}");
        }
        assert!(random_walk_kernel(&g, &h, &base.with_method(Method::Cg)).is_err());
    }

    #[test]
    fn marginalized_reduces_to_scaled_walk() {
        let g = Graph::undirected(3, &[(0, 1), (1, 2)]).unwrap();
        let h = Graph::undirected(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        let lambda = 0.4;
        let pg = normalized_adjacency(&g).unwrap().to_dense().scale(lambda);
        let ph = normalized_adjacency(&h).unwrap().to_dense().scale(lambda);
        let (u3, u4) = (vec![1.0 / 3.0; 3], vec![0.25; 4]);
        let m = marginalized_kernel(&g, &h, (&pg, &ph), (&u3, &u4), (&u3, &u4), &cfg(Method::Direct, 0.0)).unwrap();
        let rw = random_walk_kernel(&g, &h, &cfg(Method::Direct, lambda * lambda)).unwrap();
        assert!((m.value - rw.value).abs() < 1e-13);
        let z3 = DenseMatrix::zeros(3, 3);
        let z4 = DenseMatrix::zeros(4, 4);
        let zero = marginalized_kernel(&g, &h, (&z3, &z4), (&u3, &u4), (&u3, &u4), &cfg(Method::Cg, 0.0)).unwrap();
        assert!((zero.value - 1.0 / 12.0).abs() < 1e-15);
        let bad = DenseMatrix::from_fn(3, 3, |i, j| if i != j { 0.5 } else { 0.0 });
        assert!(marginalized_kernel(&g, &h, (&bad, &ph), (&u3, &u4), (&u3, &u4), &cfg(Method::Cg, 0.0)).is_err());
    }

    #[test]
    fn cartesian_kernels() {
        let g = Graph::undirected(4, &[(0, 1), (1, 2), (2, 3), (1, 3)]).unwrap();
        let h = Graph::undirected(3, &[(0, 1), (1, 2)]).unwrap();
        for mode in [PowerMode::Even, PowerMode::All] {
            let reference =
                cartesian_walk_kernel(&g, &h, &cfg(Method::Direct, 0.1), CartesianWeight::Adjacency, mode).unwrap().value;
            assert!(reference > 0.0);
            for m in [Method::Sylvester, Method::Cg, Method::FixedPoint, Method::Spectral] {
                let v = cartesian_walk_kernel(&g, &h, &cfg(m, 0.1), CartesianWeight::Adjacency, mode).unwrap().value;
                assert!((v - reference).abs() < 1e-10 * reference, "{m} {mode:?}");
            }
            for m in [Method::Direct, Method::Cg, Method::FixedPoint, Method::Spectral] {
                let v = cartesian_walk_kernel(&g, &h, &cfg(m, 0.01), CartesianWeight::Laplacian, mode).unwrap().value;
                assert!(v.abs() < 1e-12, "{m} {mode:?}: {v}");
            }
            let zero =
                cartesian_walk_kernel(&g, &h, &cfg(Method::FixedPoint, 0.0), CartesianWeight::Adjacency, mode).unwrap();
            assert_eq!(zero.value, 0.0);
        }
    }
}
