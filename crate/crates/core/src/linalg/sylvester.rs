//! Stein-form Sylvester equations `M = S M T + M0` and the generalized
//! sum form `M = λ Σ_i S_i M T_iᵀ + M0`.
//!
//! Symmetric and diagonally symmetrizable coefficients (every undirected
//! graph's normalized adjacency is one) are diagonalized through a
//! symmetric eigendecomposition, which decouples the equation entrywise
//! in `O(n³)`. Other coefficients go through the doubling iteration
//! `M ← M + S M T`, `S ← S²`, `T ← T²`. Every returned solution is
//! certified against the residual bound.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::linalg::dense::DenseMatrix;
use crate::linalg::eigen::sym_eig;
use crate::linalg::kron::{kron_mat_vec_acc, unvec, vec, MatrixRef};
use crate::linalg::solvers::{fixed_point_solve, spectral_radius_estimate, FnOperator};

/// Residual bound used to certify Stein solutions, relative to
/// `1 + max|M0|`.
pub const STEIN_RESIDUAL_TOL: f64 = 1e-8;

/// Real eigendecomposition `X = U diag(values) U⁻¹` with `U` built from a
/// diagonal scaling of an orthogonal matrix.
#[derive(Clone, Debug)]
pub struct SymmetrizableEigen {
    pub values: Vec<f64>,
    pub u: DenseMatrix,
    pub u_inv: DenseMatrix,
}

/// Finds `e > 0` with `diag(e) X diag(e)⁻¹` symmetric, if one exists.
pub fn symmetrizing_scaling(x: &DenseMatrix) -> Option<Vec<f64>> {
    if !x.is_square() {
        return None;
    }
    let n = x.rows();
    let scale = x.max_abs().max(f64::MIN_POSITIVE);
    for i in 0..n {
        for j in (i + 1)..n {
            let (a, b) = (x.get(i, j), x.get(j, i));
            if (a == 0.0) != (b == 0.0) || a * b < 0.0 {
                return None;
            }
        }
    }
    let mut e = vec![0.0; n];
    let mut queue = VecDeque::new();
    for root in 0..n {
        if e[root] != 0.0 {
            continue;
        }
        e[root] = 1.0;
        queue.push_back(root);
        while let Some(i) = queue.pop_front() {
            for j in 0..n {
                let a = x.get(i, j);
                if j != i && a != 0.0 && e[j] == 0.0 {
                    e[j] = e[i] * (a / x.get(j, i)).sqrt();
                    queue.push_back(j);
                }
            }
        }
    }
    let sym = DenseMatrix::from_fn(n, n, |i, j| e[i] * x.get(i, j) / e[j]);
    (sym.asymmetry() <= 1e-12 * scale).then_some(e)
}

/// Real diagonalization of a symmetric or diagonally symmetrizable matrix.
pub fn symmetrizable_eigen(x: &DenseMatrix) -> Option<SymmetrizableEigen> {
    let e = symmetrizing_scaling(x)?;
    let n = x.rows();
    let sym = DenseMatrix::from_fn(n, n, |i, j| e[i] * x.get(i, j) / e[j]).symmetrize();
    let eig = sym_eig(&sym).ok()?;
    let p = &eig.eigenvectors;
    let u = DenseMatrix::from_fn(n, n, |i, j| p.get(i, j) / e[i]);
    let u_inv = DenseMatrix::from_fn(n, n, |i, j| p.get(j, i) * e[j]);
    Some(SymmetrizableEigen { values: eig.eigenvalues, u, u_inv })
}

/// `‖M − S M T − M0‖_max`.
pub fn stein_residual(s: &DenseMatrix, t: &DenseMatrix, m0: &DenseMatrix, m: &DenseMatrix) -> f64 {
    let smt = s.matmul_unchecked(m).matmul_unchecked(t);
    (0..m.rows())
        .flat_map(|i| (0..m.cols()).map(move |j| (i, j)))
        .map(|(i, j)| (m.get(i, j) - smt.get(i, j) - m0.get(i, j)).abs())
        .fold(0.0, f64::max)
}

/// Solves `M = S M T + M0` for `S: p×p`, `T: q×q`, `M0: p×q`.
pub fn sylvester_solve(s: &DenseMatrix, t: &DenseMatrix, m0: &DenseMatrix) -> Result<DenseMatrix> {
    if !s.is_square() || !t.is_square() || m0.rows() != s.rows() || m0.cols() != t.rows() {
        return Err(Error::DimensionMismatch(format!(
            "Stein equation with S {}x{}, T {}x{}, M0 {}x{}",
            s.rows(),
            s.cols(),
            t.rows(),
            t.cols(),
            m0.rows(),
            m0.cols()
        )));
    }
    let bound = STEIN_RESIDUAL_TOL * (1.0 + m0.max_abs());
    if s.max_abs() == 0.0 || t.max_abs() == 0.0 {
        return Ok(m0.clone());
    }
    if let (Some(es), Some(et)) = (symmetrizable_eigen(s), symmetrizable_eigen(t)) {
        let m = stein_by_eigen(&es, &et, m0)?;
        if stein_residual(s, t, m0, &m) <= bound {
            return Ok(m);
        }
    }
    let m = stein_by_doubling(s, t, m0)?;
    let res = stein_residual(s, t, m0, &m);
    if res <= bound {
        Ok(m)
    } else {
        Err(Error::SingularStein(res))
    }
}

fn stein_by_eigen(es: &SymmetrizableEigen, et: &SymmetrizableEigen, m0: &DenseMatrix) -> Result<DenseMatrix> {
    let c = es.u_inv.matmul_unchecked(m0).matmul_unchecked(&et.u);
    let mut n = c;
    for (i, &si) in es.values.iter().enumerate() {
        for (j, &tj) in et.values.iter().enumerate() {
            let d = 1.0 - si * tj;
            if d.abs() <= 1e3 * f64::EPSILON {
                return Err(Error::SingularStein(d));
            }
            n.set(i, j, n.get(i, j) / d);
        }
    }
    Ok(es.u.matmul_unchecked(&n).matmul_unchecked(&et.u_inv))
}

fn stein_by_doubling(s: &DenseMatrix, t: &DenseMatrix, m0: &DenseMatrix) -> Result<DenseMatrix> {
    let mut m = m0.clone();
    let mut sk = s.clone();
    let mut tk = t.clone();
    for _ in 0..64 {
        let inc = sk.matmul_unchecked(&m).matmul_unchecked(&tk);
        m = m.add(&inc)?;
        if !m.is_finite() {
            break;
        }
        if inc.max_abs() <= 1e-17 * (1.0 + m.max_abs()) {
            return Ok(m);
        }
        sk = sk.matmul_unchecked(&sk);
        tk = tk.matmul_unchecked(&tk);
    }
    Err(Error::SingularStein(f64::NAN))
}

/// Solves `M = λ Σ_i S_i M T_iᵀ + M0`.
///
/// A single pair is handed to [`sylvester_solve`]. Longer lists are solved
/// by fixed-point sweeps on the equation, which requires the map
/// `M ↦ λ Σ S_i M T_iᵀ` to be a contraction. Returns the solution and the
/// number of sweeps (zero for the direct route).
pub fn generalized_sylvester_solve<S: MatrixRef, T: MatrixRef>(
    pairs: &[(S, T)],
    lambda: f64,
    m0: &DenseMatrix,
    tol: f64,
    max_iter: usize,
) -> Result<(DenseMatrix, usize)> {
    let (p, q) = (m0.rows(), m0.cols());
    for (s, t) in pairs {
        if s.nrows() != p || s.ncols() != p || t.nrows() != q || t.ncols() != q {
            return Err(Error::DimensionMismatch("coefficient pair does not match M0".into()));
        }
    }
    if lambda == 0.0 || pairs.is_empty() {
        return Ok((m0.clone(), 0));
    }
    if pairs.len() == 1 {
        let s = to_dense(&pairs[0].0).scale(lambda);
        let t = to_dense(&pairs[0].1).transpose();
        return Ok((sylvester_solve(&s, &t, m0)?, 0));
    }
    // vec(S M Tᵀ) = (T ⊗ S) vec(M)
    let dim = p * q;
    let op = FnOperator::new(dim, |x: &[f64], y: &mut [f64]| {
        y.fill(0.0);
        let mut scratch = vec![0.0; p * q];
        for (s, t) in pairs {
            kron_mat_vec_acc(t, s, x, 1.0, &mut scratch, y);
        }
    });
    let bound: f64 = pairs.iter().map(|(s, t)| row_sum_norm(s) * row_sum_norm(t)).sum();
    if lambda * bound >= 1.0 {
        let xi = spectral_radius_estimate(&op, dim, 200);
        if lambda * xi >= 1.0 {
            return Err(Error::SpectralCondition { lambda, xi_max: xi, product: lambda * xi });
        }
    }
    let rep = fixed_point_solve(&op, &vec(m0), lambda, tol, max_iter)?;
    Ok((unvec(&rep.solution, p, q)?, rep.iterations))
}

fn row_sum_norm<M: MatrixRef>(m: &M) -> f64 {
    (0..m.nrows())
        .map(|i| {
            let mut s = 0.0;
            m.for_row(i, |_, v| s += v.abs());
            s
        })
        .fold(0.0, f64::max)
}

fn to_dense<M: MatrixRef>(m: &M) -> DenseMatrix {
    let mut d = DenseMatrix::zeros(m.nrows(), m.ncols());
    for i in 0..m.nrows() {
        m.for_row(i, |j, v| d.set(i, j, v));
    }
    d
}
