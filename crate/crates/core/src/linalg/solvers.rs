//! Linear operators and the solvers built on them: blocked LU, Krylov
//! iterations, fixed-point iteration and the power method.

use crate::error::{Error, Result};
use crate::linalg::dense::{axpy, dot, norm2, DenseMatrix};
use crate::linalg::sparse::SparseMatrix;

/// A square linear map applied to dense vectors.
pub trait LinearOperator {
    fn dim(&self) -> usize;

    /// y = A x, overwriting `y`.
    fn apply(&self, x: &[f64], y: &mut [f64]);

    /// Whether the operator is known to be symmetric. Enables plain
    /// conjugate gradients in [`cg_solve`].
    fn is_symmetric(&self) -> bool {
        false
    }
}

impl LinearOperator for DenseMatrix {
    fn dim(&self) -> usize {
        self.rows()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = dot(self.row(i), x);
        }
    }
}

impl LinearOperator for SparseMatrix {
    fn dim(&self) -> usize {
        self.rows()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.mul_vec_into(x, y);
    }
}

impl<T: LinearOperator + ?Sized> LinearOperator for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        (**self).apply(x, y)
    }
    fn is_symmetric(&self) -> bool {
        (**self).is_symmetric()
    }
}

/// Adapts a closure into a [`LinearOperator`].
pub struct FnOperator<F> {
    dim: usize,
    symmetric: bool,
    f: F,
}

impl<F: Fn(&[f64], &mut [f64])> FnOperator<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, symmetric: false, f }
    }

    pub fn symmetric(dim: usize, f: F) -> Self {
        Self { dim, symmetric: true, f }
    }
}

impl<F: Fn(&[f64], &mut [f64])> LinearOperator for FnOperator<F> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        (self.f)(x, y)
    }
    fn is_symmetric(&self) -> bool {
        self.symmetric
    }
}

/// `I - lambda * W` for an inner operator `W`.
pub struct ShiftedOperator<'a, W: ?Sized> {
    pub inner: &'a W,
    pub lambda: f64,
}

impl<W: LinearOperator + ?Sized> LinearOperator for ShiftedOperator<'_, W> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.inner.apply(x, y);
        for (yi, &xi) in y.iter_mut().zip(x) {
            *yi = xi - self.lambda * *yi;
        }
    }
    fn is_symmetric(&self) -> bool {
        self.inner.is_symmetric()
    }
}

/// Outcome of an iterative solve.
///
/// `residual_norm` is the quantity the stopping rule tests: the relative
/// residual `‖b − Ax‖/‖b‖` of the original system for [`cg_solve`], the
/// last increment `‖x_{t+1} − x_t‖` for [`fixed_point_solve`].
#[derive(Clone, Debug, PartialEq)]
pub struct SolveReport {
    pub solution: Vec<f64>,
    pub iterations: usize,
    pub residual_norm: f64,
    pub converged: bool,
}

const LU_BLOCK: usize = 48;

/// LU factorization with partial pivoting, `P A = L U`.
#[derive(Clone, Debug)]
pub struct LuFactorization {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
}

impl LuFactorization {
    /// Blocked right-looking factorization. Fails when a pivot falls below
    /// `n · ε · max|A|`.
    pub fn new(a: &DenseMatrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::DimensionMismatch(format!("LU of a {}x{} matrix", a.rows(), a.cols())));
        }
        let n = a.rows();
        let mut lu = a.as_slice().to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        let threshold = (n as f64) * f64::EPSILON * a.max_abs();

        let mut k0 = 0;
        while k0 < n {
            let kb = LU_BLOCK.min(n - k0);
            // panel factorization on columns k0..k0+kb, rows k0..n
            for k in k0..k0 + kb {
                let (mut piv, mut best) = (k, lu[k * n + k].abs());
                for i in (k + 1)..n {
                    let v = lu[i * n + k].abs();
                    if v > best {
                        best = v;
                        piv = i;
                    }
                }
                if best <= threshold || best == 0.0 {
                    return Err(Error::Singular { column: k, pivot: best });
                }
                if piv != k {
                    swap_rows(&mut lu, n, k, piv);
                    perm.swap(k, piv);
                }
                let pivot = lu[k * n + k];
                let (head, tail) = lu.split_at_mut((k + 1) * n);
                let urow = &head[k * n + k + 1..k * n + k0 + kb];
                for i in (k + 1)..n {
                    let row = &mut tail[(i - k - 1) * n..(i - k) * n];
                    let l = row[k] / pivot;
                    row[k] = l;
                    if l != 0.0 {
                        axpy(-l, urow, &mut row[k + 1..k0 + kb]);
                    }
                }
            }
            let kend = k0 + kb;
            if kend < n {
                // U12 = L11⁻¹ A12
                for k in k0..kend {
                    let (head, tail) = lu.split_at_mut((k + 1) * n);
                    let urow = &head[k * n + kend..(k + 1) * n];
                    for i in (k + 1)..kend {
                        let row = &mut tail[(i - k - 1) * n..(i - k) * n];
                        let l = row[k];
                        if l != 0.0 {
                            axpy(-l, urow, &mut row[kend..]);
                        }
                    }
                }
                // A22 -= L21 U12
                let (head, tail) = lu.split_at_mut(kend * n);
                for row in tail.chunks_exact_mut(n) {
                    let (lpart, rest) = row.split_at_mut(kend);
                    for k in k0..kend {
                        let l = lpart[k];
                        if l != 0.0 {
                            axpy(-l, &head[k * n + kend..(k + 1) * n], rest);
                        }
                    }
                }
            }
            k0 = kend;
        }
        Ok(Self { n, lu, perm })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.n;
        if b.len() != n {
            return Err(Error::DimensionMismatch(format!("rhs of length {} for a {n}x{n} system", b.len())));
        }
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let row = &self.lu[i * n..i * n + i];
            x[i] -= dot(row, &x[..i]);
        }
        for i in (0..n).rev() {
            let row = &self.lu[i * n..(i + 1) * n];
            let s = dot(&row[i + 1..], &x[i + 1..]);
            x[i] = (x[i] - s) / row[i];
        }
        Ok(x)
    }
}

fn swap_rows(data: &mut [f64], n: usize, a: usize, b: usize) {
    let (lo, hi) = (a.min(b), a.max(b));
    let (head, tail) = data.split_at_mut(hi * n);
    head[lo * n..(lo + 1) * n].swap_with_slice(&mut tail[..n]);
}

/// Solves `M x = b` by LU with one step of iterative refinement.
pub fn dense_solve(m: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let lu = LuFactorization::new(m)?;
    let mut x = lu.solve(b)?;
    let mut r = m.mul_vec(&x)?;
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let d = lu.solve(&r)?;
    for (xi, di) in x.iter_mut().zip(d) {
        *xi += di;
    }
    Ok(x)
}

/// Krylov solve of `A x = b` from `x₀ = 0`.
///
/// Symmetric operators (per [`LinearOperator::is_symmetric`]) use classic
/// conjugate gradients. Anything else uses BiCGSTAB, which only needs
/// forward applications of `A`. Either way the reported residual is
/// recomputed against the original system.
pub fn cg_solve<A: LinearOperator + ?Sized>(a: &A, b: &[f64], tol: f64, max_iter: usize) -> Result<SolveReport> {
    let n = a.dim();
    if b.len() != n {
        return Err(Error::DimensionMismatch(format!("rhs of length {} for operator of dim {n}", b.len())));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        return Ok(SolveReport { solution: vec![0.0; n], iterations: 0, residual_norm: 0.0, converged: true });
    }
    let (x, iterations) = if a.is_symmetric() {
        conjugate_gradient(a, b, tol * bnorm, max_iter)
    } else {
        bicgstab(a, b, tol * bnorm, max_iter)
    };
    let mut ax = vec![0.0; n];
    a.apply(&x, &mut ax);
    let res = b.iter().zip(&ax).map(|(bi, ai)| (bi - ai) * (bi - ai)).sum::<f64>().sqrt() / bnorm;
    Ok(SolveReport { solution: x, iterations, residual_norm: res, converged: res <= tol })
}

fn conjugate_gradient<A: LinearOperator + ?Sized>(a: &A, b: &[f64], abs_tol: f64, max_iter: usize) -> (Vec<f64>, usize) {
    let n = b.len();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    let mut rr = dot(&r, &r);
    let mut it = 0;
    while it < max_iter && rr.sqrt() > abs_tol {
        a.apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap == 0.0 {
            break;
        }
        let alpha = rr / pap;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut r);
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        for (pi, &ri) in p.iter_mut().zip(&r) {
            *pi = ri + beta * *pi;
        }
        rr = rr_new;
        it += 1;
    }
    (x, it)
}

fn bicgstab<A: LinearOperator + ?Sized>(a: &A, b: &[f64], abs_tol: f64, max_iter: usize) -> (Vec<f64>, usize) {
    let n = b.len();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut r_hat = r.clone();
    let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut t = vec![0.0; n];
    let mut it = 0;
    while it < max_iter && norm2(&r) > abs_tol {
        it += 1;
        let mut rho_new = dot(&r_hat, &r);
        if rho_new.abs() < 1e-300 {
            // shadow residual became orthogonal; restart from the current residual
            r_hat.copy_from_slice(&r);
            rho_new = dot(&r, &r);
            p.fill(0.0);
            v.fill(0.0);
            rho = 1.0;
            alpha = 1.0;
            omega = 1.0;
        }
        let beta = (rho_new / rho) * (alpha / omega);
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        a.apply(&p, &mut v);
        let denom = dot(&r_hat, &v);
        if denom == 0.0 {
            break;
        }
        alpha = rho_new / denom;
        for i in 0..n {
            s[i] = r[i] - alpha * v[i];
        }
        if norm2(&s) <= abs_tol {
            axpy(alpha, &p, &mut x);
            r.copy_from_slice(&s);
            break;
        }
        a.apply(&s, &mut t);
        let tt = dot(&t, &t);
        omega = if tt > 0.0 { dot(&t, &s) / tt } else { 0.0 };
        for i in 0..n {
            x[i] += alpha * p[i] + omega * s[i];
            r[i] = s[i] - omega * t[i];
        }
        if omega == 0.0 {
            break;
        }
        rho = rho_new;
    }
    (x, it)
}

/// Growth factor past which [`fixed_point_solve`] declares divergence.
pub const DIVERGENCE_FACTOR: f64 = 1e12;

/// Iterates `x_{t+1} = p + λ W x_t` from `x₀ = p` until
/// `‖x_{t+1} − x_t‖₂ < tol`.
pub fn fixed_point_solve<W: LinearOperator + ?Sized>(
    w: &W,
    p: &[f64],
    lambda: f64,
    tol: f64,
    max_iter: usize,
) -> Result<SolveReport> {
    let n = w.dim();
    if p.len() != n {
        return Err(Error::DimensionMismatch(format!("start vector of length {} for operator of dim {n}", p.len())));
    }
    if !(lambda >= 0.0) || !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("need lambda >= 0 and tol > 0 (got {lambda}, {tol})")));
    }
    let limit = DIVERGENCE_FACTOR * norm2(p).max(f64::MIN_POSITIVE);
    let mut x = p.to_vec();
    let mut next = vec![0.0; n];
    let mut step = f64::INFINITY;
    let mut it = 0;
    while it < max_iter {
        w.apply(&x, &mut next);
        let mut diff = 0.0;
        for i in 0..n {
            let v = p[i] + lambda * next[i];
            diff += (v - x[i]) * (v - x[i]);
            next[i] = v;
        }
        std::mem::swap(&mut x, &mut next);
        it += 1;
        step = diff.sqrt();
        if !step.is_finite() || norm2(&x) > limit {
            return Err(Error::Diverged {
                iterations: it,
                lambda,
                xi_max: spectral_radius_estimate(w, n, 100),
            });
        }
        if step < tol {
            break;
        }
    }
    Ok(SolveReport { solution: x, iterations: it, residual_norm: step, converged: step < tol })
}

/// Power-method estimate of the largest eigenvalue magnitude.
pub fn spectral_radius_estimate<A: LinearOperator + ?Sized>(a: &A, dim: usize, iters: usize) -> f64 {
    if dim == 0 {
        return 0.0;
    }
    let mut x: Vec<f64> = (0..dim).map(|i| 1.0 + 0.01 * ((i as f64) * 0.7).sin()).collect();
    let nx = norm2(&x);
    x.iter_mut().for_each(|v| *v /= nx);
    let mut y = vec![0.0; dim];
    let mut estimate = 0.0;
    for _ in 0..iters.max(1) {
        a.apply(&x, &mut y);
        let ny = norm2(&y);
        if ny == 0.0 || !ny.is_finite() {
            return if ny == 0.0 { 0.0 } else { f64::INFINITY };
        }
        estimate = ny;
        for (xi, yi) in x.iter_mut().zip(&y) {
            *xi = yi / ny;
        }
    }
    estimate
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lu_identity_and_scaled_identity() {
        let b = vec![1.0, -2.0, 3.0];
        assert_eq!(dense_solve(&DenseMatrix::identity(3), &b).unwrap(), b);
        let x = dense_solve(&DenseMatrix::identity(3).scale(2.0), &[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(x, vec![0.5, 0.5, 0.5]);
    }

    #[test]
    fn lu_detects_singular() {
        let m = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert!(matches!(dense_solve(&m, &[1.0, 1.0]), Err(Error::Singular { .. })));
        assert!(dense_solve(&DenseMatrix::zeros(2, 2), &[1.0, 1.0]).is_err());
    }

    #[test]
    fn lu_blocked_path_needs_pivoting() {
        // zero leading diagonal forces pivots across block boundaries
        let n = 130;
        let m = DenseMatrix::from_fn(n, n, |i, j| {
            if i == j {
                if i % 2 == 0 { 0.0 } else { 3.0 }
            } else {
                1.0 / (1.0 + (i as f64 - j as f64).abs())
            }
        });
        let b: Vec<f64> = (0..n).map(|i| (i as f64).cos()).collect();
        let x = dense_solve(&m, &b).unwrap();
        let mx = m.mul_vec(&x).unwrap();
        let res = norm2(&mx.iter().zip(&b).map(|(a, c)| a - c).collect::<Vec<_>>());
        assert!(res <= 1e-10 * (1.0 + norm2(&b)), "residual {res}");
    }

    #[test]
    fn cg_identity_one_iteration() {
        let id = DenseMatrix::identity(4);
        let op = FnOperator::symmetric(4, |x: &[f64], y: &mut [f64]| id.apply(x, y));
        let b = [1.0, 2.0, 3.0, 4.0];
        let rep = cg_solve(&op, &b, 1e-12, 10).unwrap();
        assert!(rep.converged);
        assert!(rep.iterations <= 1);
        assert_eq!(rep.solution, b.to_vec());
    }

    #[test]
    fn cg_zero_rhs() {
        let rep = cg_solve(&DenseMatrix::identity(3), &[0.0; 3], 1e-6, 5).unwrap();
        assert!(rep.converged);
        assert_eq!(rep.solution, vec![0.0; 3]);
    }

    #[test]
    fn fixed_point_lambda_zero_is_one_step() {
        let w = DenseMatrix::from_fn(3, 3, |_, _| 1.0);
        let p = [0.2, 0.3, 0.5];
        let rep = fixed_point_solve(&w, &p, 0.0, 1e-10, 10).unwrap();
        assert_eq!(rep.iterations, 1);
        assert_eq!(rep.solution, p.to_vec());
    }

    #[test]
    fn fixed_point_reports_divergence() {
        let w = DenseMatrix::identity(2).scale(3.0);
        let err = fixed_point_solve(&w, &[1.0, 1.0], 1.0, 1e-8, 10_000).unwrap_err();
        match err {
            Error::Diverged { xi_max, .. } => assert!((xi_max - 3.0).abs() < 1e-6),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn fixed_point_exhaustion_is_not_an_error() {
        let w = DenseMatrix::identity(2).scale(0.99);
        let rep = fixed_point_solve(&w, &[1.0, 1.0], 1.0, 1e-14, 3).unwrap();
        assert!(!rep.converged);
        assert_eq!(rep.iterations, 3);
    }

    #[test]
    fn power_method_basics() {
        assert!((spectral_radius_estimate(&DenseMatrix::from_diag(&[2.0, 1.0]), 2, 50) - 2.0).abs() < 1e-6);
        assert_eq!(spectral_radius_estimate(&DenseMatrix::zeros(3, 3), 3, 10), 0.0);
        let stoch = DenseMatrix::from_rows(&[vec![0.5, 0.5, 0.0], vec![0.2, 0.3, 0.5], vec![0.0, 1.0, 0.0]]).unwrap();
        assert!((spectral_radius_estimate(&stoch, 3, 500) - 1.0).abs() < 1e-8);
    }
}
