use crate::error::{Error, Result};
use crate::linalg::dense::DenseMatrix;

/// Tolerance on |A_ij - A_ji| accepted by [`sym_eig`], relative to
/// `1 + max|A|`.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Spectral decomposition `A = P diag(eigenvalues) Pᵀ` of a symmetric matrix.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Column `i` is the unit eigenvector for `eigenvalues[i]`.
    pub eigenvectors: DenseMatrix,
}

impl EigenDecomposition {
    /// `P f(D) Pᵀ` for a scalar function applied to the spectrum.
    pub fn apply_function(&self, f: impl Fn(f64) -> f64) -> DenseMatrix {
        let n = self.eigenvalues.len();
        let p = &self.eigenvectors;
        let fd: Vec<f64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        let mut out = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let s: f64 = (0..n).map(|k| p.get(i, k) * fd[k] * p.get(j, k)).sum();
                out.set(i, j, s);
                out.set(j, i, s);
            }
        }
        out
    }

    pub fn reconstruct(&self) -> DenseMatrix {
        self.apply_function(|l| l)
    }
}

/// Symmetric eigendecomposition.
pub fn sym_eig(a: &DenseMatrix) -> Result<EigenDecomposition> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!("eigendecomposition of a {}x{} matrix", a.rows(), a.cols())));
    }
    let asym = a.asymmetry();
    if asym > SYMMETRY_TOL * (1.0 + a.max_abs()) {
        return Err(Error::NotSymmetric(asym));
    }
    let n = a.rows();
    if n == 0 {
        return Ok(EigenDecomposition { eigenvalues: Vec::new(), eigenvectors: DenseMatrix::zeros(0, 0) });
    }
    let sym = a.symmetrize();
    let m = nalgebra::DMatrix::from_row_slice(n, n, sym.as_slice());
    let eig = nalgebra::SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let eigenvectors = DenseMatrix::from_fn(n, n, |i, c| eig.eigenvectors[(i, order[c])]);
    Ok(EigenDecomposition { eigenvalues, eigenvectors })
}

/// `exp(t A)` by scaling and squaring of a truncated Taylor series.
///
/// Independent of [`sym_eig`]; used to cross-check the spectral routes.
pub fn matrix_exp_oracle(a: &DenseMatrix, t: f64) -> Result<DenseMatrix> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!("exponential of a {}x{} matrix", a.rows(), a.cols())));
    }
    let n = a.rows();
    let ta = a.scale(t);
    let norm = ta.norm_one();
    let mut squarings = 0u32;
    if norm > 0.25 {
        squarings = (norm / 0.25).log2().ceil() as u32;
    }
    let scaled = ta.scale(0.5f64.powi(squarings as i32));
    // Taylor terms until they stop contributing
    let mut result = DenseMatrix::identity(n);
    let mut term = DenseMatrix::identity(n);
    for k in 1..=40 {
        term = term.matmul_unchecked(&scaled).scale(1.0 / k as f64);
        result = result.add(&term)?;
        if term.max_abs() <= 1e-18 * result.max_abs() {
            break;
        }
    }
    for _ in 0..squarings {
        result = result.matmul_unchecked(&result);
    }
    Ok(result)
}
