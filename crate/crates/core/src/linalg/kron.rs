//! Kronecker-product algebra and the vec trick.
//!
//! Vectors are column-stacked: entry `j * rows + i` of `vec(M)` is `M[i][j]`.
//! With that layout `(A ⊗ B) vec(R) = vec(B R Aᵀ)`, which is what
//! [`kron_mat_vec`] evaluates without ever forming `A ⊗ B`.

use crate::error::{Error, Result};
use crate::linalg::dense::{axpy, DenseMatrix};
use crate::linalg::sparse::SparseMatrix;

/// Row-wise read access shared by dense and sparse matrices.
pub trait MatrixRef {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    /// Visits the stored entries of row `i` in increasing column order.
    fn for_row(&self, i: usize, f: impl FnMut(usize, f64));
}

impl MatrixRef for DenseMatrix {
    fn nrows(&self) -> usize {
        self.rows()
    }
    fn ncols(&self) -> usize {
        self.cols()
    }
    #[inline]
    fn for_row(&self, i: usize, mut f: impl FnMut(usize, f64)) {
        for (j, &v) in self.row(i).iter().enumerate() {
            if v != 0.0 {
                f(j, v);
            }
        }
    }
}

impl MatrixRef for SparseMatrix {
    fn nrows(&self) -> usize {
        self.rows()
    }
    fn ncols(&self) -> usize {
        self.cols()
    }
    #[inline]
    fn for_row(&self, i: usize, mut f: impl FnMut(usize, f64)) {
        let (c, v) = self.row(i);
        for (&j, &x) in c.iter().zip(v) {
            f(j, x);
        }
    }
}

impl<M: MatrixRef> MatrixRef for &M {
    fn nrows(&self) -> usize {
        (**self).nrows()
    }
    fn ncols(&self) -> usize {
        (**self).ncols()
    }
    fn for_row(&self, i: usize, f: impl FnMut(usize, f64)) {
        (**self).for_row(i, f)
    }
}

/// Column-stacking operator.
pub fn vec(m: &DenseMatrix) -> Vec<f64> {
    let (r, c) = (m.rows(), m.cols());
    let mut out = vec![0.0; r * c];
    for i in 0..r {
        for (j, &v) in m.row(i).iter().enumerate() {
            out[j * r + i] = v;
        }
    }
    out
}

/// Inverse of [`vec`].
pub fn unvec(v: &[f64], rows: usize, cols: usize) -> Result<DenseMatrix> {
    if v.len() != rows * cols {
        return Err(Error::DimensionMismatch(format!(
            "vector of length {} cannot be reshaped to {}x{}",
            v.len(),
            rows,
            cols
        )));
    }
    Ok(DenseMatrix::from_fn(rows, cols, |i, j| v[j * rows + i]))
}

/// Kronecker product, sum and Hadamard product for a matrix carrier.
pub trait KronAlgebra: Sized {
    fn kron(&self, other: &Self) -> Self;
    /// `A ⊕ B = A ⊗ I_B + I_A ⊗ B`, identities sized like the partner
    /// operands. Both operands must be square.
    fn kron_sum(&self, other: &Self) -> Result<Self>;
    fn hadamard(&self, other: &Self) -> Result<Self>;
}

impl KronAlgebra for DenseMatrix {
    fn kron(&self, other: &Self) -> Self {
        let (n, m, p, q) = (self.rows(), self.cols(), other.rows(), other.cols());
        let mut out = DenseMatrix::zeros(n * p, m * q);
        for i in 0..n {
            for j in 0..m {
                let a = self.get(i, j);
                if a == 0.0 {
                    continue;
                }
                for k in 0..p {
                    let brow = other.row(k);
                    let orow = &mut out.row_mut(i * p + k)[j * q..(j + 1) * q];
                    for (o, &b) in orow.iter_mut().zip(brow) {
                        *o = a * b;
                    }
                }
            }
        }
        out
    }

    fn kron_sum(&self, other: &Self) -> Result<Self> {
        require_square(self.rows(), self.cols())?;
        require_square(other.rows(), other.cols())?;
        let left = self.kron(&DenseMatrix::identity(other.rows()));
        let right = DenseMatrix::identity(self.rows()).kron(other);
        left.add(&right)
    }

    fn hadamard(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }
}

impl KronAlgebra for SparseMatrix {
    fn kron(&self, other: &Self) -> Self {
        let (n, p, q) = (self.rows(), other.rows(), other.cols());
        let mut lists = Vec::with_capacity(n * p);
        for i in 0..n {
            let (ca, va) = self.row(i);
            for k in 0..p {
                let (cb, vb) = other.row(k);
                let mut row = Vec::with_capacity(ca.len() * cb.len());
                for (&j, &a) in ca.iter().zip(va) {
                    for (&l, &b) in cb.iter().zip(vb) {
                        let v = a * b;
                        if v != 0.0 {
                            row.push((j * q + l, v));
                        }
                    }
                }
                lists.push(row);
            }
        }
        SparseMatrix::from_sorted_rows(n * p, self.cols() * q, lists)
    }

    fn kron_sum(&self, other: &Self) -> Result<Self> {
        require_square(self.rows(), self.cols())?;
        require_square(other.rows(), other.cols())?;
        let left = self.kron(&SparseMatrix::identity(other.rows()));
        let right = SparseMatrix::identity(self.rows()).kron(other);
        left.add(&right)
    }

    fn hadamard(&self, other: &Self) -> Result<Self> {
        if self.rows() != other.rows() || self.cols() != other.cols() {
            return Err(Error::DimensionMismatch("hadamard operands differ in shape".into()));
        }
        let lists = (0..self.rows())
            .map(|i| {
                let (c, v) = self.row(i);
                c.iter()
                    .zip(v)
                    .map(|(&j, &a)| (j, a * other.get(i, j)))
                    .filter(|&(_, x)| x != 0.0)
                    .collect()
            })
            .collect();
        Ok(SparseMatrix::from_sorted_rows(self.rows(), self.cols(), lists))
    }
}

fn require_square(r: usize, c: usize) -> Result<()> {
    if r != c {
        return Err(Error::DimensionMismatch(format!("Kronecker sum needs square operands, got {r}x{c}")));
    }
    Ok(())
}

pub fn kron<M: KronAlgebra>(a: &M, b: &M) -> M {
    a.kron(b)
}

pub fn kron_sum<M: KronAlgebra>(a: &M, b: &M) -> Result<M> {
    a.kron_sum(b)
}

pub fn hadamard<M: KronAlgebra>(a: &M, b: &M) -> Result<M> {
    a.hadamard(b)
}

/// `(A ⊗ B) r` via `vec(B · unvec(r) · Aᵀ)`.
///
/// Costs `O(nnz(B)·cols(A) + nnz(A)·rows(B))`: cubic for dense square
/// factors, quadratic when both factors carry `O(n)` nonzeros.
pub fn kron_mat_vec<A: MatrixRef, B: MatrixRef>(a: &A, b: &B, r: &[f64]) -> Result<Vec<f64>> {
    check_kron_dims(a, b, r.len())?;
    let mut out = vec![0.0; a.nrows() * b.nrows()];
    let mut scratch = vec![0.0; b.nrows() * a.ncols()];
    kron_mat_vec_acc(a, b, r, 1.0, &mut scratch, &mut out);
    Ok(out)
}

/// `(Σ_l A_l ⊗ B_l) r`, one vec-trick product per pair.
pub fn sum_kron_mat_vec<A: MatrixRef, B: MatrixRef>(factors: &[(A, B)], r: &[f64]) -> Result<Vec<f64>> {
    let Some((a0, b0)) = factors.first() else {
        return Err(Error::InvalidArgument("empty factor list".into()));
    };
    let (n, p) = (a0.nrows(), b0.nrows());
    for (a, b) in factors {
        check_kron_dims(a, b, r.len())?;
        if a.nrows() != n || b.nrows() != p {
            return Err(Error::DimensionMismatch("factor pairs disagree in output size".into()));
        }
    }
    let mut out = vec![0.0; n * p];
    let mut scratch = vec![0.0; p * a0.ncols()];
    for (a, b) in factors {
        kron_mat_vec_acc(a, b, r, 1.0, &mut scratch, &mut out);
    }
    Ok(out)
}

fn check_kron_dims<A: MatrixRef, B: MatrixRef>(a: &A, b: &B, len: usize) -> Result<()> {
    if len != a.ncols() * b.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "vector of length {} for a Kronecker factor pair with {} x {} columns",
            len,
            a.ncols(),
            b.ncols()
        )));
    }
    Ok(())
}

/// out += alpha · (A ⊗ B) r. `scratch` must hold `rows(B)·cols(A)` values;
/// dimensions are assumed checked.
pub(crate) fn kron_mat_vec_acc<A: MatrixRef, B: MatrixRef>(
    a: &A,
    b: &B,
    r: &[f64],
    alpha: f64,
    scratch: &mut [f64],
    out: &mut [f64],
) {
    let (m, p, q) = (a.ncols(), b.nrows(), b.ncols());
    // T = B R, column k of R is r[k q .. (k+1) q]
    for k in 0..m {
        let rc = &r[k * q..(k + 1) * q];
        let tc = &mut scratch[k * p..(k + 1) * p];
        for (i, t) in tc.iter_mut().enumerate() {
            let mut s = 0.0;
            b.for_row(i, |c, v| s += v * rc[c]);
            *t = s;
        }
    }
    // out column j += alpha Σ_k A[j][k] T[:, k]
    for j in 0..a.nrows() {
        let oc = &mut out[j * p..(j + 1) * p];
        a.for_row(j, |k, v| axpy(alpha * v, &scratch[k * p..(k + 1) * p], oc));
    }
}
