//! Matrices whose entries are finite-dimensional feature vectors.
//!
//! A [`FeatureMatrix`] is an `rows × cols` grid of vectors in `ℝᵈ`, the
//! concrete form of a label matrix pushed through a feature map. Products
//! that pair two feature entries take their inner product and produce a
//! real matrix; products that pair a feature entry with a real number
//! scale it and stay feature-valued. Every operation below is written
//! straight from its entrywise definition.

use crate::error::{Error, Result};
use crate::linalg::dense::{dot, DenseMatrix};

#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMatrix {
    rows: usize,
    cols: usize,
    dim: usize,
    data: Vec<f64>,
}

impl FeatureMatrix {
    pub fn zeros(rows: usize, cols: usize, dim: usize) -> Self {
        Self { rows, cols, dim, data: vec![0.0; rows * cols * dim] }
    }

    pub fn from_fn(rows: usize, cols: usize, dim: usize, mut f: impl FnMut(usize, usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(rows, cols, dim);
        for i in 0..rows {
            for j in 0..cols {
                for k in 0..dim {
                    m.data[(i * cols + j) * dim + k] = f(i, j, k);
                }
            }
        }
        m
    }

    /// Stacks `dim` real coordinate matrices of equal shape.
    pub fn from_coordinates(coords: &[DenseMatrix]) -> Result<Self> {
        let Some(first) = coords.first() else {
            return Err(Error::InvalidArgument("need at least one coordinate".into()));
        };
        if coords.iter().any(|c| c.rows() != first.rows() || c.cols() != first.cols()) {
            return Err(Error::DimensionMismatch("coordinate matrices differ in shape".into()));
        }
        Ok(Self::from_fn(first.rows(), first.cols(), coords.len(), |i, j, k| coords[k].get(i, j)))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &[f64] {
        let s = (i * self.cols + j) * self.dim;
        &self.data[s..s + self.dim]
    }

    #[inline]
    fn get_mut(&mut self, i: usize, j: usize) -> &mut [f64] {
        let s = (i * self.cols + j) * self.dim;
        &mut self.data[s..s + self.dim]
    }

    pub(crate) fn set(&mut self, i: usize, j: usize, v: &[f64]) {
        self.get_mut(i, j).copy_from_slice(v);
    }

    /// Real matrix of the `k`-th feature coordinate.
    pub fn coordinate(&self, k: usize) -> DenseMatrix {
        DenseMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j)[k])
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, self.dim, |i, j, k| self.get(j, i)[k])
    }

    /// Column-stacked `(rows·cols) × 1` feature vector.
    pub fn vec(&self) -> Self {
        let r = self.rows;
        Self::from_fn(self.rows * self.cols, 1, self.dim, |idx, _, k| self.get(idx % r, idx / r)[k])
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        Ok(Self {
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
            ..self.clone()
        })
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.same_shape(other).is_err() {
            return f64::INFINITY;
        }
        self.data.iter().zip(&other.data).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if (self.rows, self.cols, self.dim) != (other.rows, other.cols, other.dim) {
            return Err(Error::DimensionMismatch(format!(
                "{}x{}x{} vs {}x{}x{}",
                self.rows, self.cols, self.dim, other.rows, other.cols, other.dim
            )));
        }
        Ok(())
    }

    /// `[Φ(A)Φ(B)]_ik = Σ_j ⟨φ(A_ij), φ(B_jk)⟩`.
    pub fn mul_feature(&self, other: &Self) -> Result<DenseMatrix> {
        if self.cols != other.rows || self.dim != other.dim {
            return Err(Error::DimensionMismatch("feature product operands do not conform".into()));
        }
        Ok(DenseMatrix::from_fn(self.rows, other.cols, |i, k| {
            (0..self.cols).map(|j| dot(self.get(i, j), other.get(j, k))).sum()
        }))
    }

    /// `[Φ(A)C]_ik = Σ_j φ(A_ij) C_jk`.
    pub fn mul_real(&self, c: &DenseMatrix) -> Result<Self> {
        if self.cols != c.rows() {
            return Err(Error::DimensionMismatch("feature-real product operands do not conform".into()));
        }
        let mut out = Self::zeros(self.rows, c.cols(), self.dim);
        for i in 0..self.rows {
            for k in 0..c.cols() {
                let acc = out.get_mut(i, k);
                for j in 0..self.cols {
                    let s = c.get(j, k);
                    for (a, &f) in acc.iter_mut().zip(self.get(i, j)) {
                        *a += f * s;
                    }
                }
            }
        }
        Ok(out)
    }

    /// `[CΦ(A)]_ik = Σ_j C_ij φ(A_jk)`.
    pub fn real_mul(c: &DenseMatrix, a: &Self) -> Result<Self> {
        Ok(a.transpose().mul_real(&c.transpose())?.transpose())
    }

    /// `[Φ(A) ⊗ Φ(B)]_{(i p + k), (j q + l)} = ⟨φ(A_ij), φ(B_kl)⟩`.
    pub fn kron_feature(&self, other: &Self) -> Result<DenseMatrix> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch("feature dimensions differ".into()));
        }
        let (p, q) = (other.rows, other.cols);
        Ok(DenseMatrix::from_fn(self.rows * p, self.cols * q, |r, c| {
            dot(self.get(r / p, c / q), other.get(r % p, c % q))
        }))
    }

    /// Heterogeneous `[Φ(A) ⊗ B]_{(i p + k), (j q + l)} = φ(A_ij) B_kl`.
    pub fn kron_real(&self, b: &DenseMatrix) -> Self {
        let (p, q) = (b.rows(), b.cols());
        Self::from_fn(self.rows * p, self.cols * q, self.dim, |r, c, k| {
            self.get(r / p, c / q)[k] * b.get(r % p, c % q)
        })
    }

    /// Heterogeneous `[A ⊗ Φ(B)]_{(i p + k), (j q + l)} = A_ij φ(B_kl)`.
    pub fn real_kron(a: &DenseMatrix, b: &Self) -> Self {
        let (p, q) = (b.rows, b.cols);
        Self::from_fn(a.rows() * p, a.cols() * q, b.dim, |r, c, k| a.get(r / p, c / q) * b.get(r % p, c % q)[k])
    }

    /// `[Φ(A) ⊕ Φ(B)]_{(i p + k), (j q + l)} = φ(A_ij) δ_kl + δ_ij φ(B_kl)`.
    pub fn kron_sum_feature(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch("feature dimensions differ".into()));
        }
        let (p, q) = (other.rows, other.cols);
        Ok(Self::from_fn(self.rows * p, self.cols * q, self.dim, |r, c, k| {
            let (i, kk, j, l) = (r / p, r % p, c / q, c % q);
            let mut v = 0.0;
            if kk == l {
                v += self.get(i, j)[k];
            }
            if i == j {
                v += other.get(kk, l)[k];
            }
            v
        }))
    }

    /// `[Φ(A) ⊙ Φ(B)]_ij = ⟨φ(A_ij), φ(B_ij)⟩`.
    pub fn hadamard_feature(&self, other: &Self) -> Result<DenseMatrix> {
        self.same_shape(other)?;
        Ok(DenseMatrix::from_fn(self.rows, self.cols, |i, j| dot(self.get(i, j), other.get(i, j))))
    }

    /// `[Φ(A) ⊙ C]_ij = φ(A_ij) C_ij`.
    pub fn hadamard_real(&self, c: &DenseMatrix) -> Result<Self> {
        if self.rows != c.rows() || self.cols != c.cols() {
            return Err(Error::DimensionMismatch("hadamard operands differ in shape".into()));
        }
        Ok(Self::from_fn(self.rows, self.cols, self.dim, |i, j, k| self.get(i, j)[k] * c.get(i, j)))
    }
}
