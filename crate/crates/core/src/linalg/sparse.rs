use crate::error::{Error, Result};
use crate::linalg::dense::DenseMatrix;

/// Compressed sparse row matrix.
///
/// Column indices are strictly increasing within each row and no explicit
/// zeros are stored.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, indptr: vec![0; rows + 1], indices: Vec::new(), values: Vec::new() }
    }

    pub fn identity(n: usize) -> Self {
        Self::scaled_identity(n, 1.0)
    }

    pub fn scaled_identity(n: usize, s: f64) -> Self {
        if s == 0.0 {
            return Self::zeros(n, n);
        }
        Self { rows: n, cols: n, indptr: (0..=n).collect(), indices: (0..n).collect(), values: vec![s; n] }
    }

    /// Builds a matrix from `(row, col, value)` triplets. Duplicates are
    /// summed and entries that end up exactly zero are dropped.
    pub fn from_triplets(rows: usize, cols: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        for &(i, j, v) in triplets {
            if i >= rows || j >= cols {
                return Err(Error::DimensionMismatch(format!("entry ({i}, {j}) outside {rows}x{cols}")));
            }
            if !v.is_finite() {
                return Err(Error::NonFinite(format!("entry ({i}, {j})")));
            }
        }
        let mut sorted: Vec<(usize, usize, f64)> = triplets.to_vec();
        sorted.sort_unstable_by_key(|&(i, j, _)| (i, j));
        let mut indptr = vec![0usize; rows + 1];
        let mut indices = Vec::with_capacity(sorted.len());
        let mut values = Vec::with_capacity(sorted.len());
        let mut k = 0;
        while k < sorted.len() {
            let (i, j, mut v) = sorted[k];
            k += 1;
            while k < sorted.len() && sorted[k].0 == i && sorted[k].1 == j {
                v += sorted[k].2;
                k += 1;
            }
            if v != 0.0 {
                indices.push(j);
                values.push(v);
                indptr[i + 1] += 1;
            }
        }
        for i in 0..rows {
            indptr[i + 1] += indptr[i];
        }
        Ok(Self { rows, cols, indptr, indices, values })
    }

    /// Builds from per-row `(col, value)` lists that are already sorted and
    /// zero-free. Used by internal constructors that guarantee the invariants.
    pub(crate) fn from_sorted_rows(rows: usize, cols: usize, row_lists: Vec<Vec<(usize, f64)>>) -> Self {
        debug_assert_eq!(row_lists.len(), rows);
        let nnz = row_lists.iter().map(Vec::len).sum();
        let mut indptr = Vec::with_capacity(rows + 1);
        let mut indices = Vec::with_capacity(nnz);
        let mut values = Vec::with_capacity(nnz);
        indptr.push(0);
        for list in row_lists {
            for (j, v) in list {
                debug_assert!(v != 0.0 && v.is_finite());
                indices.push(j);
                values.push(v);
            }
            indptr.push(indices.len());
        }
        Self { rows, cols, indptr, indices, values }
    }

    pub fn from_dense(m: &DenseMatrix) -> Self {
        let lists = (0..m.rows())
            .map(|i| m.row(i).iter().enumerate().filter(|(_, &v)| v != 0.0).map(|(j, &v)| (j, v)).collect())
            .collect();
        Self::from_sorted_rows(m.rows(), m.cols(), lists)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Column indices and values stored in row `i`.
    #[inline]
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (s, e) = (self.indptr[i], self.indptr[i + 1]);
        (&self.indices[s..e], &self.values[s..e])
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.rows).flat_map(move |i| {
            let (c, v) = self.row(i);
            c.iter().zip(v).map(move |(&j, &x)| (i, j, x))
        })
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (c, v) = self.row(i);
        c.binary_search(&j).map_or(0.0, |k| v[k])
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.rows, self.cols);
        for (i, j, v) in self.iter() {
            m.set(i, j, v);
        }
        m
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut lists: Vec<Vec<(usize, f64)>> = vec![Vec::new(); self.cols];
        for (i, j, v) in self.iter() {
            lists[j].push((i, v));
        }
        Self::from_sorted_rows(self.cols, self.rows, lists)
    }

    pub fn scale(&self, s: f64) -> SparseMatrix {
        if s == 0.0 {
            return Self::zeros(self.rows, self.cols);
        }
        let mut out = self.clone();
        for v in &mut out.values {
            *v *= s;
        }
        out
    }

    /// Scales row `i` by `d[i]`, dropping rows whose factor is zero.
    pub fn scale_rows(&self, d: &[f64]) -> SparseMatrix {
        let lists = (0..self.rows)
            .map(|i| {
                let (c, v) = self.row(i);
                if d[i] == 0.0 {
                    Vec::new()
                } else {
                    c.iter().zip(v).map(|(&j, &x)| (j, x * d[i])).filter(|&(_, x)| x != 0.0).collect()
                }
            })
            .collect();
        Self::from_sorted_rows(self.rows, self.cols, lists)
    }

    /// D_left · A · D_right with diagonal scalings.
    pub fn scale_both(&self, left: &[f64], right: &[f64]) -> SparseMatrix {
        let lists = (0..self.rows)
            .map(|i| {
                let (c, v) = self.row(i);
                c.iter().zip(v).map(|(&j, &x)| (j, left[i] * x * right[j])).filter(|&(_, x)| x != 0.0).collect()
            })
            .collect();
        Self::from_sorted_rows(self.rows, self.cols, lists)
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.rows).map(|i| self.row(i).1.iter().sum()).collect()
    }

    pub fn add(&self, other: &SparseMatrix) -> Result<SparseMatrix> {
        self.combine(other, 1.0, 1.0)
    }

    /// alpha·self + beta·other
    pub fn combine(&self, other: &SparseMatrix, alpha: f64, beta: f64) -> Result<SparseMatrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let lists = (0..self.rows)
            .map(|i| {
                let (ca, va) = self.row(i);
                let (cb, vb) = other.row(i);
                let mut out = Vec::with_capacity(ca.len() + cb.len());
                let (mut p, mut q) = (0, 0);
                while p < ca.len() || q < cb.len() {
                    let (j, v) = if q >= cb.len() || (p < ca.len() && ca[p] < cb[q]) {
                        p += 1;
                        (ca[p - 1], alpha * va[p - 1])
                    } else if p >= ca.len() || cb[q] < ca[p] {
                        q += 1;
                        (cb[q - 1], beta * vb[q - 1])
                    } else {
                        p += 1;
                        q += 1;
                        (ca[p - 1], alpha * va[p - 1] + beta * vb[q - 1])
                    };
                    if v != 0.0 {
                        out.push((j, v));
                    }
                }
                out
            })
            .collect();
        Ok(Self::from_sorted_rows(self.rows, self.cols, lists))
    }

    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix times vector of length {}",
                self.rows,
                self.cols,
                x.len()
            )));
        }
        let mut y = vec![0.0; self.rows];
        self.mul_vec_into(x, &mut y);
        Ok(y)
    }

    #[inline]
    pub(crate) fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let (c, v) = self.row(i);
            *yi = c.iter().zip(v).map(|(&j, &a)| a * x[j]).sum();
        }
    }

    pub fn matmul(&self, other: &SparseMatrix) -> Result<SparseMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut acc = vec![0.0; other.cols];
        let mut touched = vec![false; other.cols];
        let mut cols_used = Vec::new();
        let lists = (0..self.rows)
            .map(|i| {
                let (ca, va) = self.row(i);
                for (&k, &a) in ca.iter().zip(va) {
                    let (cb, vb) = other.row(k);
                    for (&j, &b) in cb.iter().zip(vb) {
                        if !touched[j] {
                            touched[j] = true;
                            cols_used.push(j);
                        }
                        acc[j] += a * b;
                    }
                }
                cols_used.sort_unstable();
                let row: Vec<(usize, f64)> =
                    cols_used.iter().map(|&j| (j, acc[j])).filter(|&(_, v)| v != 0.0).collect();
                for &j in &cols_used {
                    acc[j] = 0.0;
                    touched[j] = false;
                }
                cols_used.clear();
                row
            })
            .collect();
        Ok(Self::from_sorted_rows(self.rows, other.cols, lists))
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows).map(|i| self.row(i).1.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.rows == self.cols && self.iter().all(|(i, j, v)| (v - self.get(j, i)).abs() <= tol)
    }

    /// Checks the storage invariants; used by tests and debug assertions.
    pub fn check_invariants(&self) -> bool {
        self.indptr.len() == self.rows + 1
            && self.indptr[self.rows] == self.values.len()
            && self.indices.len() == self.values.len()
            && (0..self.rows).all(|i| {
                let (c, v) = self.row(i);
                c.windows(2).all(|w| w[0] < w[1])
                    && c.iter().all(|&j| j < self.cols)
                    && v.iter().all(|x| *x != 0.0 && x.is_finite())
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplets_merge_duplicates_and_drop_zeros() {
        let m = SparseMatrix::from_triplets(2, 3, &[(0, 2, 1.0), (0, 0, 2.0), (0, 2, -1.0), (1, 1, 3.0), (1, 1, 1.0)])
            .unwrap();
        assert_eq!(m.nnz(), 2);
        assert_eq!(m.get(0, 0), 2.0);
        assert_eq!(m.get(0, 2), 0.0);
        assert_eq!(m.get(1, 1), 4.0);
        assert!(m.check_invariants());
    }

    #[test]
    fn out_of_range_triplet_is_rejected() {
        assert!(SparseMatrix::from_triplets(2, 2, &[(2, 0, 1.0)]).is_err());
        assert!(SparseMatrix::from_triplets(2, 2, &[(0, 0, f64::INFINITY)]).is_err());
    }

    #[test]
    fn sparse_products_match_dense() {
        let a = SparseMatrix::from_triplets(3, 3, &[(0, 1, 1.0), (1, 0, 2.0), (1, 2, -1.0), (2, 2, 4.0)]).unwrap();
        let b = a.transpose();
        let prod = a.matmul(&b).unwrap().to_dense();
        let dense = a.to_dense().matmul(&b.to_dense()).unwrap();
        assert_eq!(prod.max_abs_diff(&dense), 0.0);
        let sum = a.combine(&b, 1.0, -1.0).unwrap();
        assert!(sum.check_invariants());
        assert_eq!(sum.to_dense().max_abs_diff(&a.to_dense().sub(&b.to_dense()).unwrap()), 0.0);
    }
}
