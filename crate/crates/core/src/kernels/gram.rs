use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{complement, Graph};
use crate::linalg::{sym_eig, DenseMatrix};

/// Relative tolerance of [`psd_check`], scaled by `|trace|`.
pub const PSD_RELATIVE_TOL: f64 = 1e-8;

/// Symmetric matrix of pairwise kernel values with item identifiers.
#[derive(Clone, Debug, PartialEq)]
pub struct GramMatrix {
    pub values: DenseMatrix,
    pub ids: Vec<String>,
}

impl GramMatrix {
    pub fn size(&self) -> usize {
        self.ids.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values.get(i, j)
    }

    pub fn with_ids(mut self, ids: Vec<String>) -> Result<Self> {
        if ids.len() != self.size() {
            return Err(Error::DimensionMismatch(format!("{} ids for a {}x{} Gram matrix", ids.len(), self.size(), self.size())));
        }
        self.ids = ids;
        Ok(self)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PsdReport {
    pub min_eigenvalue: f64,
    pub trace: f64,
    /// `min_eigenvalue ≥ −1e-8·|trace|`.
    pub is_psd: bool,
}

/// Evaluates `kernel` on every unordered pair of `items` (diagonal
/// included) and mirrors the upper triangle. With `parallel` the pairs run
/// on the rayon pool; the result does not depend on evaluation order.
/// The first failing pair in row-major order is reported.
pub fn gram_matrix<T, K>(items: &[T], kernel: K, parallel: bool) -> Result<GramMatrix>
where
    T: Sync,
    K: Fn(&T, &T) -> Result<f64> + Sync,
{
    let m = items.len();
    let pairs: Vec<(usize, usize)> = (0..m).flat_map(|i| (i..m).map(move |j| (i, j))).collect();
    let eval = |&(i, j): &(usize, usize)| {
        kernel(&items[i], &items[j])
            .and_then(|v| if v.is_finite() { Ok(v) } else { Err(Error::NonFinite("kernel value".into())) })
            .map_err(|e| Error::Pair { i, j, source: Box::new(e) })
    };
    let values: Vec<Result<f64>> =
        if parallel { pairs.par_iter().map(eval).collect() } else { pairs.iter().map(eval).collect() };
    let mut out = DenseMatrix::zeros(m, m);
    for (&(i, j), v) in pairs.iter().zip(values) {
        let v = v?;
        out.set(i, j, v);
        out.set(j, i, v);
    }
    Ok(GramMatrix { values: out, ids: (0..m).map(|i| i.to_string()).collect() })
}

/// Smallest eigenvalue of a Gram matrix and the PSD verdict.
pub fn psd_check(gram: &GramMatrix) -> Result<PsdReport> {
    if gram.size() == 0 {
        return Ok(PsdReport { min_eigenvalue: 0.0, trace: 0.0, is_psd: true });
    }
    let eig = sym_eig(&gram.values.symmetrize())?;
    let min_eigenvalue = eig.eigenvalues[0];
    let trace = gram.values.trace();
    Ok(PsdReport { min_eigenvalue, trace, is_psd: min_eigenvalue >= -PSD_RELATIVE_TOL * trace.abs() })
}

/// `k(G, G′) + k(Ḡ, Ḡ′)` with `Ḡ` the complement graph.
pub fn composite_kernel(g: &Graph, h: &Graph, base: impl Fn(&Graph, &Graph) -> Result<f64>) -> Result<f64> {
    Ok(base(g, h)? + base(&complement(g)?, &complement(h)?)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{random_walk_kernel, KernelConfig, Method};

    #[test]
    fn gram_is_symmetric_and_order_free() {
        let xs: Vec<f64> = (0..7).map(|i| i as f64 * 0.3).collect();
        let k = |a: &f64, b: &f64| Ok((-(a - b).powi(2)).exp());
        let g1 = gram_matrix(&xs, k, false).unwrap();
        let g2 = gram_matrix(&xs, k, true).unwrap();
        assert_eq!(g1, g2);
        assert!(g1.values.is_symmetric(0.0));
        assert!(psd_check(&g1).unwrap().is_psd);
        let single = gram_matrix(&xs[..1], k, true).unwrap();
        assert_eq!(single.size(), 1);
        assert!(psd_check(&single).unwrap().is_psd);
    }

    #[test]
    fn failing_pair_is_identified() {
        let xs = [0.0, 1.0, 2.0];
        let err = gram_matrix(&xs, |a: &f64, b: &f64| {
            if *a == 1.0 && *b == 2.0 {
                Err(Error::InvalidArgument("boom".into()))
            } else {
                Ok(1.0)
            }
        }, true)
        .unwrap_err();
        assert!(matches!(err, Error::Pair { i: 1, j: 2, .. }));
    }

    #[test]
    fn indefinite_matrix_fails_check() {
        let g = GramMatrix { values: DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap(), ids: vec!["a".into(), "b".into()] };
        let r = psd_check(&g).unwrap();
        assert!(!r.is_psd);
        assert!((r.min_eigenvalue + 1.0).abs() < 1e-12);
    }

    #[test]
    fn composite_cases() {
        let cfg = KernelConfig { lambda: 0.01, method: Method::Direct, ..KernelConfig::default() };
        let base = |a: &Graph, b: &Graph| random_walk_kernel(a, b, &cfg).map(|r| r.value);
        let path = Graph::undirected(3, &[(0, 1), (1, 2)]).unwrap();
        let tri = Graph::complete(3);
        let v = composite_kernel(&path, &tri, base).unwrap();
        let expected = base(&path, &tri).unwrap() + base(&complement(&path).unwrap(), &Graph::edgeless(3)).unwrap();
        assert!((v - expected).abs() < 1e-15);
        assert!((v - composite_kernel(&tri, &path, base).unwrap()).abs() < 1e-15);
        // the complement pair is edgeless on one side: only the k = 0 term
        let both = composite_kernel(&tri, &Graph::complete(2), base).unwrap();
        assert!((both - base(&tri, &Graph::complete(2)).unwrap() - 1.0 / 6.0).abs() < 1e-15);
    }
}
