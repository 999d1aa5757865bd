use crate::error::{Error, Result};
use crate::graph::{EdgeLabels, Graph};
use crate::linalg::{FeatureMatrix, SparseMatrix};

/// Weighted adjacency matrix; zero diagonal, symmetric iff undirected.
pub fn adjacency(g: &Graph) -> SparseMatrix {
    let n = g.num_vertices();
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (i, j, w, _) in g.arcs() {
        rows[i].push((j, w));
    }
    for r in &mut rows {
        r.sort_unstable_by_key(|e| e.0);
    }
    SparseMatrix::from_sorted_rows(n, n, rows)
}

/// Weighted (out-)degrees `d_i = Σ_j Ã_ij`.
pub fn degrees(g: &Graph) -> Vec<f64> {
    let mut d = vec![0.0; g.num_vertices()];
    for (i, _, w, _) in g.arcs() {
        d[i] += w;
    }
    d
}

/// Row-stochastic `D⁻¹Ã`. Fails on the first isolated vertex.
pub fn normalized_adjacency(g: &Graph) -> Result<SparseMatrix> {
    let d = degrees(g);
    if let Some(v) = d.iter().position(|&x| x == 0.0) {
        return Err(Error::IsolatedVertex(v));
    }
    Ok(transition_matrix(g))
}

/// `D⁺Ã`: like [`normalized_adjacency`] but isolated vertices keep an
/// all-zero row, so walks that reach them stop.
pub fn transition_matrix(g: &Graph) -> SparseMatrix {
    let inv: Vec<f64> = degrees(g).iter().map(|&x| if x > 0.0 { 1.0 / x } else { 0.0 }).collect();
    adjacency(g).scale_rows(&inv)
}

/// `L̃ = D − Ã`.
pub fn laplacian(g: &Graph) -> Result<SparseMatrix> {
    if g.is_directed() {
        return Err(Error::Directed);
    }
    let d = degrees(g);
    let n = g.num_vertices();
    let a = adjacency(g);
    let rows = (0..n)
        .map(|i| {
            let (c, v) = a.row(i);
            let mut row: Vec<(usize, f64)> = c.iter().zip(v).map(|(&j, &x)| (j, -x)).collect();
            if d[i] != 0.0 {
                let at = row.partition_point(|e| e.0 < i);
                row.insert(at, (i, d[i]));
            }
            row
        })
        .collect();
    Ok(SparseMatrix::from_sorted_rows(n, n, rows))
}

/// `D^{-1/2} L̃ D^{-1/2}`, spectrum in `[0, 2]`.
pub fn normalized_laplacian(g: &Graph) -> Result<SparseMatrix> {
    let l = laplacian(g)?;
    let d = degrees(g);
    if let Some(v) = d.iter().position(|&x| x == 0.0) {
        return Err(Error::IsolatedVertex(v));
    }
    let s: Vec<f64> = d.iter().map(|x| 1.0 / x.sqrt()).collect();
    Ok(l.scale_both(&s, &s))
}

/// Normalized adjacency restricted to edges carrying label `l`.
pub fn label_filtered_adjacency(g: &Graph, l: usize) -> Result<SparseMatrix> {
    let EdgeLabels::Discrete { alphabet, labels } = g.labels() else {
        return Err(Error::Unlabeled);
    };
    if l >= *alphabet {
        return Err(Error::InvalidArgument(format!("label {l} outside alphabet of size {alphabet}")));
    }
    Ok(filtered(g, |k| labels[k] == l))
}

fn filtered(g: &Graph, keep: impl Fn(usize) -> bool) -> SparseMatrix {
    let d = degrees(g);
    let n = g.num_vertices();
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (i, j, w, k) in g.arcs() {
        if keep(k) {
            rows[i].push((j, w / d[i]));
        }
    }
    for r in &mut rows {
        r.sort_unstable_by_key(|e| e.0);
    }
    SparseMatrix::from_sorted_rows(n, n, rows)
}

fn edge_scale(g: &Graph, degree_normalize: bool) -> Vec<f64> {
    // per-arc multiplier indexed like arcs(): w_ij / d_i or w_ij
    let d = degrees(g);
    g.arcs().map(|(i, _, w, _)| if degree_normalize { w / d[i] } else { w }).collect()
}

/// Feature matrix `Φ(X)` of an edge-labeled graph.
///
/// Discrete labels map to one-hot vectors, unlabeled graphs to the single
/// coordinate 1 and vector labels to their stored features. Each entry is
/// then scaled by `w_ij / d_i` (or by `w_ij` without degree
/// normalization). Absent edges map to the zero vector.
pub fn feature_matrix(g: &Graph, degree_normalize: bool) -> FeatureMatrix {
    let n = g.num_vertices();
    let dim = g.labels().dim();
    let mut out = FeatureMatrix::zeros(n, n, dim);
    let scale = edge_scale(g, degree_normalize);
    let mut buf = vec![0.0; dim];
    for ((i, j, _, k), s) in g.arcs().zip(scale) {
        buf.fill(0.0);
        match g.labels() {
            EdgeLabels::None => buf[0] = s,
            EdgeLabels::Discrete { labels, .. } => buf[labels[k]] = s,
            EdgeLabels::Vector { features, .. } => {
                for (b, f) in buf.iter_mut().zip(&features[k]) {
                    *b = f * s;
                }
            }
        }
        out.set(i, j, &buf);
    }
    out
}

/// The coordinate matrices of [`feature_matrix`] in sparse form; their
/// pairwise Kronecker products sum to the direct-product weight matrix.
pub fn weight_factors(g: &Graph, degree_normalize: bool) -> Vec<SparseMatrix> {
    coordinates(g, &edge_scale(g, degree_normalize))
}

/// Coordinates of the raw label features: one-hot indicators for discrete
/// labels, stored vectors for vector labels and the edge pattern for
/// unlabeled graphs. Weights and degrees play no part.
pub fn label_indicators(g: &Graph) -> Vec<SparseMatrix> {
    coordinates(g, &vec![1.0; 2 * g.num_edges()])
}

fn coordinates(g: &Graph, scale: &[f64]) -> Vec<SparseMatrix> {
    let n = g.num_vertices();
    let dim = g.labels().dim();
    let mut rows: Vec<Vec<Vec<(usize, f64)>>> = vec![vec![Vec::new(); n]; dim];
    for ((i, j, _, k), &s) in g.arcs().zip(scale) {
        match g.labels() {
            EdgeLabels::None => rows[0][i].push((j, s)),
            EdgeLabels::Discrete { labels, .. } => rows[labels[k]][i].push((j, s)),
            EdgeLabels::Vector { features, .. } => {
                for (c, f) in features[k].iter().enumerate() {
                    if *f != 0.0 {
                        rows[c][i].push((j, f * s));
                    }
                }
            }
        }
    }
    rows.into_iter()
        .map(|mut coord| {
            for r in &mut coord {
                r.sort_unstable_by_key(|e| e.0);
            }
            SparseMatrix::from_sorted_rows(n, n, coord)
        })
        .collect()
}

/// Uniform start and stop distributions `p = q = 1/n`.
pub fn uniform_start_stop(g: &Graph) -> (Vec<f64>, Vec<f64>) {
    let n = g.num_vertices();
    let v = vec![1.0 / n as f64; n];
    (v.clone(), v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DenseMatrix;

    fn k2() -> Graph {
        Graph::undirected(2, &[(0, 1)]).unwrap()
    }

    fn path3() -> Graph {
        Graph::undirected(3, &[(0, 1), (1, 2)]).unwrap()
    }

    #[test]
    fn adjacency_examples() {
        assert_eq!(adjacency(&k2()).to_dense().as_slice(), &[0.0, 1.0, 1.0, 0.0]);
        assert_eq!(adjacency(&Graph::edgeless(3)).nnz(), 0);
        let a = adjacency(&path3());
        assert_eq!(a.nnz(), 4);
        assert!(a.is_symmetric(0.0));
        assert!(a.check_invariants());
    }

    #[test]
    fn normalized_adjacency_examples() {
        assert_eq!(normalized_adjacency(&k2()).unwrap().to_dense().as_slice(), &[0.0, 1.0, 1.0, 0.0]);
        let a = normalized_adjacency(&path3()).unwrap().to_dense();
        assert_eq!(a.row(1), &[0.5, 0.0, 0.5]);
        let star = Graph::undirected(4, &[(0, 1), (0, 2), (0, 3)]).unwrap();
        let s = normalized_adjacency(&star).unwrap().to_dense();
        assert_eq!(s.row(0), &[0.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]);
        for i in 0..4 {
            assert!((s.row(i).iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        let iso = Graph::undirected(3, &[(0, 1)]).unwrap();
        assert_eq!(normalized_adjacency(&iso), Err(Error::IsolatedVertex(2)));
    }

    #[test]
    fn laplacian_examples() {
        assert_eq!(laplacian(&k2()).unwrap().to_dense().as_slice(), &[1.0, -1.0, -1.0, 1.0]);
        assert_eq!(laplacian(&Graph::edgeless(3)).unwrap().nnz(), 0);
        assert_eq!(laplacian(&Graph::directed(2, &[(0, 1)]).unwrap()), Err(Error::Directed));
        let l = laplacian(&path3()).unwrap();
        assert!(l.check_invariants());
        for s in l.row_sums() {
            assert_eq!(s, 0.0);
        }
        let nl = normalized_laplacian(&path3()).unwrap();
        assert!(nl.is_symmetric(1e-15));
        assert!((nl.get(0, 0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn label_filtering_partitions_normalized_adjacency() {
        let g = Graph::undirected_labeled(3, 3, &[(0, 1, 0), (1, 2, 1), (0, 2, 1)]).unwrap();
        let a = normalized_adjacency(&g).unwrap();
        let l0 = label_filtered_adjacency(&g, 0).unwrap();
        let l1 = label_filtered_adjacency(&g, 1).unwrap();
        let l2 = label_filtered_adjacency(&g, 2).unwrap();
        assert_eq!(l2.nnz(), 0);
        assert_eq!(l0.add(&l1).unwrap(), a);
        assert_eq!(label_filtered_adjacency(&path3(), 0), Err(Error::Unlabeled));
        assert!(label_filtered_adjacency(&g, 3).is_err());

        let single = Graph::undirected_labeled(3, 1, &[(0, 1, 0), (1, 2, 0)]).unwrap();
        assert_eq!(label_filtered_adjacency(&single, 0).unwrap(), normalized_adjacency(&single).unwrap());
    }

    #[test]
    fn feature_matrix_examples() {
        let g = Graph::undirected_labeled(2, 1, &[(0, 1, 0)]).unwrap();
        assert_eq!(feature_matrix(&g, true).get(0, 1), &[1.0]);
        let f = feature_matrix(&path3(), true);
        assert_eq!(f.dim(), 1);
        assert_eq!(f.coordinate(0), normalized_adjacency(&path3()).unwrap().to_dense());

        let tri = Graph::undirected_labeled(3, 2, &[(0, 1, 0), (1, 2, 1), (0, 2, 1)]).unwrap();
        let f = feature_matrix(&tri, true);
        assert_eq!(f.get(0, 1), &[0.5, 0.0]);
        let total = f.coordinate(0).add(&f.coordinate(1)).unwrap();
        assert_eq!(total, normalized_adjacency(&tri).unwrap().to_dense());
        let factors = weight_factors(&tri, true);
        for (l, w) in factors.iter().enumerate() {
            assert_eq!(w.to_dense(), f.coordinate(l));
        }
        assert_eq!(f.get(0, 0), &[0.0, 0.0]);
    }

    #[test]
    fn vector_features_scale_by_degree() {
        let g = Graph::new(
            3,
            false,
            vec![
                crate::graph::Edge { source: 0, target: 1, weight: 1.0 },
                crate::graph::Edge { source: 1, target: 2, weight: 1.0 },
            ],
            EdgeLabels::Vector { dim: 2, features: vec![vec![1.0, 2.0], vec![-1.0, 0.5]] },
        )
        .unwrap();
        let f = feature_matrix(&g, true);
        assert_eq!(f.get(1, 0), &[0.5, 1.0]);
        assert_eq!(f.get(0, 1), &[1.0, 2.0]);
        let raw = feature_matrix(&g, false);
        assert_eq!(raw.get(1, 2), &[-1.0, 0.5]);
        let dense: Vec<DenseMatrix> = weight_factors(&g, true).iter().map(|w| w.to_dense()).collect();
        assert_eq!(dense[1], f.coordinate(1));
    }

    #[test]
    fn uniform_distributions() {
        let (p, q) = uniform_start_stop(&Graph::edgeless(4));
        assert_eq!(p, vec![0.25; 4]);
        assert_eq!(q, p);
        assert_eq!(uniform_start_stop(&Graph::edgeless(1)).0, vec![1.0]);
    }
}
