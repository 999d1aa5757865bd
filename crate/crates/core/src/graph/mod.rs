//! Graph data model and derived matrices.

mod generate;
pub mod io;
mod matrices;
mod product;

pub use generate::{is_connected, random_graph_set1, random_graph_set2, RngSeed};
pub use matrices::{
    adjacency, degrees, feature_matrix, label_filtered_adjacency, label_indicators, laplacian, normalized_adjacency,
    normalized_laplacian, transition_matrix, uniform_start_stop, weight_factors,
};
pub use product::{cartesian_product, complement, direct_product, CartesianWeight, ProductGraph, ProductKind};

use crate::error::{Error, Result};

/// A weighted edge. Undirected graphs store each edge once with
/// `source < target`; [`Graph::arcs`] yields both orientations.
#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub source: usize,
    pub target: usize,
    pub weight: f64,
}

/// Per-edge labels, aligned with [`Graph::edges`].
#[derive(Clone, Debug, PartialEq)]
pub enum EdgeLabels {
    None,
    /// Label ids in `0..alphabet`.
    Discrete { alphabet: usize, labels: Vec<usize> },
    /// Feature vectors of length `dim`.
    Vector { dim: usize, features: Vec<Vec<f64>> },
}

impl EdgeLabels {
    pub fn is_none(&self) -> bool {
        matches!(self, EdgeLabels::None)
    }

    /// Label-space dimension; 1 for unlabeled graphs.
    pub fn dim(&self) -> usize {
        match self {
            EdgeLabels::None => 1,
            EdgeLabels::Discrete { alphabet, .. } => *alphabet,
            EdgeLabels::Vector { dim, .. } => *dim,
        }
    }
}

/// An immutable simple graph without self-loops.
#[derive(Clone, Debug, PartialEq)]
pub struct Graph {
    n: usize,
    directed: bool,
    edges: Vec<Edge>,
    labels: EdgeLabels,
}

impl Graph {
    /// Validates and canonicalizes an edge list.
    ///
    /// Undirected edges given in both orientations are merged when their
    /// weights and labels agree.
    pub fn new(n: usize, directed: bool, edges: Vec<Edge>, labels: EdgeLabels) -> Result<Self> {
        match &labels {
            EdgeLabels::None => {}
            EdgeLabels::Discrete { alphabet, labels } => {
                if labels.len() != edges.len() {
                    return Err(Error::InvalidGraph("one label per edge required".into()));
                }
                if let Some(l) = labels.iter().find(|&&l| l >= *alphabet) {
                    return Err(Error::InvalidGraph(format!("label {l} outside alphabet of size {alphabet}")));
                }
            }
            EdgeLabels::Vector { dim, features } => {
                if features.len() != edges.len() {
                    return Err(Error::InvalidGraph("one feature vector per edge required".into()));
                }
                if features.iter().any(|f| f.len() != *dim || f.iter().any(|v| !v.is_finite())) {
                    return Err(Error::InvalidGraph(format!("feature vectors must be finite with length {dim}")));
                }
            }
        }
        let mut keyed: Vec<((usize, usize), usize)> = Vec::with_capacity(edges.len());
        for (k, e) in edges.iter().enumerate() {
            if e.source >= n || e.target >= n {
                return Err(Error::InvalidGraph(format!("edge ({}, {}) outside 0..{n}", e.source, e.target)));
            }
            if e.source == e.target {
                return Err(Error::InvalidGraph(format!("self-loop at vertex {}", e.source)));
            }
            if !(e.weight > 0.0) || !e.weight.is_finite() {
                return Err(Error::InvalidGraph(format!(
                    "edge ({}, {}) has non-positive weight {}",
                    e.source, e.target, e.weight
                )));
            }
            let key = if directed { (e.source, e.target) } else { (e.source.min(e.target), e.source.max(e.target)) };
            keyed.push((key, k));
        }
        keyed.sort_by_key(|&(key, k)| (key, k));
        let mut out_edges = Vec::with_capacity(keyed.len());
        let mut kept = Vec::with_capacity(keyed.len());
        for (idx, &(key, k)) in keyed.iter().enumerate() {
            if idx > 0 && keyed[idx - 1].0 == key {
                let prev = keyed[idx - 1].1;
                let same = edges[prev].weight == edges[k].weight && label_eq(&labels, prev, k);
                if directed || !same {
                    return Err(Error::InvalidGraph(format!("duplicate edge ({}, {})", key.0, key.1)));
                }
                continue;
            }
            out_edges.push(Edge { source: key.0, target: key.1, weight: edges[k].weight });
            kept.push(k);
        }
        let labels = match labels {
            EdgeLabels::None => EdgeLabels::None,
            EdgeLabels::Discrete { alphabet, labels } => {
                EdgeLabels::Discrete { alphabet, labels: kept.iter().map(|&k| labels[k]).collect() }
            }
            EdgeLabels::Vector { dim, features } => {
                EdgeLabels::Vector { dim, features: kept.iter().map(|&k| features[k].clone()).collect() }
            }
        };
        Ok(Self { n, directed, edges: out_edges, labels })
    }

    /// Unweighted, unlabeled undirected graph.
    pub fn undirected(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let edges = edges.iter().map(|&(s, t)| Edge { source: s, target: t, weight: 1.0 }).collect();
        Self::new(n, false, edges, EdgeLabels::None)
    }

    /// Unweighted undirected graph with one discrete label per edge.
    pub fn undirected_labeled(n: usize, alphabet: usize, edges: &[(usize, usize, usize)]) -> Result<Self> {
        let labels = edges.iter().map(|e| e.2).collect();
        let edges = edges.iter().map(|&(s, t, _)| Edge { source: s, target: t, weight: 1.0 }).collect();
        Self::new(n, false, edges, EdgeLabels::Discrete { alphabet, labels })
    }

    pub fn directed(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let edges = edges.iter().map(|&(s, t)| Edge { source: s, target: t, weight: 1.0 }).collect();
        Self::new(n, true, edges, EdgeLabels::None)
    }

    pub fn edgeless(n: usize) -> Self {
        Self { n, directed: false, edges: Vec::new(), labels: EdgeLabels::None }
    }

    pub fn complete(n: usize) -> Self {
        let edges = (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| Edge { source: i, target: j, weight: 1.0 }))
            .collect();
        Self { n, directed: false, edges, labels: EdgeLabels::None }
    }

    pub fn num_vertices(&self) -> usize {
        self.n
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn labels(&self) -> &EdgeLabels {
        &self.labels
    }

    /// Every stored edge as `(source, target, weight, edge index)`, with
    /// undirected edges reported in both orientations.
    pub fn arcs(&self) -> impl Iterator<Item = (usize, usize, f64, usize)> + '_ {
        self.edges.iter().enumerate().flat_map(move |(k, e)| {
            let fwd = std::iter::once((e.source, e.target, e.weight, k));
            let bwd = (!self.directed).then_some((e.target, e.source, e.weight, k));
            fwd.chain(bwd)
        })
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        let key = if self.directed { (i, j) } else { (i.min(j), i.max(j)) };
        self.edges.binary_search_by_key(&key, |e| (e.source, e.target)).is_ok()
    }

    /// Drops labels and weights.
    pub fn unlabeled(&self) -> Graph {
        Self {
            n: self.n,
            directed: self.directed,
            edges: self.edges.iter().map(|e| Edge { weight: 1.0, ..e.clone() }).collect(),
            labels: EdgeLabels::None,
        }
    }

    /// Folds vertex labels into discrete edge labels.
    ///
    /// The new label of an edge encodes its old label (0 for unlabeled
    /// graphs) and the labels of both endpoints, the endpoint pair taken
    /// unordered for undirected graphs.
    pub fn with_vertex_labels(&self, vertex_labels: &[usize], num_vertex_labels: usize) -> Result<Graph> {
        if vertex_labels.len() != self.n {
            return Err(Error::InvalidArgument(format!(
                "{} vertex labels for {} vertices",
                vertex_labels.len(),
                self.n
            )));
        }
        if vertex_labels.iter().any(|&l| l >= num_vertex_labels) {
            return Err(Error::InvalidArgument("vertex label outside alphabet".into()));
        }
        let (old_alphabet, old): (usize, Vec<usize>) = match &self.labels {
            EdgeLabels::None => (1, vec![0; self.edges.len()]),
            EdgeLabels::Discrete { alphabet, labels } => (*alphabet, labels.clone()),
            EdgeLabels::Vector { .. } => {
                return Err(Error::InvalidArgument("vertex labels need discrete or absent edge labels".into()))
            }
        };
        let v = num_vertex_labels;
        let labels = self
            .edges
            .iter()
            .zip(&old)
            .map(|(e, &l)| {
                let (a, b) = (vertex_labels[e.source], vertex_labels[e.target]);
                let (a, b) = if self.directed { (a, b) } else { (a.min(b), a.max(b)) };
                (l * v + a) * v + b
            })
            .collect();
        Graph::new(
            self.n,
            self.directed,
            self.edges.clone(),
            EdgeLabels::Discrete { alphabet: old_alphabet * v * v, labels },
        )
    }
}

fn label_eq(labels: &EdgeLabels, a: usize, b: usize) -> bool {
    match labels {
        EdgeLabels::None => true,
        EdgeLabels::Discrete { labels, .. } => labels[a] == labels[b],
        EdgeLabels::Vector { features, .. } => features[a] == features[b],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_self_loops_and_bad_weights() {
        assert!(Graph::undirected(3, &[(1, 1)]).is_err());
        assert!(Graph::undirected(3, &[(0, 3)]).is_err());
        let e = vec![Edge { source: 0, target: 1, weight: 0.0 }];
        assert!(Graph::new(2, false, e, EdgeLabels::None).is_err());
    }

    #[test]
    fn undirected_edges_are_canonical() {
        let g = Graph::undirected(3, &[(2, 1), (0, 1), (1, 2)]).unwrap();
        assert_eq!(g.num_edges(), 2);
        assert!(g.has_edge(1, 2) && g.has_edge(2, 1) && !g.has_edge(0, 2));
        assert_eq!(g.arcs().count(), 4);
    }

    #[test]
    fn conflicting_duplicates_are_rejected() {
        let e = vec![Edge { source: 0, target: 1, weight: 1.0 }, Edge { source: 1, target: 0, weight: 2.0 }];
        assert!(Graph::new(2, false, e, EdgeLabels::None).is_err());
        assert!(Graph::directed(2, &[(0, 1), (0, 1)]).is_err());
        assert!(Graph::directed(2, &[(0, 1), (1, 0)]).is_ok());
    }

    #[test]
    fn label_alphabet_is_enforced() {
        assert!(Graph::undirected_labeled(3, 2, &[(0, 1, 2)]).is_err());
        let g = Graph::undirected_labeled(3, 2, &[(1, 2, 1), (0, 1, 0)]).unwrap();
        // labels follow their edges through canonical sorting
        assert_eq!(g.labels(), &EdgeLabels::Discrete { alphabet: 2, labels: vec![0, 1] });
    }

    #[test]
    fn vertex_labels_fold_into_edges() {
        let g = Graph::undirected(3, &[(0, 1), (1, 2)]).unwrap();
        let h = g.with_vertex_labels(&[0, 1, 0], 2).unwrap();
        match h.labels() {
            EdgeLabels::Discrete { alphabet, labels } => {
                assert_eq!(*alphabet, 4);
                // both edges join a 0-labeled and a 1-labeled vertex
                assert_eq!(labels[0], labels[1]);
            }
            other => panic!("{other:?}"),
        }
    }
}
