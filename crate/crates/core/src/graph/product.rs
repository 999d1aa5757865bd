use crate::error::{Error, Result};
use crate::graph::matrices::{degrees, laplacian, transition_matrix, weight_factors};
use crate::graph::{Edge, EdgeLabels, Graph};
use crate::linalg::kron::kron_mat_vec_acc;
use crate::linalg::{dot, KronAlgebra, LinearOperator, SparseMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProductKind {
    Direct,
    Cartesian,
}

/// Which matrix a Cartesian product is built from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum CartesianWeight {
    /// Degree-normalized (label-filtered) adjacency.
    #[default]
    Adjacency,
    /// Unnormalized Laplacian `D − Ã`, split per label.
    Laplacian,
}

/// Product of two graphs kept in factored form.
///
/// The weight matrix is `W = Σ_k L_k ⊗ R_k` over the stored factor pairs,
/// where `L_k` is `n × n` and `R_k` is `n′ × n′`. Vertex `(i, i′)` has index
/// `i·n′ + i′`. Cartesian products store each Kronecker sum `X ⊕ Y` as the
/// two pairs `(X, I)` and `(I, Y)`.
#[derive(Clone, Debug)]
pub struct ProductGraph {
    kind: ProductKind,
    n: usize,
    n_prime: usize,
    pairs: Vec<(SparseMatrix, SparseMatrix)>,
    dists: [Vec<f64>; 4],
    start: Vec<f64>,
    stop: Vec<f64>,
    symmetrizer: Option<(Vec<f64>, Vec<f64>)>,
}

impl ProductGraph {
    /// Builds from explicit factor pairs with uniform start and stop
    /// distributions.
    pub fn from_pairs(kind: ProductKind, pairs: Vec<(SparseMatrix, SparseMatrix)>) -> Result<Self> {
        let Some((l, r)) = pairs.first() else {
            return Err(Error::InvalidArgument("a product needs at least one factor pair".into()));
        };
        let (n, n_prime) = (l.rows(), r.rows());
        for (a, b) in &pairs {
            if a.rows() != n || a.cols() != n || b.rows() != n_prime || b.cols() != n_prime {
                return Err(Error::DimensionMismatch("factor pairs must be square and of equal sizes".into()));
            }
        }
        let (u, v) = (uniform(n), uniform(n_prime));
        let w = uniform(n * n_prime);
        Ok(Self {
            kind,
            n,
            n_prime,
            pairs,
            dists: [u.clone(), v.clone(), u, v],
            start: w.clone(),
            stop: w,
            symmetrizer: None,
        })
    }

    /// Declares diagonal scalings `e`, `e′` such that every
    /// `diag(e) L_k diag(e)⁻¹` and `diag(e′) R_k diag(e′)⁻¹` is symmetric.
    pub fn with_symmetrizer(mut self, e: Vec<f64>, e_prime: Vec<f64>) -> Result<Self> {
        if e.len() != self.n || e_prime.len() != self.n_prime || e.iter().chain(&e_prime).any(|&x| !(x > 0.0)) {
            return Err(Error::InvalidArgument("symmetrizer must be positive and match the factor sizes".into()));
        }
        let sym = |m: &SparseMatrix, d: &[f64]| {
            let inv: Vec<f64> = d.iter().map(|x| 1.0 / x).collect();
            m.scale_both(d, &inv).is_symmetric(1e-12 * (1.0 + m.norm_inf()))
        };
        if !self.pairs.iter().all(|(l, r)| sym(l, &e) && sym(r, &e_prime)) {
            return Err(Error::InvalidArgument("scaling does not symmetrize the factors".into()));
        }
        self.symmetrizer = Some((e, e_prime));
        Ok(self)
    }

    pub fn symmetrizer(&self) -> Option<(&[f64], &[f64])> {
        self.symmetrizer.as_ref().map(|(a, b)| (a.as_slice(), b.as_slice()))
    }

    /// The factor distributions `(p, p′, q, q′)`.
    pub fn factor_distributions(&self) -> (&[f64], &[f64], &[f64], &[f64]) {
        let [p, pp, q, qp] = &self.dists;
        (p, pp, q, qp)
    }

    /// Replaces start and stop by `p ⊗ p′` and `q ⊗ q′`.
    pub fn with_distributions(mut self, p: &[f64], p_prime: &[f64], q: &[f64], q_prime: &[f64]) -> Result<Self> {
        if p.len() != self.n || q.len() != self.n || p_prime.len() != self.n_prime || q_prime.len() != self.n_prime {
            return Err(Error::DimensionMismatch("distribution lengths do not match the factor graphs".into()));
        }
        for v in [p, p_prime, q, q_prime] {
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite("start/stop distribution".into()));
            }
        }
        self.start = outer(p, p_prime);
        self.stop = outer(q, q_prime);
        self.dists = [p.to_vec(), p_prime.to_vec(), q.to_vec(), q_prime.to_vec()];
        Ok(self)
    }

    pub fn kind(&self) -> ProductKind {
        self.kind
    }

    /// Number of product vertices `n·n′`.
    pub fn num_vertices(&self) -> usize {
        self.n * self.n_prime
    }

    pub fn factor_sizes(&self) -> (usize, usize) {
        (self.n, self.n_prime)
    }

    pub fn pairs(&self) -> &[(SparseMatrix, SparseMatrix)] {
        &self.pairs
    }

    pub fn start(&self) -> &[f64] {
        &self.start
    }

    pub fn stop(&self) -> &[f64] {
        &self.stop
    }

    /// `W x` through the vec identity, without forming `W`.
    pub fn apply_weight(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.num_vertices() {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} for product of size {}",
                x.len(),
                self.num_vertices()
            )));
        }
        let mut y = vec![0.0; x.len()];
        LinearOperator::apply(self, x, &mut y);
        Ok(y)
    }

    /// The explicit sparse weight matrix `Σ_k L_k ⊗ R_k`.
    pub fn weight_matrix(&self) -> SparseMatrix {
        let dim = self.num_vertices();
        let mut acc = SparseMatrix::zeros(dim, dim);
        for (l, r) in &self.pairs {
            acc = acc.add(&l.kron(r)).expect("factor sizes checked on construction");
        }
        acc
    }

    /// Product vertices `(i, i′)` and `(j, j′)` are adjacent when the
    /// weight matrix has a nonzero off-diagonal entry between them.
    pub fn has_edge(&self, (i, ip): (usize, usize), (j, jp): (usize, usize)) -> bool {
        if (i, ip) == (j, jp) {
            return false;
        }
        self.pairs.iter().map(|(l, r)| l.get(i, j) * r.get(ip, jp)).sum::<f64>() != 0.0
    }

    /// The product as an unlabeled graph whose edge weights are the
    /// absolute off-diagonal weight entries.
    pub fn to_graph(&self) -> Result<Graph> {
        let w = self.weight_matrix();
        let directed = !w.is_symmetric(1e-12);
        let edges = w
            .iter()
            .filter(|&(a, b, _)| a != b && (directed || a < b))
            .map(|(a, b, v)| Edge { source: a, target: b, weight: v.abs() })
            .collect();
        Graph::new(self.num_vertices(), directed, edges, EdgeLabels::None)
    }

    /// `q×ᵀ p×`, the zeroth series term.
    pub fn base_term(&self) -> f64 {
        dot(&self.stop, &self.start)
    }
}

impl LinearOperator for ProductGraph {
    fn dim(&self) -> usize {
        self.num_vertices()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        y.fill(0.0);
        let mut scratch = vec![0.0; self.num_vertices()];
        for (l, r) in &self.pairs {
            kron_mat_vec_acc(l, r, x, 1.0, &mut scratch, y);
        }
    }

    fn is_symmetric(&self) -> bool {
        self.pairs.iter().all(|(l, r)| l.is_symmetric(0.0) && r.is_symmetric(0.0))
    }
}

fn uniform(n: usize) -> Vec<f64> {
    vec![1.0 / n as f64; n]
}

fn outer(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().flat_map(|&x| b.iter().map(move |&y| x * y)).collect()
}

fn check_compatible(g: &Graph, h: &Graph) -> Result<()> {
    if g.is_directed() != h.is_directed() {
        return Err(Error::InvalidArgument("product of a directed and an undirected graph".into()));
    }
    let same = match (g.labels(), h.labels()) {
        (EdgeLabels::None, EdgeLabels::None) => true,
        (EdgeLabels::Discrete { alphabet: a, .. }, EdgeLabels::Discrete { alphabet: b, .. }) => a == b,
        (EdgeLabels::Vector { dim: a, .. }, EdgeLabels::Vector { dim: b, .. }) => a == b,
        _ => false,
    };
    if !same {
        return Err(Error::InvalidArgument("graphs carry incompatible edge labels".into()));
    }
    Ok(())
}

/// Direct product with weight matrix `Σ_l lA ⊗ lA′`.
///
/// With `degree_normalize` the factors are normalized per row by vertex
/// degree, so for unlabeled graphs `W× = A ⊗ A′`; otherwise the raw edge
/// weights are used and `W× = Ã ⊗ Ã′`.
pub fn direct_product(g: &Graph, h: &Graph, degree_normalize: bool) -> Result<ProductGraph> {
    check_compatible(g, h)?;
    let pairs = weight_factors(g, degree_normalize).into_iter().zip(weight_factors(h, degree_normalize)).collect();
    let prod = ProductGraph::from_pairs(ProductKind::Direct, pairs)?;
    attach_symmetrizer(prod, g, h, degree_normalize)
}

/// Cartesian product with weight matrix `X ⊕ X′`.
///
/// `X` is the row-normalized adjacency or the Laplacian. Kronecker sums
/// are additive, so label-filtered factors would sum back to the same
/// matrix; labels are therefore ignored.
pub fn cartesian_product(g: &Graph, h: &Graph, weight: CartesianWeight) -> Result<ProductGraph> {
    check_compatible(g, h)?;
    let (n, m) = (g.num_vertices(), h.num_vertices());
    let (x, y) = match weight {
        CartesianWeight::Adjacency => (transition_matrix(g), transition_matrix(h)),
        CartesianWeight::Laplacian => (laplacian(g)?, laplacian(h)?),
    };
    let pairs = vec![(x, SparseMatrix::identity(m)), (SparseMatrix::identity(n), y)];
    let prod = ProductGraph::from_pairs(ProductKind::Cartesian, pairs)?;
    attach_symmetrizer(prod, g, h, weight == CartesianWeight::Adjacency)
}

fn attach_symmetrizer(prod: ProductGraph, g: &Graph, h: &Graph, normalized: bool) -> Result<ProductGraph> {
    if g.is_directed() {
        return Ok(prod);
    }
    let scaling = |g: &Graph| -> Vec<f64> {
        if normalized {
            degrees(g).iter().map(|&d| if d > 0.0 { d.sqrt() } else { 1.0 }).collect()
        } else {
            vec![1.0; g.num_vertices()]
        }
    };
    prod.with_symmetrizer(scaling(g), scaling(h))
}

/// Complement graph on the same vertices: exactly the non-adjacent
/// distinct pairs, all with unit weight.
pub fn complement(g: &Graph) -> Result<Graph> {
    if g.is_directed() {
        return Err(Error::Directed);
    }
    let n = g.num_vertices();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if !g.has_edge(i, j) {
                edges.push(Edge { source: i, target: j, weight: 1.0 });
            }
        }
    }
    Graph::new(n, false, edges, EdgeLabels::None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{adjacency, laplacian, normalized_adjacency};
    use crate::linalg::kron_sum;

    fn k2() -> Graph {
        Graph::undirected(2, &[(0, 1)]).unwrap()
    }

    #[test]
    fn direct_product_of_k2() {
        let p = direct_product(&k2(), &k2(), true).unwrap();
        assert_eq!(p.num_vertices(), 4);
        let g = p.to_graph().unwrap();
        assert_eq!(g.num_edges(), 2);
        // (0,0)-(1,1) and (0,1)-(1,0)
        assert!(g.has_edge(0, 3) && g.has_edge(1, 2));
        assert!(p.has_edge((0, 0), (1, 1)) && !p.has_edge((0, 0), (0, 1)));
        assert_eq!(p.start(), &[0.25; 4]);
    }

    #[test]
    fn figure_one_edge() {
        // vertices 1..4 and 1'..3' mapped to 0-based indices
        let g = Graph::undirected(4, &[(0, 2), (1, 2), (2, 3)]).unwrap();
        let h = Graph::undirected(3, &[(0, 1), (1, 2)]).unwrap();
        let p = direct_product(&g, &h, true).unwrap();
        assert!(p.has_edge((0, 0), (2, 1)));
    }

    #[test]
    fn product_with_edgeless_is_edgeless() {
        let p = direct_product(&k2(), &Graph::edgeless(3), true).unwrap();
        assert_eq!(p.weight_matrix().nnz(), 0);
        assert_eq!(p.to_graph().unwrap().num_edges(), 0);
    }

    #[test]
    fn explicit_matches_kron_of_normalized_adjacency() {
        let g = Graph::undirected(3, &[(0, 1), (1, 2)]).unwrap();
        let h = Graph::undirected(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let p = direct_product(&g, &h, true).unwrap();
        let expected = normalized_adjacency(&g).unwrap().kron(&normalized_adjacency(&h).unwrap());
        assert!(p.weight_matrix().to_dense().max_abs_diff(&expected.to_dense()) < 1e-15);
        let x: Vec<f64> = (0..9).map(|i| (i as f64).sin()).collect();
        let lazy = p.apply_weight(&x).unwrap();
        let eager = expected.mul_vec(&x).unwrap();
        assert!(crate::linalg::max_abs_diff(&lazy, &eager) < 1e-15);
        let raw = direct_product(&g, &h, false).unwrap();
        assert_eq!(raw.weight_matrix(), adjacency(&g).kron(&adjacency(&h)));
    }

    #[test]
    fn cartesian_product_structure() {
        let p = cartesian_product(&k2(), &k2(), CartesianWeight::Adjacency).unwrap();
        let g = p.to_graph().unwrap();
        assert_eq!((g.num_vertices(), g.num_edges()), (4, 4));
        let single = cartesian_product(&k2(), &Graph::edgeless(1), CartesianWeight::Adjacency).unwrap();
        assert_eq!(single.to_graph().unwrap(), k2());

        let g3 = Graph::undirected(3, &[(0, 1), (1, 2)]).unwrap();
        let l = cartesian_product(&g3, &k2(), CartesianWeight::Laplacian).unwrap();
        let expected = kron_sum(&laplacian(&g3).unwrap(), &laplacian(&k2()).unwrap()).unwrap();
        assert_eq!(l.weight_matrix().to_dense(), expected.to_dense());
        // nodes 31' and 32' of the illustration share the first coordinate
        assert!(l.has_edge((2, 0), (2, 1)));
    }

    #[test]
    fn complement_examples() {
        let path = Graph::undirected(3, &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(complement(&path).unwrap(), Graph::undirected(3, &[(0, 2)]).unwrap());
        assert_eq!(complement(&Graph::complete(5)).unwrap().num_edges(), 0);
        assert_eq!(complement(&Graph::edgeless(5)).unwrap(), Graph::complete(5));
        assert_eq!(complement(&complement(&path).unwrap()).unwrap(), path);
        assert!(complement(&Graph::directed(2, &[(0, 1)]).unwrap()).is_err());
    }

    #[test]
    fn mismatched_inputs_are_rejected() {
        let d = Graph::directed(2, &[(0, 1)]).unwrap();
        assert!(direct_product(&k2(), &d, true).is_err());
        let l = Graph::undirected_labeled(2, 2, &[(0, 1, 1)]).unwrap();
        assert!(direct_product(&k2(), &l, true).is_err());
    }

    #[test]
    fn custom_distributions() {
        let p = direct_product(&k2(), &k2(), true)
            .unwrap()
            .with_distributions(&[1.0, 0.0], &[0.5, 0.5], &[0.5, 0.5], &[0.0, 1.0])
            .unwrap();
        assert_eq!(p.start(), &[0.5, 0.5, 0.0, 0.0]);
        assert_eq!(p.stop(), &[0.0, 0.5, 0.0, 0.5]);
        assert_eq!(p.base_term(), 0.25);
        assert_eq!(p.factor_distributions().2, &[0.5, 0.5]);
    }

    #[test]
    fn symmetrizers_are_attached_for_undirected_inputs() {
        let g = Graph::undirected(3, &[(0, 1), (1, 2)]).unwrap();
        let p = direct_product(&g, &k2(), true).unwrap();
        let (e, _) = p.symmetrizer().unwrap();
        assert!((e[1] - 2f64.sqrt()).abs() < 1e-15);
        assert!(cartesian_product(&g, &k2(), CartesianWeight::Laplacian).unwrap().symmetrizer().is_some());
        let d = Graph::directed(2, &[(0, 1)]).unwrap();
        assert!(direct_product(&d, &d, true).unwrap().symmetrizer().is_none());
        assert!(p.clone().with_symmetrizer(vec![1.0; 3], vec![1.0; 2]).is_err());
    }
}
