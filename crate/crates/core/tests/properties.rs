use approx::assert_relative_eq;
use proptest::prelude::*;

use walkernel::graph::io::{parse_graph, to_edge_list, to_json};
use walkernel::graph::{complement, random_graph_set2, Graph, RngSeed};
use walkernel::kernels::{gram_matrix, psd_check, random_walk_kernel, KernelConfig, Method};
use walkernel::linalg::{dense_solve, kron, kron_mat_vec, max_abs_diff, sym_eig, sylvester_solve, unvec, vec, DenseMatrix, SparseMatrix};
use walkernel::semiring::{check_axioms, log_add, Semiring};
use walkernel::transducer::{parse_transducer, write_transducer, Transition, WeightedTransducer};

fn dense(rows: usize, cols: usize) -> impl Strategy<Value = DenseMatrix> {
    prop::collection::vec(-1.0..1.0f64, rows * cols).prop_map(move |d| DenseMatrix::new(rows, cols, d).unwrap())
}

fn connected_graph(max_n: usize) -> impl Strategy<Value = Graph> {
    (2..=max_n, 0.0..1.0f64, any::<u64>()).prop_map(|(n, t, seed)| {
        let tree = 200.0 * (n - 1) as f64 / (n * n) as f64;
        let fill = tree + t * (100.0 - tree).max(0.0);
        random_graph_set2(n, fill.min(100.0), RngSeed(seed)).unwrap()
    })
}

fn edge_set(g: &Graph) -> Vec<(usize, usize)> {
    let mut e: Vec<_> = g.edges().iter().map(|e| (e.source.min(e.target), e.source.max(e.target))).collect();
    e.sort_unstable();
    e
}

fn transducer() -> impl Strategy<Value = WeightedTransducer> {
    (1..5usize, 1..4usize).prop_flat_map(|(n, s)| {
        let tr = prop::collection::vec((0..n, 0..s, 0..s, 0..n, 0.01..2.0f64), 0..12);
        let ends = prop::collection::vec(prop_oneof![Just(0.0), 0.01..2.0f64], n);
        (tr, ends.clone(), ends).prop_map(move |(tr, p, q)| {
            let transitions = tr
                .into_iter()
                .map(|(src, input, output, dst, weight)| Transition { src, input, output, dst, weight })
                .collect();
            WeightedTransducer::new(Semiring::Real, n, s, transitions, p, q).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn vec_trick_matches_explicit_kronecker(a in dense(3, 4), b in dense(2, 5), x in prop::collection::vec(-1.0..1.0f64, 20)) {
        let fast = kron_mat_vec(&a, &b, &x).unwrap();
        let slow = kron(&a, &b).mul_vec(&x).unwrap();
        prop_assert!(max_abs_diff(&fast, &slow) < 1e-12);
    }

    #[test]
    fn vec_unvec_round_trip(m in dense(3, 5)) {
        prop_assert_eq!(unvec(&vec(&m), 3, 5).unwrap(), m);
    }

    #[test]
    fn sparse_and_dense_products_agree(a in dense(4, 3), b in dense(3, 5)) {
        let a = a.map(|v| if v.abs() < 0.5 { 0.0 } else { v });
        let sa = SparseMatrix::from_dense(&a);
        prop_assert!(sa.check_invariants());
        let sparse = sa.matmul(&SparseMatrix::from_dense(&b)).unwrap().to_dense();
        prop_assert!(sparse.max_abs_diff(&a.matmul(&b).unwrap()) < 1e-14);
        prop_assert_eq!(sa.transpose().transpose(), sa);
    }

    #[test]
    fn lu_solves_diagonally_dominant_systems(m in dense(6, 6), b in prop::collection::vec(-1.0..1.0f64, 6)) {
        let a = m.add(&DenseMatrix::identity(6).scale(7.0)).unwrap();
        let x = dense_solve(&a, &b).unwrap();
        prop_assert!(max_abs_diff(&a.mul_vec(&x).unwrap(), &b) < 1e-12);
    }

    #[test]
    fn symmetric_eigensystem_reconstructs(m in dense(5, 5)) {
        let s = m.symmetrize();
        let eig = sym_eig(&s).unwrap();
        prop_assert!(eig.reconstruct().max_abs_diff(&s) < 1e-12);
        prop_assert!(eig.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn stein_equation_solution_satisfies_equation(s in dense(4, 4), t in dense(3, 3), m0 in dense(4, 3)) {
        let (s, t) = (s.scale(0.4), t.scale(0.4));
        let m = sylvester_solve(&s, &t, &m0).unwrap();
        let residual = m.sub(&s.matmul(&m).unwrap().matmul(&t).unwrap()).unwrap().sub(&m0).unwrap();
        prop_assert!(residual.max_abs() < 1e-10);
    }

    #[test]
    fn kernel_is_symmetric_in_its_arguments(g in connected_graph(9), h in connected_graph(9), lambda in 0.0..0.5f64) {
        for method in [Method::Direct, Method::Sylvester, Method::FixedPoint] {
            let cfg = KernelConfig { lambda, tol: 1e-12, method, ..KernelConfig::default() };
            let ab = random_walk_kernel(&g, &h, &cfg).unwrap().value;
            let ba = random_walk_kernel(&h, &g, &cfg).unwrap().value;
            assert_relative_eq!(ab, ba, max_relative = 1e-9);
            prop_assert!(ab > 0.0);
        }
    }

    #[test]
    fn kernel_grows_with_lambda(g in connected_graph(8), h in connected_graph(8), lambda in 0.0..0.4f64) {
        let cfg = KernelConfig { lambda, tol: 1e-12, method: Method::Direct, ..KernelConfig::default() };
        let lo = random_walk_kernel(&g, &h, &cfg).unwrap().value;
        let hi = random_walk_kernel(&g, &h, &cfg.clone().with_lambda(lambda + 0.1)).unwrap().value;
        prop_assert!(hi >= lo);
    }

    #[test]
    fn graph_formats_round_trip(g in connected_graph(12)) {
        let from_json = parse_graph(&to_json(&g)).unwrap();
        prop_assert_eq!(&from_json, &g);
        let from_list = parse_graph(&to_edge_list(&g).unwrap()).unwrap();
        prop_assert_eq!(edge_set(&from_list), edge_set(&g));
        prop_assert_eq!(from_list.num_vertices(), g.num_vertices());
    }

    #[test]
    fn complement_is_an_involution(g in connected_graph(10)) {
        let c = complement(&g).unwrap();
        let n = g.num_vertices();
        prop_assert_eq!(c.num_edges() + g.num_edges(), n * (n - 1) / 2);
        prop_assert_eq!(edge_set(&complement(&c).unwrap()), edge_set(&g));
    }

    #[test]
    fn transducer_text_round_trip(t in transducer()) {
        let back = parse_transducer(&write_transducer(&t)).unwrap();
        prop_assert_eq!(back, t);
    }

    #[test]
    fn inverse_swaps_tapes(t in transducer(), a in prop::collection::vec(0..3usize, 0..4), b in prop::collection::vec(0..3usize, 0..4)) {
        let s = t.alphabet_size();
        let a: Vec<usize> = a.into_iter().map(|x| x % s).collect();
        let b: Vec<usize> = b.into_iter().map(|x| x % s).collect();
        let forward = t.output_weight(&a, &b).unwrap();
        let backward = t.inverse().output_weight(&b, &a).unwrap();
        assert_relative_eq!(forward, backward, max_relative = 1e-12);
    }

    #[test]
    fn log_add_is_log_of_sum(x in -30.0..30.0f64, y in -30.0..30.0f64) {
        assert_relative_eq!(log_add(x, y), (x.exp() + y.exp()).ln(), max_relative = 1e-12, epsilon = 1e-12);
        prop_assert_eq!(log_add(x, y), log_add(y, x));
        prop_assert_eq!(log_add(x, f64::NEG_INFINITY), x);
    }

    #[test]
    fn semiring_laws_hold_for_any_seed(seed in any::<u64>()) {
        for s in [Semiring::Real, Semiring::Boolean, Semiring::Logarithmic, Semiring::Tropical] {
            let report = check_axioms(s, 50, RngSeed(seed));
            prop_assert!(report.passed(), "{}: {:?}", s.name(), report.failures);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn random_walk_gram_is_psd(graphs in prop::collection::vec(connected_graph(8), 2..7), lambda in 0.0..0.3f64) {
        let cfg = KernelConfig { lambda, tol: 1e-12, ..KernelConfig::default() };
        let gram = gram_matrix(&graphs, |a, b| random_walk_kernel(a, b, &cfg).map(|r| r.value), false).unwrap();
        let report = psd_check(&gram).unwrap();
        prop_assert!(report.is_psd, "min eigenvalue {}", report.min_eigenvalue);
        prop_assert!(gram.values.is_symmetric(0.0));
    }
}

#[test]
fn seed_derivation_is_stable() {
    let g1 = random_graph_set2(20, 30.0, RngSeed(9).derive(3)).unwrap();
    let g2 = random_graph_set2(20, 30.0, RngSeed(9).derive(3)).unwrap();
    assert_eq!(g1, g2);
    assert_ne!(RngSeed(9).derive(3), RngSeed(9).derive(4));
}
