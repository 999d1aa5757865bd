use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{EdgeLabels, Graph, RngSeed};
use crate::linalg::{sym_eig, DenseMatrix};

/// Largest list size accepted by [`assignment_brute_force`].
pub const BRUTE_FORCE_MAX: usize = 8;

/// `max_π Σᵢ κ(xᵢ, x′_π(i))` over injective maps of the shorter list into
/// the longer one.
pub fn optimal_assignment_kernel(parts: &[f64], parts_prime: &[f64], kappa: impl Fn(f64, f64) -> f64) -> Result<f64> {
    let w = score_matrix(parts, parts_prime, &kappa)?;
    Ok(max_weight_assignment(&w))
}

/// Exhaustive search over all injective assignments; lists up to
/// [`BRUTE_FORCE_MAX`] parts.
pub fn assignment_brute_force(parts: &[f64], parts_prime: &[f64], kappa: impl Fn(f64, f64) -> f64) -> Result<f64> {
    if parts.len().max(parts_prime.len()) > BRUTE_FORCE_MAX {
        return Err(Error::InvalidArgument(format!("brute force limited to {BRUTE_FORCE_MAX} parts")));
    }
    let w = score_matrix(parts, parts_prime, &kappa)?;
    let mut used = vec![false; w.cols()];
    Ok(brute(&w, 0, &mut used))
}

fn brute(w: &DenseMatrix, row: usize, used: &mut [bool]) -> f64 {
    if row == w.rows() {
        return 0.0;
    }
    let mut best = f64::NEG_INFINITY;
    for j in 0..w.cols() {
        if !used[j] {
            used[j] = true;
            best = best.max(w.get(row, j) + brute(w, row + 1, used));
            used[j] = false;
        }
    }
    best
}

/// Scores with the shorter list along the rows.
fn score_matrix(a: &[f64], b: &[f64], kappa: &impl Fn(f64, f64) -> f64) -> Result<DenseMatrix> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidArgument("part lists must be nonempty".into()));
    }
    let (rows, cols, flip) = if a.len() <= b.len() { (a, b, false) } else { (b, a, true) };
    let w = DenseMatrix::from_fn(rows.len(), cols.len(), |i, j| {
        if flip {
            kappa(cols[j], rows[i])
        } else {
            kappa(rows[i], cols[j])
        }
    });
    if !w.is_finite() {
        return Err(Error::NonFinite("base kernel value".into()));
    }
    Ok(w)
}

/// Hungarian algorithm with potentials for an `r × c` score matrix, `r ≤ c`.
fn max_weight_assignment(w: &DenseMatrix) -> f64 {
    let (r, c) = (w.rows(), w.cols());
    let cost = |i: usize, j: usize| -w.get(i - 1, j - 1);
    let mut u = vec![0.0; r + 1];
    let mut v = vec![0.0; c + 1];
    let mut owner = vec![0usize; c + 1];
    let mut way = vec![0usize; c + 1];
    for i in 1..=r {
        owner[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; c + 1];
        let mut used = vec![false; c + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=c {
                if !used[j] {
                    let cur = cost(i0, j) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=c {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    (1..=c).filter(|&j| owner[j] != 0).map(|j| w.get(owner[j] - 1, j - 1)).sum()
}

/// A set of part lists whose optimal-assignment Gram matrix is indefinite.
#[derive(Clone, Debug)]
pub struct AssignmentCounterexample {
    pub instances: Vec<Vec<f64>>,
    /// Width of the Gaussian base kernel `exp(−(x − y)² / (2σ²))`.
    pub sigma: f64,
    pub gram: DenseMatrix,
    pub min_eigenvalue: f64,
    pub seed: RngSeed,
    pub attempts: usize,
}

/// Randomized search for small part-list families on which the
/// optimal-assignment kernel with a Gaussian base kernel has a Gram matrix
/// with minimum eigenvalue below `-1e-6`.
pub fn assignment_psd_counterexample(seed: RngSeed) -> Result<AssignmentCounterexample> {
    const MAX_ATTEMPTS: usize = 20_000;
    let sigma = 1.0;
    let kappa = move |x: f64, y: f64| (-(x - y) * (x - y) / (2.0 * sigma * sigma)).exp();
    let mut rng = seed.rng();
    for attempt in 1..=MAX_ATTEMPTS {
        let m = rng.gen_range(3..=6);
        let instances: Vec<Vec<f64>> = (0..m)
            .map(|_| {
                let len = rng.gen_range(1..=3);
                (0..len).map(|_| f64::from(rng.gen_range(0..8u8)) * 0.5).collect()
            })
            .collect();
        let mut gram = DenseMatrix::zeros(m, m);
        for i in 0..m {
            for j in i..m {
                let v = optimal_assignment_kernel(&instances[i], &instances[j], kappa)?;
                gram.set(i, j, v);
                gram.set(j, i, v);
            }
        }
        let min_eigenvalue = sym_eig(&gram)?.eigenvalues[0];
        if min_eigenvalue < -1e-6 {
            return Ok(AssignmentCounterexample { instances, sigma, gram, min_eigenvalue, seed, attempts: attempt });
        }
    }
    Err(Error::InvalidArgument(format!("no counterexample within {MAX_ATTEMPTS} attempts")))
}

/// `Σ_{𝐱 ∈ R⁻¹(x)} Σ_{𝐱′ ∈ R⁻¹(x′)} μ(𝐱, 𝐱′) Π_d κ_d(x_d, x′_d)` where each
/// decomposition is a tuple of components, one per base kernel.
pub fn r_convolution_kernel<X: ?Sized, T>(
    decompose: impl Fn(&X) -> Vec<Vec<T>>,
    mu: impl Fn(&[T], &[T]) -> f64,
    kernels: &[&dyn Fn(&T, &T) -> f64],
    x: &X,
    y: &X,
) -> Result<f64> {
    let (dx, dy) = (decompose(x), decompose(y));
    let check = |d: &Vec<T>| {
        if d.len() == kernels.len() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(format!(
                "decomposition has {} components for {} base kernels",
                d.len(),
                kernels.len()
            )))
        }
    };
    let mut total = 0.0;
    for a in &dx {
        check(a)?;
        for b in &dy {
            check(b)?;
            let prod: f64 = kernels.iter().zip(a.iter().zip(b)).map(|(k, (s, t))| k(s, t)).product();
            total += mu(a, b) * prod;
        }
    }
    Ok(total)
}

/// Edge weight and discrete label, if any.
pub type EdgeAttr = (f64, Option<usize>);

fn edge_attrs(g: &Graph) -> Vec<EdgeAttr> {
    g.arcs()
        .map(|(_, _, w, k)| match g.labels() {
            EdgeLabels::Discrete { labels, .. } => (w, Some(labels[k])),
            _ => (w, None),
        })
        .collect()
}

/// Mean of `κ` over all pairs of arcs, each undirected edge contributing
/// both orientations. Zero when either graph has no edges.
pub fn edge_pair_kernel(g: &Graph, h: &Graph, kappa: impl Fn(EdgeAttr, EdgeAttr) -> f64) -> f64 {
    let (a, b) = (edge_attrs(g), edge_attrs(h));
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let sum: f64 = a.iter().map(|&x| b.iter().map(|&y| kappa(x, y)).sum::<f64>()).sum();
    sum / (a.len() * b.len()) as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn delta(x: f64, y: f64) -> f64 {
        if x == y {
            1.0
        } else {
            0.0
        }
    }

    #[test]
    fn trivial_values() {
        let xs = [1.0, 2.0, 3.5, 4.0];
        assert_eq!(optimal_assignment_kernel(&xs, &xs, delta).unwrap(), 4.0);
        assert_eq!(optimal_assignment_kernel(&[2.0], &[3.0], |x, y| x * y).unwrap(), 6.0);
        assert!(optimal_assignment_kernel(&[], &[1.0], delta).is_err());
    }

    #[test]
    fn hungarian_matches_brute_force() {
        let mut rng = RngSeed(9).rng();
        for _ in 0..200 {
            let a: Vec<f64> = (0..rng.gen_range(1..=6)).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let b: Vec<f64> = (0..rng.gen_range(1..=6)).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let k = |x: f64, y: f64| (x * y).sin() + 0.3 * (x - y).abs();
            let fast = optimal_assignment_kernel(&a, &b, k).unwrap();
            let slow = assignment_brute_force(&a, &b, k).unwrap();
            assert!((fast - slow).abs() < 1e-12, "{a:?} {b:?}");
        }
    }

    #[test]
    fn counterexample_is_indefinite() {
        let c = assignment_psd_counterexample(RngSeed(1)).unwrap();
        assert!(c.min_eigenvalue < -1e-6);
        assert_eq!(c.gram.rows(), c.instances.len());
    }

    #[test]
    fn convolution_cases() {
        let single = |x: &(f64, f64)| vec![vec![x.0, x.1]];
        let k1 = |a: &f64, b: &f64| a * b;
        let k2 = |a: &f64, b: &f64| a + b;
        let v = r_convolution_kernel(single, |_, _| 1.0, &[&k1, &k2], &(2.0, 1.0), &(3.0, 4.0)).unwrap();
        assert_eq!(v, 30.0);
        let empty = |_: &(f64, f64)| Vec::<Vec<f64>>::new();
        assert_eq!(r_convolution_kernel(empty, |_, _| 1.0, &[&k1], &(1.0, 1.0), &(1.0, 1.0)).unwrap(), 0.0);
    }

    #[test]
    fn edge_pairs_by_double_loop() {
        let g = Graph::undirected_labeled(3, 2, &[(0, 1, 0), (1, 2, 1)]).unwrap();
        let h = Graph::undirected_labeled(3, 2, &[(0, 1, 1), (1, 2, 1), (0, 2, 0)]).unwrap();
        let kd = |a: EdgeAttr, b: EdgeAttr| if a.1 == b.1 { 1.0 } else { 0.0 };
        // labels {0, 1} against {1, 1, 0}: three matching pairs of six
        assert!((edge_pair_kernel(&g, &h, kd) - 0.5).abs() < 1e-15);
        assert_eq!(edge_pair_kernel(&g, &Graph::edgeless(2), kd), 0.0);
    }
}
