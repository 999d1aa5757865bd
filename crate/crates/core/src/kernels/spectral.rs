use crate::error::{Error, Result};
use crate::graph::{degrees, laplacian, normalized_adjacency, normalized_laplacian, Graph};
use crate::kernels::walk::spectral_sum;
use crate::linalg::{dot, sym_eig, DenseMatrix};

/// `eᵀ exp(λ A×) e` for the normalized adjacency `A× = A ⊗ A′`, from the
/// eigensystems of `D^{-1/2} Ã D^{-1/2}` and its counterpart.
pub fn geometric_kernel(g: &Graph, h: &Graph, lambda: f64) -> Result<f64> {
    if g.is_directed() || h.is_directed() {
        return Err(Error::Directed);
    }
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::InvalidArgument(format!("lambda must be finite and >= 0, got {lambda}")));
    }
    let a = normalized_adjacency(g)?;
    let b = normalized_adjacency(h)?;
    let e: Vec<f64> = degrees(g).iter().map(|d| d.sqrt()).collect();
    let e_prime: Vec<f64> = degrees(h).iter().map(|d| d.sqrt()).collect();
    let (ones, ones_prime) = (vec![1.0; a.rows()], vec![1.0; b.rows()]);
    spectral_sum(
        (&a, &e, &ones, &ones),
        (&b, &e_prime, &ones_prime, &ones_prime),
        |s, t| s * t,
        |m| Ok((lambda * m).exp()),
    )
}

/// Heat kernel `exp(−t L̃)` of an undirected graph, the limit of
/// `(I − t L̃ / m)^m`. Symmetric, positive semi-definite and row-stochastic.
pub fn diffusion_vertex_kernel(g: &Graph, t: f64) -> Result<DenseMatrix> {
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::InvalidArgument(format!("diffusion time must be > 0, got {t}")));
    }
    let l = laplacian(g)?;
    Ok(sym_eig(&l.to_dense())?.apply_function(|x| (-t * x).exp()))
}

/// `Σᵢ r(λᵢ)⁻¹ vᵢ vᵢᵀ` over the eigensystem of the normalized Laplacian.
pub fn spectral_kernel_family(g: &Graph, r: impl Fn(f64) -> f64) -> Result<DenseMatrix> {
    let l = normalized_laplacian(g)?;
    let eig = sym_eig(&l.to_dense().symmetrize())?;
    for &x in &eig.eigenvalues {
        let v = r(x);
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidArgument(format!("spectral transform is {v} at eigenvalue {x}")));
        }
    }
    Ok(eig.apply_function(|x| 1.0 / r(x)))
}

/// `r(λ) = 1 + σ²λ`, giving `(I + σ²L)⁻¹`.
pub fn regularized_laplacian_transform(sigma: f64) -> impl Fn(f64) -> f64 + Copy {
    move |x| 1.0 + sigma * sigma * x
}

/// `r(λ) = exp(σ²λ/2)`, giving `exp(−σ²L/2)`.
pub fn diffusion_transform(sigma: f64) -> impl Fn(f64) -> f64 + Copy {
    move |x| (sigma * sigma * x / 2.0).exp()
}

/// `fᵀ L̃ f`.
pub fn smoothness_functional(g: &Graph, f: &[f64]) -> Result<f64> {
    if f.len() != g.num_vertices() {
        return Err(Error::DimensionMismatch(format!(
            "function has {} values for {} vertices",
            f.len(),
            g.num_vertices()
        )));
    }
    let l = laplacian(g)?;
    Ok(dot(f, &l.mul_vec(f)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{dense_solve, kron, matrix_exp_oracle};

    fn k2() -> Graph {
        Graph::complete(2)
    }

    #[test]
    fn geometric_closed_form_and_oracle() {
        let v = geometric_kernel(&k2(), &k2(), 0.1).unwrap();
        assert!((v - 4.0 * 0.1f64.exp()).abs() < 1e-12);
        assert!((geometric_kernel(&k2(), &Graph::complete(3), 0.0).unwrap() - 6.0).abs() < 1e-12);

        let g = Graph::undirected(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (1, 4)]).unwrap();
        let h = Graph::undirected(4, &[(0, 1), (1, 2), (2, 0), (2, 3)]).unwrap();
        let ax = kron(&normalized_adjacency(&g).unwrap().to_dense(), &normalized_adjacency(&h).unwrap().to_dense());
        let e = matrix_exp_oracle(&ax, 0.7).unwrap();
        let oracle: f64 = e.as_slice().iter().sum();
        let v = geometric_kernel(&g, &h, 0.7).unwrap();
        assert!((v - oracle).abs() < 1e-10 * oracle);
        assert!(geometric_kernel(&Graph::directed(2, &[(0, 1)]).unwrap(), &k2(), 0.1).is_err());
    }

    #[test]
    fn diffusion_on_k2() {
        let t = 0.3;
        let k = diffusion_vertex_kernel(&k2(), t).unwrap();
        let a = (1.0 + (-2.0 * t).exp()) / 2.0;
        assert!((k.get(0, 0) - a).abs() < 1e-14);
        assert!((k.get(0, 1) - (1.0 - a)).abs() < 1e-14);
        let small = diffusion_vertex_kernel(&Graph::complete(4), 1e-8).unwrap();
        assert!(small.max_abs_diff(&DenseMatrix::identity(4)) <= 1e-6);
        assert!(diffusion_vertex_kernel(&k2(), 0.0).is_err());
    }

    #[test]
    fn spectral_family_builtins() {
        let g = Graph::undirected(4, &[(0, 1), (1, 2), (2, 3), (0, 2)]).unwrap();
        let id = spectral_kernel_family(&g, |_| 1.0).unwrap();
        assert!(id.max_abs_diff(&DenseMatrix::identity(4)) < 1e-12);
        let l = normalized_laplacian(&g).unwrap().to_dense();
        let k = spectral_kernel_family(&g, regularized_laplacian_transform(1.0)).unwrap();
        let m = DenseMatrix::identity(4).add(&l).unwrap();
        for j in 0..4 {
            let mut ej = vec![0.0; 4];
            ej[j] = 1.0;
            let col = dense_solve(&m, &ej).unwrap();
            for i in 0..4 {
                assert!((k.get(i, j) - col[i]).abs() < 1e-12);
            }
        }
        let d = spectral_kernel_family(&g, diffusion_transform(1.5)).unwrap();
        let oracle = matrix_exp_oracle(&l, -1.125).unwrap();
        assert!(d.max_abs_diff(&oracle) < 1e-12);
        assert!(spectral_kernel_family(&g, |x| x - 0.5).is_err());
    }

    #[test]
    fn smoothness() {
        let g = Graph::undirected(3, &[(0, 1), (1, 2)]).unwrap();
        assert!(smoothness_functional(&g, &[2.0, 2.0, 2.0]).unwrap().abs() < 1e-15);
        assert_eq!(smoothness_functional(&k2(), &[0.0, 1.0]).unwrap(), 1.0);
        assert!(smoothness_functional(&g, &[1.0]).is_err());
    }
}
