//! Graph kernels: random-walk kernels with several solver backends,
//! geometric, marginalized and Cartesian-product kernels, vertex kernels
//! from the Laplacian spectrum, assignment and convolution kernels, and
//! Gram-matrix assembly.

mod assignment;
mod gram;
mod spectral;
mod walk;

use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use crate::error::{Error, Result};

pub use assignment::{
    assignment_brute_force, assignment_psd_counterexample, edge_pair_kernel, optimal_assignment_kernel,
    r_convolution_kernel, AssignmentCounterexample, EdgeAttr,
};
pub use gram::{composite_kernel, gram_matrix, psd_check, GramMatrix, PsdReport, PSD_RELATIVE_TOL};
pub use spectral::{
    diffusion_vertex_kernel, geometric_kernel, regularized_laplacian_transform, smoothness_functional,
    spectral_kernel_family, diffusion_transform,
};
pub use walk::{DIRECT_MAX_DIM, 
    cartesian_walk_kernel, cartesian_walk_product, walk_count_kernel, marginalized_kernel,
    random_walk_kernel, random_walk_kernel_with, random_walk_product, truncated_walk_kernel, walk_series_terms,
};

pub use crate::graph::CartesianWeight;

/// Solver backend for the random-walk family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    /// Dense factorization of the materialized product system.
    Direct,
    /// Sylvester equation in the factor matrices.
    Sylvester,
    /// Krylov iteration with lazy Kronecker mat-vecs.
    Cg,
    /// Fixed-point iteration with lazy Kronecker mat-vecs.
    FixedPoint,
    /// Eigendecompositions of the two factors.
    Spectral,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::Direct, Method::Sylvester, Method::Cg, Method::FixedPoint, Method::Spectral];

    pub fn name(self) -> &'static str {
        match self {
            Method::Direct => "direct",
            Method::Sylvester => "sylvester",
            Method::Cg => "cg",
            Method::FixedPoint => "fixed_point",
            Method::Spectral => "spectral",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s || (s == "fixed-point" && *m == Method::FixedPoint))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown method {s:?}")))
    }
}

/// Weighting `μ(k)` of walks of length `k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum Measure {
    /// `μ(k) = λᵏ`.
    #[default]
    Geometric,
    /// `μ(k) = λᵏ / k!`.
    Exponential,
}

impl Measure {
    /// `μ(k)` for decay `lambda`.
    pub fn weight(self, lambda: f64, k: usize) -> f64 {
        let p = lambda.powi(k as i32);
        match self {
            Measure::Geometric => p,
            Measure::Exponential => p / (1..=k).map(|i| i as f64).product::<f64>(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Measure::Geometric => "geometric",
            Measure::Exponential => "exponential",
        }
    }
}

impl FromStr for Measure {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "geometric" => Ok(Measure::Geometric),
            "exponential" => Ok(Measure::Exponential),
            _ => Err(Error::InvalidArgument(format!("unknown measure {s:?}"))),
        }
    }
}

/// Which powers of the Cartesian weight matrix a Cartesian kernel sums.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum PowerMode {
    /// `Σ_{k≥1} μ(k) q□ᵀ W□^{2k} p□`; positive semi-definite.
    #[default]
    Even,
    /// `Σ_{k≥1} μ(k) q□ᵀ W□^k p□`.
    All,
}

impl PowerMode {
    pub fn name(self) -> &'static str {
        match self {
            PowerMode::Even => "even",
            PowerMode::All => "all",
        }
    }
}

impl FromStr for PowerMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "even" => Ok(PowerMode::Even),
            "all" => Ok(PowerMode::All),
            _ => Err(Error::InvalidArgument(format!("unknown power mode {s:?}"))),
        }
    }
}

pub const DEFAULT_LAMBDA: f64 = 0.001;
pub const DEFAULT_TOL: f64 = 1e-6;
pub const DEFAULT_MAX_ITER: usize = 1000;

#[derive(Clone, Debug, PartialEq)]
pub struct KernelConfig {
    pub lambda: f64,
    pub method: Method,
    pub tol: f64,
    pub max_iter: usize,
    pub measure: Measure,
    /// Truncation length for series reference computations.
    pub k_max: usize,
    pub degree_normalize: bool,
}

impl Default for KernelConfig {
    fn default() -> Self {
        Self {
            lambda: DEFAULT_LAMBDA,
            method: Method::FixedPoint,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            measure: Measure::Geometric,
            k_max: 20,
            degree_normalize: true,
        }
    }
}

impl KernelConfig {
    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(Error::InvalidArgument(format!("lambda must be finite and >= 0, got {}", self.lambda)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidArgument(format!("tol must be > 0, got {}", self.tol)));
        }
        if self.k_max < 1 {
            return Err(Error::InvalidArgument("k_max must be at least 1".into()));
        }
        if self.max_iter < 1 {
            return Err(Error::InvalidArgument("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

/// Graph kernels selectable by name.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GraphKernel {
    RandomWalk,
    Geometric,
    Cartesian { weight: CartesianWeight, mode: PowerMode },
    /// Random-walk kernel on the graphs plus on their complements.
    Composite,
}

impl GraphKernel {
    pub const NAMES: [&'static str; 5] = ["random-walk", "geometric", "cartesian", "cartesian-laplacian", "composite"];

    pub fn name(self) -> &'static str {
        match self {
            GraphKernel::RandomWalk => "random-walk",
            GraphKernel::Geometric => "geometric",
            GraphKernel::Cartesian { weight: CartesianWeight::Adjacency, .. } => "cartesian",
            GraphKernel::Cartesian { weight: CartesianWeight::Laplacian, .. } => "cartesian-laplacian",
            GraphKernel::Composite => "composite",
        }
    }

    /// Parses a kernel name; `mode` applies to the Cartesian kernels.
    pub fn parse(name: &str, mode: PowerMode) -> Result<Self> {
        Ok(match name {
            "random-walk" => GraphKernel::RandomWalk,
            "geometric" => GraphKernel::Geometric,
            "cartesian" => GraphKernel::Cartesian { weight: CartesianWeight::Adjacency, mode },
            "cartesian-laplacian" => GraphKernel::Cartesian { weight: CartesianWeight::Laplacian, mode },
            "composite" => GraphKernel::Composite,
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "unknown kernel {name:?}, expected one of {}",
                    Self::NAMES.join(", ")
                )))
            }
        })
    }

    pub fn evaluate(self, g: &crate::graph::Graph, h: &crate::graph::Graph, cfg: &KernelConfig) -> Result<f64> {
        match self {
            GraphKernel::RandomWalk => random_walk_kernel(g, h, cfg).map(|r| r.value),
            GraphKernel::Geometric => geometric_kernel(g, h, cfg.lambda),
            GraphKernel::Cartesian { weight, mode } => cartesian_walk_kernel(g, h, cfg, weight, mode).map(|r| r.value),
            GraphKernel::Composite => composite_kernel(g, h, |a, b| random_walk_kernel(a, b, cfg).map(|r| r.value)),
        }
    }
}

/// A kernel value with solver diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelResult {
    pub value: f64,
    pub method: Method,
    pub iterations: usize,
    /// Relative residual of the solved linear system, zero for closed forms.
    pub residual: f64,
    pub converged: bool,
    pub wall_time: Duration,
}
