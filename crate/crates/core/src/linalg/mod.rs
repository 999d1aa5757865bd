//! Real dense and sparse linear algebra.

pub mod dense;
pub mod eigen;
pub mod feature;
pub mod kron;
pub mod solvers;
pub mod sparse;
pub mod sylvester;

pub use dense::{axpy, dot, max_abs_diff, norm2, DenseMatrix};
pub use eigen::{matrix_exp_oracle, sym_eig, EigenDecomposition};
pub use feature::FeatureMatrix;
pub use kron::{hadamard, kron, kron_mat_vec, kron_sum, sum_kron_mat_vec, unvec, vec, KronAlgebra, MatrixRef};
pub use solvers::{
    cg_solve, dense_solve, fixed_point_solve, spectral_radius_estimate, FnOperator, LinearOperator,
    LuFactorization, ShiftedOperator, SolveReport,
};
pub use sparse::SparseMatrix;
pub use sylvester::{generalized_sylvester_solve, sylvester_solve};
