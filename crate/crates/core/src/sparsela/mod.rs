//! Block-sparse storage, CSR conversion and sparse solvers.

mod block;
mod csr;
mod solver;

pub use block::{triple_product, BlockSparseMatrix};
pub use csr::CsrMatrix;
pub use solver::{solve, solve_with, SolveReport, SolverKind, SolverOptions, SymmetryHint};
