//! Dense linear algebra: the matrix type, pivoted QR with column appends,
//! numerical rank, kernel bases and minimum-norm solves.

mod dense;
mod qr;
mod solve;

pub use dense::{dot, norm2, norm_inf, DenseMatrix};
pub use qr::{numerical_rank, qr_append_column, qr_factor, QrFactorization};
pub use solve::{
    kernel_basis, min_norm_solution, residual_inf, solve_square, ColumnSubspace,
};
