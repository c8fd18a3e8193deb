pub mod dense;
pub mod kron_sum;
pub mod lanczos;
pub mod layout;
pub mod operator;
pub mod scalar;

pub use dense::{dot, norm, Dense};
pub use kron_sum::{Diagonal, KronSum, LinearMap};
pub use lanczos::{eig_min_iterative, lowest_eigenpair, EigPair, LanczosOptions};
pub use layout::{Subsystem, SystemLayout};
pub use operator::{
    eig_min_dense, eig_min_matrix, permutation_matrix, permutation_op, swap_op, Entries, HermitianOperator, TOL_HERM,
    TOL_REAL,
};
pub use scalar::Scalar;
