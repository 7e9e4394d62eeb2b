//! Dense linear-algebra kernels: matrix exponential and a real
//! non-symmetric eigenvalue solver.

pub mod eig;
pub mod expm;

pub use eig::eigenvalues;
pub use expm::expm;
