//! Dense complex linear algebra shared by every other module.

mod linalg;
mod matrix;
pub mod random;

pub use linalg::{hermitian_eig, mat_exp, sign_operator, sqrt_psd, HermitianEigen};
pub use matrix::{gates, ComplexMatrix, DEFAULT_TOL, I_UNIT, ONE, ZERO};

/// `Tr(a† b)`.
pub fn frobenius_inner(a: &ComplexMatrix, b: &ComplexMatrix) -> crate::error::Result<num_complex::Complex64> {
    a.frobenius_inner(b)
}

/// Kronecker product.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kron(b)
}
