//! Small dense complex matrix helpers.
//!
//! Everything here works on `nalgebra::DMatrix<Complex64>`; the largest
//! matrices in the crate are 64x64 so no structure is exploited.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Tolerance ladder shared by the whole crate.
pub mod tol {
    /// Construction identities (round trips, exact linear maps).
    pub const CONSTRUCTION: f64 = 1e-14;
    /// Round trip starting from an arbitrary density matrix.
    pub const ROUND_TRIP: f64 = 1e-13;
    pub const HERMITIAN: f64 = 1e-12;
    pub const TRACE: f64 = 1e-12;
    /// Slack on the smallest eigenvalue.
    pub const PSD: f64 = 1e-10;
    /// Imaginary part tolerated when reading real Bloch parameters.
    pub const IMAG: f64 = 1e-10;
    pub const UNITARY: f64 = 1e-12;
    /// Values at or below this count as zero coherence.
    pub const ZERO_COHERENCE: f64 = 1e-12;
    /// Oracle vs closed-form agreement.
    pub const ORACLE: f64 = 1e-10;
}

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

/// Pauli matrix `sigma_k` for k = 0 (identity), 1 (X), 2 (Y), 3 (Z).
pub fn pauli(k: usize) -> CMatrix {
    match k {
        0 => identity(2),
        1 => CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
        2 => CMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO]),
        3 => CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]),
        _ => panic!("pauli index {k} out of range"),
    }
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

/// Max |m_ij - conj(m_ji)|.
pub fn hermitian_residual(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Max |(U^dagger U - I)_ij|.
pub fn unitary_residual(u: &CMatrix) -> f64 {
    let n = u.ncols();
    let gram = u.adjoint() * u;
    max_abs_diff(&gram, &identity(n))
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch");
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Eigen-decomposition of a Hermitian matrix. The strictly lower triangle is
/// mirrored from the upper one before decomposing.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    let mut h = m.clone();
    for i in 0..n {
        h[(i, i)] = Complex64::new(h[(i, i)].re, 0.0);
        for j in (i + 1)..n {
            h[(j, i)] = h[(i, j)].conj();
        }
    }
    let eig = SymmetricEigen::new(h);
    (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
}

pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    hermitian_eigen(m)
        .0
        .into_iter()
        .fold(f64::INFINITY, f64::min)
}

/// Column-major ket as an `n x 1` matrix.
pub fn ket(amplitudes: &[Complex64]) -> CMatrix {
    CMatrix::from_column_slice(amplitudes.len(), 1, amplitudes)
}

pub fn projector(psi: &CMatrix) -> CMatrix {
    psi * psi.adjoint()
}

pub fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}
