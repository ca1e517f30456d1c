//! Dense complex linear algebra for small matrices (dimension up to 32).
//!
//! Everything here is self-contained: Householder reductions, an implicitly
//! shifted complex QR iteration for general spectra, tridiagonal QL for the
//! Hermitian case, and one-sided Jacobi for the SVD.

mod eigen;
mod matrix;
pub mod random;
mod svd;

pub use eigen::{eig_general, eig_hermitian, EigenResult};
pub use matrix::{ComplexMatrix, MatrixJson, C64, I, ONE, ZERO};
pub use svd::{qr, svd, Svd};

use crate::error::{Error, Result};

/// Machine epsilon for f64.
pub const EPS: f64 = f64::EPSILON;

/// Hybrid absolute/relative tolerance `tol·max(1, scale)`.
pub fn hybrid_tol(tol: f64, scale: f64) -> f64 {
    tol * scale.max(1.0)
}

fn same_shape(a: &ComplexMatrix, b: &ComplexMatrix, op: &'static str) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::Dimension {
            op,
            left: a.shape(),
            right: b.shape(),
        });
    }
    Ok(())
}

fn square(a: &ComplexMatrix, op: &'static str) -> Result<()> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            op,
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    Ok(())
}

/// Hilbert–Schmidt inner product tr(A†B), conjugate-linear in `a`.
pub fn hs_inner(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<C64> {
    same_shape(a, b, "hs_inner")?;
    Ok(hs_inner_unchecked(a, b))
}

pub(crate) fn hs_inner_unchecked(a: &ComplexMatrix, b: &ComplexMatrix) -> C64 {
    a.as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| x.conj() * y)
        .sum()
}

pub fn frobenius_norm(a: &ComplexMatrix) -> f64 {
    a.norm()
}

/// AB − BA.
pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    square(a, "commutator")?;
    same_shape(a, b, "commutator")?;
    Ok(&(a * b) - &(b * a))
}

/// AB + BA.
pub fn anticommutator(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    square(a, "anticommutator")?;
    same_shape(a, b, "anticommutator")?;
    Ok(&(a * b) + &(b * a))
}

/// Hermitian real and imaginary parts: A = A_R + i·A_I.
pub fn cartesian_split(a: &ComplexMatrix) -> Result<(ComplexMatrix, ComplexMatrix)> {
    square(a, "cartesian_split")?;
    let ad = a.adjoint();
    let re = (a + &ad).scale_real(0.5);
    // (A − A†)/(2i) = −i(A − A†)/2
    let im = (a - &ad).scale(C64::new(0.0, -0.5));
    Ok((re, im))
}

/// Kronecker product A ⊗ B.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    ComplexMatrix::from_fn(ar * br, ac * bc, |i, j| {
        a[(i / br, j / bc)] * b[(i % br, j % bc)]
    })
}

/// The Pauli matrices σ₁, σ₂, σ₃.
pub fn pauli() -> [ComplexMatrix; 3] {
    let s1 = ComplexMatrix::from_real(&[&[0.0, 1.0], &[1.0, 0.0]]);
    let s2 = ComplexMatrix::from_rows(&[vec![ZERO, -I], vec![I, ZERO]]).unwrap();
    let s3 = ComplexMatrix::from_real(&[&[1.0, 0.0], &[0.0, -1.0]]);
    [s1, s2, s3]
}

pub(crate) fn vec_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub(crate) fn vec_dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}
