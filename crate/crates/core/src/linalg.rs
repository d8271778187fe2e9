// Copyright 2026 The isolator-qc Authors
// SPDX-License-Identifier: Apache-2.0

//! Small dense linear-algebra helpers over `DMatrix<C64>`.

use nalgebra::{DMatrix, DVector};

use crate::C64;

/// Largest absolute entry of `a - b`.
pub fn max_abs_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn max_abs(a: &DMatrix<C64>) -> f64 {
    a.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

/// `max |A - A†|`.
pub fn hermitian_deviation(a: &DMatrix<C64>) -> f64 {
    max_abs_diff(a, &a.adjoint())
}

/// `max |U†U - 1|`.
pub fn unitary_deviation(u: &DMatrix<C64>) -> f64 {
    let n = u.nrows();
    max_abs_diff(&(u.adjoint() * u), &DMatrix::identity(n, n))
}

pub fn commutator(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    a * b - b * a
}

/// Kronecker product with `a` as the most significant factor.
pub fn kron(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    a.kronecker(b)
}

/// Whether every off-diagonal entry is exactly zero.
pub fn is_diagonal(a: &DMatrix<C64>) -> bool {
    a.iter()
        .enumerate()
        .all(|(k, x)| k % a.nrows() == k / a.nrows() || *x == C64::new(0.0, 0.0))
}

/// Eigendecomposition of a Hermitian matrix: real eigenvalues and the
/// unitary whose columns are the eigenvectors.
pub fn hermitian_eigen(h: &DMatrix<C64>) -> (DVector<f64>, DMatrix<C64>) {
    let eig = h.clone().symmetric_eigen();
    (eig.eigenvalues, eig.eigenvectors)
}

/// `exp(-i H t)` for Hermitian `H`.
///
/// Diagonal inputs are exponentiated entrywise, which is exact and skips the
/// decomposition entirely.
pub fn expm_hermitian(h: &DMatrix<C64>, t: f64) -> DMatrix<C64> {
    let n = h.nrows();
    if is_diagonal(h) {
        return DMatrix::from_diagonal(&DVector::from_iterator(
            n,
            (0..n).map(|k| C64::from_polar(1.0, -h[(k, k)].re * t)),
        ));
    }
    let (vals, vecs) = hermitian_eigen(h);
    let phases = DMatrix::from_diagonal(&vals.map(|e| C64::from_polar(1.0, -e * t)));
    &vecs * phases * vecs.adjoint()
}

/// Principal square root of a Hermitian positive semidefinite matrix.
/// Tiny negative eigenvalues from roundoff are clamped to zero.
pub fn psd_sqrt(rho: &DMatrix<C64>) -> DMatrix<C64> {
    let (vals, vecs) = hermitian_eigen(rho);
    let root = DMatrix::from_diagonal(&vals.map(|e| C64::new(e.max(0.0).sqrt(), 0.0)));
    &vecs * root * vecs.adjoint()
}
