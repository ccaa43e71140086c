//! Dense complex linear algebra shared by the state, channel and purifier
//! modules.
//!
//! Basis convention: qubit 0 is the most significant bit of a basis index,
//! so `|q0 q1 … q(M-1)⟩` has index `Σ q_m 2^(M-1-m)`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// A single-qubit operator, row-major.
pub type Mat2 = [[Complex64; 2]; 2];

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

pub const PAULI_I: Mat2 = [[ONE, ZERO], [ZERO, ONE]];
pub const PAULI_X: Mat2 = [[ZERO, ONE], [ONE, ZERO]];
pub const PAULI_Y: Mat2 = [[ZERO, Complex64::new(0.0, -1.0)], [I, ZERO]];
pub const PAULI_Z: Mat2 = [[ONE, ZERO], [ZERO, Complex64::new(-1.0, 0.0)]];

pub fn mat2_to_matrix(m: &Mat2) -> CMatrix {
    CMatrix::from_fn(2, 2, |r, c| m[r][c])
}

pub fn mat2_adjoint(m: &Mat2) -> Mat2 {
    [[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]]
}

pub fn mat2_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[ZERO; 2]; 2];
    for (r, row) in out.iter_mut().enumerate() {
        for (c, v) in row.iter_mut().enumerate() {
            *v = a[r][0] * b[0][c] + a[r][1] * b[1][c];
        }
    }
    out
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

/// `Tr(AB)` without forming the product.
pub fn trace_of_product(a: &CMatrix, b: &CMatrix) -> Complex64 {
    let n = a.nrows();
    let mut acc = ZERO;
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Largest entrywise `|m - m†|`.
pub fn hermiticity_error(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for r in 0..n {
        for c in r..n {
            worst = worst.max((m[(r, c)] - m[(c, r)].conj()).norm());
        }
    }
    worst
}

pub fn symmetrize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Hermitian eigendecomposition of `(m + m†)/2`.
///
/// Eigenvalues are returned in descending order with eigenvectors as the
/// matching columns.
pub fn eigh(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    let eig = SymmetricEigen::new(symmetrize(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// `V diag(w) V†`.
pub fn from_spectrum(weights: &[f64], vectors: &CMatrix) -> CMatrix {
    let n = vectors.nrows();
    let mut scaled = vectors.clone();
    for (c, &w) in weights.iter().enumerate() {
        scaled.column_mut(c).scale_mut(w);
    }
    let out = &scaled * vectors.adjoint();
    debug_assert_eq!(out.nrows(), n);
    out
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn kron_vec(a: &CVector, b: &CVector) -> CVector {
    let mut out = CVector::zeros(a.len() * b.len());
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i * b.len() + j] = x * y;
        }
    }
    out
}

#[inline]
fn qubit_mask(qubit: usize, num_qubits: usize) -> usize {
    1 << (num_qubits - 1 - qubit)
}

/// In-place `m ← U_q m`, with `U` acting on `qubit`.
pub fn apply_left(m: &mut CMatrix, u: &Mat2, qubit: usize, num_qubits: usize) {
    let mask = qubit_mask(qubit, num_qubits);
    let (rows, cols) = m.shape();
    for c in 0..cols {
        for i in (0..rows).filter(|i| i & mask == 0) {
            let j = i | mask;
            let (a, b) = (m[(i, c)], m[(j, c)]);
            m[(i, c)] = u[0][0] * a + u[0][1] * b;
            m[(j, c)] = u[1][0] * a + u[1][1] * b;
        }
    }
}

/// In-place `m ← m U_q†`.
pub fn apply_right_adjoint(m: &mut CMatrix, u: &Mat2, qubit: usize, num_qubits: usize) {
    let mask = qubit_mask(qubit, num_qubits);
    let (rows, cols) = m.shape();
    let (u00, u01, u10, u11) = (u[0][0].conj(), u[0][1].conj(), u[1][0].conj(), u[1][1].conj());
    for i in (0..cols).filter(|i| i & mask == 0) {
        let j = i | mask;
        for r in 0..rows {
            let (a, b) = (m[(r, i)], m[(r, j)]);
            m[(r, i)] = a * u00 + b * u01;
            m[(r, j)] = a * u10 + b * u11;
        }
    }
}

/// `U_q m U_q†` for a single-qubit operator on `qubit`.
pub fn conjugate_on_qubit(m: &CMatrix, u: &Mat2, qubit: usize, num_qubits: usize) -> CMatrix {
    let mut out = m.clone();
    apply_left(&mut out, u, qubit, num_qubits);
    apply_right_adjoint(&mut out, u, qubit, num_qubits);
    out
}

/// `Σ_k K_k m K_k†` with every Kraus operator acting on `qubit`.
pub fn kraus_on_qubit(m: &CMatrix, kraus: &[Mat2], qubit: usize, num_qubits: usize) -> CMatrix {
    let mut acc = CMatrix::zeros(m.nrows(), m.ncols());
    for k in kraus {
        acc += conjugate_on_qubit(m, k, qubit, num_qubits);
    }
    acc
}

/// Number of qubits for a dimension that must be an exact power of two.
pub fn qubits_for_dim(dim: usize) -> Option<usize> {
    (dim >= 2 && dim.is_power_of_two()).then(|| dim.trailing_zeros() as usize)
}
