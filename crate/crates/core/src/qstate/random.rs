//! Random states and unitaries for property checks and demos.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::{CMatrix, CVector};
use crate::qstate::state::{DensityMatrix, PureState};

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-random pure state.
pub fn random_pure_state<R: Rng + ?Sized>(num_qubits: usize, rng: &mut R) -> PureState {
    let dim = 1usize << num_qubits;
    let v = CVector::from_fn(dim, |_, _| gaussian(rng));
    PureState::normalized(v).expect("gaussian vector is nonzero")
}

/// Full-rank state from the Hilbert–Schmidt (Ginibre) ensemble.
pub fn random_density_matrix<R: Rng + ?Sized>(num_qubits: usize, rng: &mut R) -> DensityMatrix {
    let dim = 1usize << num_qubits;
    let g = CMatrix::from_fn(dim, dim, |_, _| gaussian(rng));
    let m = &g * g.adjoint();
    let tr = crate::linalg::trace(&m).re;
    let m = m.unscale(tr);
    DensityMatrix::new(crate::linalg::symmetrize(&m)).expect("dimension is a power of two")
}

/// Haar-random unitary via QR with the diagonal phases fixed.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(dim, dim, |_, _| gaussian(rng));
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for c in 0..dim {
        let d = r[(c, c)];
        if d.norm() > 0.0 {
            let phase = d / d.norm();
            for row in 0..dim {
                q[(row, c)] *= phase;
            }
        }
    }
    q
}
