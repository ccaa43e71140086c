use num_complex::Complex64;

use crate::error::{PqecError, Result};
use crate::linalg::CMatrix;
use crate::qstate::state::DensityMatrix;

/// Bloch vector `r` of a single-qubit state `ρ = (I + r·σ)/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochVector {
    pub r: [f64; 3],
}

impl BlochVector {
    /// Rejects vectors longer than one (beyond `1e-12`).
    pub fn new(r: [f64; 3]) -> Result<Self> {
        let v = Self { r };
        if v.norm() > 1.0 + 1e-12 {
            return Err(PqecError::InvalidState(format!(
                "Bloch vector length {} exceeds 1",
                v.norm()
            )));
        }
        Ok(v)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.r.iter().map(|x| x * x).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn dot(&self, other: &BlochVector) -> f64 {
        self.r.iter().zip(other.r.iter()).map(|(a, b)| a * b).sum()
    }

    pub fn scaled(&self, factor: f64) -> BlochVector {
        BlochVector {
            r: self.r.map(|x| x * factor),
        }
    }

    /// Unit vector `(sin θ cos φ, sin θ sin φ, cos θ)`.
    pub fn from_angles(theta: f64, phi: f64) -> BlochVector {
        BlochVector {
            r: [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()],
        }
    }
}

/// Reads the Bloch vector off a single-qubit density matrix.
pub fn bloch_decompose(rho: &DensityMatrix) -> Result<BlochVector> {
    if rho.num_qubits() != 1 {
        return Err(PqecError::DimensionMismatch {
            expected: 2,
            found: rho.dim(),
        });
    }
    let m = rho.matrix();
    let off = m[(0, 1)] + m[(1, 0)].conj();
    BlochVector::new([off.re, -off.im, (m[(0, 0)] - m[(1, 1)]).re])
}

/// `(I + r·σ)/2`.
pub fn bloch_compose(r: &BlochVector) -> Result<DensityMatrix> {
    let r = BlochVector::new(r.r)?;
    let [x, y, z] = r.r;
    let m = CMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new((1.0 + z) / 2.0, 0.0),
            Complex64::new(x / 2.0, -y / 2.0),
            Complex64::new(x / 2.0, y / 2.0),
            Complex64::new((1.0 - z) / 2.0, 0.0),
        ],
    );
    Ok(DensityMatrix::from_parts(m, 1))
}
