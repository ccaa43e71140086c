use num_complex::Complex64;

use crate::error::{PqecError, Result};
use crate::linalg::{self, CMatrix, CVector};

pub const NORM_TOLERANCE: f64 = 1e-12;
pub const HERMITIAN_TOLERANCE: f64 = 1e-10;
pub const TRACE_TOLERANCE: f64 = 1e-10;
pub const PSD_TOLERANCE: f64 = 1e-10;

/// A normalized state vector on `num_qubits` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: CVector,
    num_qubits: usize,
}

impl PureState {
    /// Wraps `amplitudes`, rejecting vectors that are not unit-norm or whose
    /// length is not a power of two.
    pub fn new(amplitudes: CVector) -> Result<Self> {
        let num_qubits = linalg::qubits_for_dim(amplitudes.len()).ok_or_else(|| {
            PqecError::InvalidState(format!("state length {} is not a power of two", amplitudes.len()))
        })?;
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(PqecError::InvalidState(format!("state norm {norm} differs from 1")));
        }
        Ok(Self { amplitudes, num_qubits })
    }

    /// Normalizes `amplitudes` before wrapping them.
    pub fn normalized(amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(PqecError::InvalidState("cannot normalize a zero vector".into()));
        }
        Self::new(amplitudes.unscale(norm))
    }

    pub fn from_slice(amplitudes: &[Complex64]) -> Result<Self> {
        Self::new(CVector::from_column_slice(amplitudes))
    }

    pub fn basis(num_qubits: usize, index: usize) -> Result<Self> {
        let dim = 1usize << num_qubits;
        if num_qubits == 0 || index >= dim {
            return Err(PqecError::InvalidArgument(format!(
                "basis index {index} out of range for {num_qubits} qubits"
            )));
        }
        let mut v = CVector::zeros(dim);
        v[index] = linalg::ONE;
        Self::new(v)
    }

    /// `|0⟩^{⊗M}`.
    pub fn zero(num_qubits: usize) -> Result<Self> {
        Self::basis(num_qubits, 0)
    }

    /// `|+⟩^{⊗M}`.
    pub fn plus(num_qubits: usize) -> Result<Self> {
        Self::bloch_product(std::f64::consts::FRAC_PI_2, 0.0, num_qubits)
    }

    /// `(cos θ/2 |0⟩ + e^{iφ} sin θ/2 |1⟩)^{⊗M}`.
    pub fn bloch_product(theta: f64, phi: f64, num_qubits: usize) -> Result<Self> {
        let qubit = [
            Complex64::new((theta / 2.0).cos(), 0.0),
            Complex64::from_polar((theta / 2.0).sin(), phi),
        ];
        Self::product(&vec![qubit; num_qubits])
    }

    /// Tensor product of single-qubit amplitude pairs, qubit 0 first.
    pub fn product(qubits: &[[Complex64; 2]]) -> Result<Self> {
        if qubits.is_empty() {
            return Err(PqecError::InvalidArgument("product of zero qubits".into()));
        }
        let mut v = CVector::from_element(1, linalg::ONE);
        for q in qubits {
            v = linalg::kron_vec(&v, &CVector::from_column_slice(q));
        }
        Self::normalized(v)
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    /// `⟨ψ|O|ψ⟩` for any square operator of matching size.
    pub fn expectation(&self, op: &CMatrix) -> Result<Complex64> {
        if op.nrows() != self.dim() || op.ncols() != self.dim() {
            return Err(PqecError::DimensionMismatch {
                expected: self.dim(),
                found: op.nrows(),
            });
        }
        Ok(self.amplitudes.dotc(&(op * &self.amplitudes)))
    }
}

/// A density operator on `num_qubits` qubits.
///
/// Construction only checks the shape; [`DensityMatrix::validate`] checks
/// Hermiticity, unit trace and positivity on demand.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    entries: CMatrix,
    num_qubits: usize,
}

impl DensityMatrix {
    pub fn new(entries: CMatrix) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(PqecError::InvalidState(format!(
                "density matrix must be square, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        let num_qubits = linalg::qubits_for_dim(entries.nrows())
            .ok_or_else(|| PqecError::InvalidState(format!("dimension {} is not a power of two", entries.nrows())))?;
        Ok(Self { entries, num_qubits })
    }

    /// [`DensityMatrix::new`] followed by [`DensityMatrix::validate`].
    pub fn checked(entries: CMatrix) -> Result<Self> {
        let rho = Self::new(entries)?;
        rho.validate()?;
        Ok(rho)
    }

    /// Real diagonal density matrix.
    pub fn diagonal(weights: &[f64]) -> Result<Self> {
        let n = weights.len();
        Self::new(CMatrix::from_fn(n, n, |r, c| {
            if r == c {
                Complex64::new(weights[r], 0.0)
            } else {
                linalg::ZERO
            }
        }))
    }

    /// `I / D`.
    pub fn maximally_mixed(num_qubits: usize) -> Result<Self> {
        let dim = 1usize << num_qubits;
        Self::diagonal(&vec![1.0 / dim as f64; dim])
    }

    pub(crate) fn from_parts(entries: CMatrix, num_qubits: usize) -> Self {
        debug_assert_eq!(entries.nrows(), 1 << num_qubits);
        Self { entries, num_qubits }
    }

    pub fn validate(&self) -> Result<()> {
        let herm = linalg::hermiticity_error(&self.entries);
        if herm > HERMITIAN_TOLERANCE {
            return Err(PqecError::InvalidState(format!(
                "not Hermitian (max |ρ - ρ†| = {herm:e})"
            )));
        }
        let tr = linalg::trace(&self.entries);
        if (tr.re - 1.0).abs() > TRACE_TOLERANCE || tr.im.abs() > TRACE_TOLERANCE {
            return Err(PqecError::InvalidState(format!("trace {tr} differs from 1")));
        }
        let (values, _) = linalg::eigh(&self.entries);
        let min = values.last().copied().unwrap_or(0.0);
        if min < -PSD_TOLERANCE {
            return Err(PqecError::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        Ok(())
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_matrix(self) -> CMatrix {
        self.entries
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn trace(&self) -> f64 {
        linalg::trace(&self.entries).re
    }

    /// `Tr(O ρ)`, real part.
    pub fn expectation(&self, op: &CMatrix) -> Result<f64> {
        check_dim(self.dim(), op.nrows())?;
        Ok(linalg::trace_of_product(op, &self.entries).re)
    }

    pub(crate) fn check_same_dim(&self, other: &DensityMatrix) -> Result<()> {
        check_dim(self.dim(), other.dim())
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(PqecError::DimensionMismatch { expected, found })
    }
}

/// `|ψ⟩⟨ψ|`.
pub fn density_from_pure(psi: &PureState) -> Result<DensityMatrix> {
    let norm = psi.amplitudes().norm();
    if (norm - 1.0).abs() > NORM_TOLERANCE {
        return Err(PqecError::InvalidState(format!("state norm {norm} differs from 1")));
    }
    let v = psi.amplitudes();
    Ok(DensityMatrix::from_parts(v * v.adjoint(), psi.num_qubits()))
}

/// `⟨ψ|ρ|ψ⟩`, clamped to `[0, 1]` against rounding.
pub fn fidelity(rho: &DensityMatrix, psi: &PureState) -> Result<f64> {
    check_dim(rho.dim(), psi.dim())?;
    Ok(psi.expectation(rho.matrix())?.re.clamp(0.0, 1.0))
}

/// `Tr(ρ²)`, capped at 1.
pub fn purity(rho: &DensityMatrix) -> f64 {
    linalg::trace_of_product(rho.matrix(), rho.matrix()).re.min(1.0)
}
