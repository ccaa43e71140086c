use crate::error::{PqecError, Result};
use crate::linalg::{self, CMatrix};
use crate::qstate::state::{DensityMatrix, PSD_TOLERANCE};

/// Clamped, renormalized spectrum of a density matrix.
#[derive(Debug, Clone)]
pub struct Spectrum {
    /// Eigenvalues in descending order, non-negative, summing to one.
    pub values: Vec<f64>,
    /// Eigenvectors as columns, matching `values`.
    pub vectors: CMatrix,
}

/// Eigendecomposition of the symmetrized `ρ`.
///
/// Eigenvalues in `[-1e-10, 0)` are clamped to zero and the spectrum is
/// renormalized to unit sum; anything more negative is rejected.
pub fn spectrum(rho: &DensityMatrix) -> Result<Spectrum> {
    let (mut values, vectors) = linalg::eigh(rho.matrix());
    for v in values.iter_mut() {
        if *v < 0.0 {
            if *v < -PSD_TOLERANCE {
                return Err(PqecError::InvalidState(format!("negative eigenvalue {v:e}")));
            }
            *v = 0.0;
        }
    }
    let total: f64 = values.iter().sum();
    if total <= 0.0 {
        return Err(PqecError::Internal("all-zero spectrum".into()));
    }
    values.iter_mut().for_each(|v| *v /= total);
    Ok(Spectrum { values, vectors })
}

/// `ρ^N` kept in scaled form: `ρ^N = exp(log_scale) · scaled`.
///
/// Eigenvalues are divided by `λ_max` before powering, so `scaled` has
/// largest eigenvalue exactly one and never underflows as a whole.
#[derive(Debug, Clone)]
pub struct SpectralPower {
    pub scaled: CMatrix,
    /// `N · ln λ_max`.
    pub log_scale: f64,
    /// `Tr(scaled)`, always in `[1, D]`.
    pub scaled_trace: f64,
    pub power: f64,
    pub spectrum: Spectrum,
}

impl SpectralPower {
    /// `Tr(ρ^N)`; may underflow to zero for very large `N`.
    pub fn trace(&self) -> f64 {
        self.log_trace().exp()
    }

    pub fn log_trace(&self) -> f64 {
        self.log_scale + self.scaled_trace.ln()
    }

    /// Unnormalized `ρ^N`; may underflow for very large `N`.
    pub fn matrix(&self) -> CMatrix {
        self.scaled.scale(self.log_scale.exp())
    }

    /// `ρ^N / Tr(ρ^N)`.
    pub fn normalized(&self) -> CMatrix {
        self.scaled.unscale(self.scaled_trace)
    }

    /// Normalized eigenvalues of `ρ^N / Tr(ρ^N)` in the eigenbasis of `ρ`.
    pub fn normalized_weights(&self) -> Vec<f64> {
        let lmax = self.spectrum.values[0];
        self.spectrum
            .values
            .iter()
            .map(|&v| scaled_power(v / lmax, self.power) / self.scaled_trace)
            .collect()
    }
}

fn scaled_power(ratio: f64, power: f64) -> f64 {
    if ratio <= 0.0 {
        0.0
    } else {
        (power * ratio.ln()).exp()
    }
}

/// `ρ^N` for a positive power `N`, computed on the spectrum.
pub fn spectral_power(rho: &DensityMatrix, power: u64) -> Result<SpectralPower> {
    if power == 0 {
        return Err(PqecError::InvalidArgument("power must be at least 1".into()));
    }
    spectral_power_f64(rho, power as f64)
}

pub(crate) fn spectral_power_f64(rho: &DensityMatrix, power: f64) -> Result<SpectralPower> {
    let spec = spectrum(rho)?;
    let lmax = spec.values[0];
    let weights: Vec<f64> = spec.values.iter().map(|&v| scaled_power(v / lmax, power)).collect();
    let scaled_trace = weights.iter().sum();
    let scaled = linalg::from_spectrum(&weights, &spec.vectors);
    Ok(SpectralPower {
        scaled,
        log_scale: power * lmax.ln(),
        scaled_trace,
        power,
        spectrum: spec,
    })
}
