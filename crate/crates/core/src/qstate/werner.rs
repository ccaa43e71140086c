use crate::error::{check_probability, PqecError, Result};
use crate::qstate::state::{density_from_pure, DensityMatrix, PureState};

/// `(1-λ)|ψ⟩⟨ψ| + λ I/D`, closed under global depolarizing noise and
/// purification.
#[derive(Debug, Clone, PartialEq)]
pub struct WernerState {
    lambda: f64,
    target: PureState,
}

impl WernerState {
    pub fn new(lambda: f64, target: PureState) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(PqecError::InvalidArgument(format!(
                "Werner parameter {lambda} outside [0, 1]"
            )));
        }
        Ok(Self { lambda, target })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn dim(&self) -> usize {
        self.target.dim()
    }

    pub fn target(&self) -> &PureState {
        &self.target
    }

    /// `1 - λ(1 - 1/D)`.
    pub fn fidelity(&self) -> f64 {
        werner_fidelity(self.lambda, self.dim())
    }

    pub fn to_density(&self) -> Result<DensityMatrix> {
        let d = self.dim();
        let proj = density_from_pure(&self.target)?;
        let mut m = proj.into_matrix().scale(1.0 - self.lambda);
        for i in 0..d {
            m[(i, i)] += self.lambda / d as f64;
        }
        DensityMatrix::new(m)
    }

    /// `λ → (1-p)λ + p`.
    pub fn depolarized(&self, p: f64) -> Result<Self> {
        check_probability(p)?;
        Ok(Self {
            lambda: (1.0 - p) * self.lambda + p,
            target: self.target.clone(),
        })
    }

    /// One purification round, `λ → λ² / (D(1-λ)² - λ(λ-2))`.
    pub fn purified(&self) -> Self {
        Self {
            lambda: werner_purify_lambda(self.lambda, self.dim()),
            target: self.target.clone(),
        }
    }
}

pub fn werner_fidelity(lambda: f64, dim: usize) -> f64 {
    1.0 - lambda * (1.0 - 1.0 / dim as f64)
}

pub fn werner_purify_lambda(lambda: f64, dim: usize) -> f64 {
    let d = dim as f64;
    lambda * lambda / (d * (1.0 - lambda).powi(2) - lambda * (lambda - 2.0))
}
