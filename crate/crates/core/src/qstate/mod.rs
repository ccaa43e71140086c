//! Quantum-state representations, Pauli algebra and spectral utilities.

mod bloch;
mod pauli;
pub mod random;
mod spectral;
mod state;
mod werner;

pub use bloch::{bloch_compose, bloch_decompose, BlochVector};
pub(crate) use pauli::scale_pauli_components;
pub use pauli::{
    pauli_expand, pauli_expand_operator, pauli_weight_distribution, Pauli, PauliExpansion, PauliString, PauliWeights,
    MAX_PAULI_QUBITS,
};
pub(crate) use spectral::spectral_power_f64;
pub use spectral::{spectral_power, spectrum, SpectralPower, Spectrum};
pub(crate) use state::check_dim;
pub use state::{
    density_from_pure, fidelity, purity, DensityMatrix, PureState, HERMITIAN_TOLERANCE, NORM_TOLERANCE, PSD_TOLERANCE,
    TRACE_TOLERANCE,
};
pub use werner::{werner_fidelity, werner_purify_lambda, WernerState};
