//! Purification quantum error correction (PQEC).
//!
//! Noisy copies of an unknown state are merged pairwise with SWAP-test
//! gadgets; weighting every measurement record by the parity of its SWAP
//! outcomes isolates the purified component `ρ^N / Tr ρ^N` with `N = 2^ℓ`.
//!
//! Modules:
//!
//! - [`qstate`]: dense pure/mixed states, Pauli algebra, spectral helpers.
//! - [`channels`]: global/local depolarizing, local dephasing and Clifford twirling.
//! - [`purifier`]: the SWAP gadget, the outcome tree and the exact purification maps.
//! - [`montecarlo`]: shot-level sampling of the measurement record and the ratio estimator.
//! - [`threshold`]: channel/purify cycles, parameter sweeps and threshold extraction.

pub mod channels;
pub mod error;
pub mod linalg;
pub mod montecarlo;
pub mod purifier;
pub mod qstate;
pub mod threshold;

pub use error::{PqecError, Result};
pub use linalg::CMatrix;
pub use qstate::{BlochVector, DensityMatrix, PauliString, PureState, WernerState};
