use std::fmt;

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{PqecError, Result};
use crate::linalg::{self, Mat2};

/// Largest register for which the `3^M` frame index space is enumerated.
pub const MAX_TWIRL_QUBITS: usize = 12;

/// Single-qubit frame unitary used for twirling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TwirlGate {
    I,
    H,
    HS,
}

impl TwirlGate {
    pub const ALL: [TwirlGate; 3] = [TwirlGate::I, TwirlGate::H, TwirlGate::HS];

    pub fn matrix(self) -> Mat2 {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let hadamard: Mat2 = [
            [Complex64::new(h, 0.0), Complex64::new(h, 0.0)],
            [Complex64::new(h, 0.0), Complex64::new(-h, 0.0)],
        ];
        let phase: Mat2 = [[linalg::ONE, linalg::ZERO], [linalg::ZERO, linalg::I]];
        match self {
            TwirlGate::I => linalg::PAULI_I,
            TwirlGate::H => hadamard,
            TwirlGate::HS => linalg::mat2_mul(&hadamard, &phase),
        }
    }
}

impl fmt::Display for TwirlGate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TwirlGate::I => "I",
            TwirlGate::H => "H",
            TwirlGate::HS => "HS",
        };
        f.write_str(s)
    }
}

/// A set of per-qubit frame sequences `U = U_0 ⊗ … ⊗ U_{M-1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwirlSet {
    num_qubits: usize,
    sequences: Vec<Vec<TwirlGate>>,
}

impl TwirlSet {
    pub fn new(num_qubits: usize, sequences: Vec<Vec<TwirlGate>>) -> Result<Self> {
        if sequences.is_empty() {
            return Err(PqecError::InvalidArgument("empty twirl set".into()));
        }
        if let Some(bad) = sequences.iter().find(|s| s.len() != num_qubits) {
            return Err(PqecError::DimensionMismatch {
                expected: num_qubits,
                found: bad.len(),
            });
        }
        let mut sorted = sequences.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != sequences.len() {
            return Err(PqecError::InvalidArgument("duplicate twirl sequence".into()));
        }
        Ok(Self { num_qubits, sequences })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn len(&self) -> usize {
        self.sequences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequences.is_empty()
    }

    pub fn sequences(&self) -> &[Vec<TwirlGate>] {
        &self.sequences
    }
}

/// Decodes a base-3 index into a gate sequence, qubit 0 most significant.
fn decode(mut index: usize, num_qubits: usize) -> Vec<TwirlGate> {
    let mut seq = vec![TwirlGate::I; num_qubits];
    for slot in seq.iter_mut().rev() {
        *slot = TwirlGate::ALL[index % 3];
        index /= 3;
    }
    seq
}

/// Number of sequences kept for a given fraction, `ceil(fraction · 3^M)`.
pub fn twirl_set_size(num_qubits: usize, fraction: f64) -> usize {
    let total = 3usize.pow(num_qubits as u32);
    // Absorb representation error such as 0.2 * 3^M landing a hair above an integer.
    let raw = fraction * total as f64;
    (((raw - 1e-9).ceil()) as usize).clamp(1, total)
}

/// Samples `ceil(fraction · 3^M)` distinct frame sequences.
///
/// With `fraction == 1` every sequence is returned in lexicographic order.
/// Otherwise a seeded partial Fisher–Yates shuffle over the `3^M` indices
/// picks the subset.
pub fn generate_twirl_set(num_qubits: usize, fraction: f64, seed: u64) -> Result<TwirlSet> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(PqecError::InvalidArgument(format!(
            "twirl fraction {fraction} outside (0, 1]"
        )));
    }
    if num_qubits == 0 || num_qubits > MAX_TWIRL_QUBITS {
        return Err(PqecError::ResourceLimit {
            what: "twirl set qubit count",
            max: MAX_TWIRL_QUBITS,
            requested: num_qubits,
        });
    }
    let total = 3usize.pow(num_qubits as u32);
    let size = twirl_set_size(num_qubits, fraction);
    let indices: Vec<usize> = if size == total {
        (0..total).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut pool: Vec<usize> = (0..total).collect();
        for i in 0..size {
            let j = rng.random_range(i..total);
            pool.swap(i, j);
        }
        pool.truncate(size);
        pool
    };
    TwirlSet::new(num_qubits, indices.into_iter().map(|i| decode(i, num_qubits)).collect())
}
