use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{PqecError, Result};
use crate::linalg::{self, CMatrix, Mat2};
use crate::qstate::state::{density_from_pure, DensityMatrix, PureState};

/// Largest register for which the full `4^M` Pauli expansion is computed.
pub const MAX_PAULI_QUBITS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn matrix(self) -> Mat2 {
        match self {
            Pauli::I => linalg::PAULI_I,
            Pauli::X => linalg::PAULI_X,
            Pauli::Y => linalg::PAULI_Y,
            Pauli::Z => linalg::PAULI_Z,
        }
    }

    fn flips(self) -> bool {
        matches!(self, Pauli::X | Pauli::Y)
    }

    /// Phase picked up by `P|b⟩` for basis bit `b`.
    fn phase(self, bit: bool) -> Complex64 {
        match (self, bit) {
            (Pauli::I, _) | (Pauli::X, _) | (Pauli::Z, false) => linalg::ONE,
            (Pauli::Z, true) => -linalg::ONE,
            (Pauli::Y, false) => linalg::I,
            (Pauli::Y, true) => -linalg::I,
        }
    }
}

/// A tensor product of single-qubit Paulis, qubit 0 first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    code: Vec<Pauli>,
}

impl PauliString {
    pub fn new(code: Vec<Pauli>) -> Self {
        Self { code }
    }

    pub fn identity(num_qubits: usize) -> Self {
        Self::new(vec![Pauli::I; num_qubits])
    }

    /// Decodes `index` in base 4 (I=0, X=1, Y=2, Z=3), qubit 0 most significant.
    pub fn from_index(index: usize, num_qubits: usize) -> Self {
        let code = (0..num_qubits)
            .map(|m| Pauli::ALL[(index >> (2 * (num_qubits - 1 - m))) & 3])
            .collect();
        Self { code }
    }

    pub fn index(&self) -> usize {
        self.code.iter().fold(0, |acc, p| (acc << 2) | *p as usize)
    }

    pub fn code(&self) -> &[Pauli] {
        &self.code
    }

    pub fn num_qubits(&self) -> usize {
        self.code.len()
    }

    /// Number of non-identity factors.
    pub fn weight(&self) -> usize {
        self.code.iter().filter(|&&p| p != Pauli::I).count()
    }

    fn flip_mask(&self) -> usize {
        let m = self.code.len();
        self.code
            .iter()
            .enumerate()
            .filter(|(_, p)| p.flips())
            .fold(0, |acc, (q, _)| acc | 1 << (m - 1 - q))
    }

    /// Phase `c_j` in `P|j⟩ = c_j |j ⊕ flip_mask⟩`.
    fn column_phase(&self, column: usize) -> Complex64 {
        let m = self.code.len();
        self.code
            .iter()
            .enumerate()
            .map(|(q, p)| p.phase(column >> (m - 1 - q) & 1 == 1))
            .product()
    }

    pub fn matrix(&self) -> CMatrix {
        let dim = 1usize << self.code.len();
        let mask = self.flip_mask();
        let mut out = CMatrix::zeros(dim, dim);
        for j in 0..dim {
            out[(j ^ mask, j)] = self.column_phase(j);
        }
        out
    }

    /// `Tr(ρ P)` in `O(D)`.
    pub fn expectation(&self, op: &CMatrix) -> Complex64 {
        let mask = self.flip_mask();
        (0..op.nrows()).map(|j| op[(j, j ^ mask)] * self.column_phase(j)).sum()
    }

    /// `acc += coeff · P`.
    fn accumulate_into(&self, acc: &mut CMatrix, coeff: f64) {
        let mask = self.flip_mask();
        for j in 0..acc.nrows() {
            acc[(j ^ mask, j)] += self.column_phase(j) * coeff;
        }
    }
}

/// Applies a Pauli-diagonal map, `P ↦ factors[index(P)] · P`, to any
/// `2^M × 2^M` operator.
pub(crate) fn scale_pauli_components(op: &CMatrix, factors: &[f64]) -> CMatrix {
    let dim = op.nrows();
    let m = dim.trailing_zeros() as usize;
    debug_assert_eq!(factors.len(), 1 << (2 * m));
    let mut out = CMatrix::zeros(dim, dim);
    for (index, &f) in factors.iter().enumerate() {
        if f == 0.0 {
            continue;
        }
        let p = PauliString::from_index(index, m);
        let coeff = p.expectation(op) * (f / dim as f64);
        // P is Hermitian, so Tr(op P) P accumulates with P's own entries.
        let mask = p.flip_mask();
        for j in 0..dim {
            out[(j ^ mask, j)] += p.column_phase(j) * coeff;
        }
    }
    out
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.code {
            write!(f, "{p:?}")?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = PqecError;

    fn from_str(s: &str) -> Result<Self> {
        let code = s
            .chars()
            .map(|ch| match ch.to_ascii_uppercase() {
                'I' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                other => Err(PqecError::InvalidArgument(format!("unknown Pauli factor {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        if code.is_empty() {
            return Err(PqecError::InvalidArgument("empty Pauli string".into()));
        }
        Ok(Self { code })
    }
}

/// Coefficients `r_P = Tr(ρ P)` for all `4^M` Pauli strings.
#[derive(Debug, Clone)]
pub struct PauliExpansion {
    num_qubits: usize,
    coeffs: Vec<f64>,
}

impl PauliExpansion {
    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn get(&self, pauli: &PauliString) -> Option<f64> {
        (pauli.num_qubits() == self.num_qubits).then(|| self.coeffs[pauli.index()])
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn iter(&self) -> impl Iterator<Item = (PauliString, f64)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, &r)| (PauliString::from_index(i, self.num_qubits), r))
    }

    /// `2^{-M} Σ_P r_P P`.
    pub fn reconstruct(&self) -> CMatrix {
        let dim = 1usize << self.num_qubits;
        let mut acc = CMatrix::zeros(dim, dim);
        for (p, r) in self.iter() {
            if r != 0.0 {
                p.accumulate_into(&mut acc, r);
            }
        }
        acc.unscale(dim as f64)
    }

    /// `Σ_P r_P²`, which equals `2^M Tr(ρ²)`.
    pub fn squared_norm(&self) -> f64 {
        self.coeffs.iter().map(|r| r * r).sum()
    }
}

fn check_pauli_size(num_qubits: usize) -> Result<()> {
    if num_qubits > MAX_PAULI_QUBITS {
        Err(PqecError::ResourceLimit {
            what: "Pauli expansion qubit count",
            max: MAX_PAULI_QUBITS,
            requested: num_qubits,
        })
    } else {
        Ok(())
    }
}

/// Expands `ρ` in the `M`-qubit Pauli basis.
pub fn pauli_expand(rho: &DensityMatrix) -> Result<PauliExpansion> {
    pauli_expand_operator(rho.matrix())
}

/// Pauli coefficients of any Hermitian operator whose size is `2^M`.
pub fn pauli_expand_operator(op: &CMatrix) -> Result<PauliExpansion> {
    let num_qubits = linalg::qubits_for_dim(op.nrows())
        .ok_or_else(|| PqecError::InvalidState("dimension is not a power of two".into()))?;
    check_pauli_size(num_qubits)?;
    let coeffs = (0..1usize << (2 * num_qubits))
        .map(|i| PauliString::from_index(i, num_qubits).expectation(op).re)
        .collect();
    Ok(PauliExpansion { num_qubits, coeffs })
}

/// Pauli-weight distribution `a_k` of a pure target and its mean weight.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliWeights {
    /// `a_0 … a_M`.
    pub weights: Vec<f64>,
    /// `k̄ = Σ k a_k`.
    pub mean_weight: f64,
}

/// `a_k = 2^{-M} Σ_{w(P)=k} r_P²`.
pub fn pauli_weight_distribution(psi: &PureState) -> Result<PauliWeights> {
    let m = psi.num_qubits();
    check_pauli_size(m)?;
    let expansion = pauli_expand(&density_from_pure(psi)?)?;
    let mut weights = vec![0.0; m + 1];
    for (p, r) in expansion.iter() {
        weights[p.weight()] += r * r;
    }
    let scale = (1usize << m) as f64;
    weights.iter_mut().for_each(|a| *a /= scale);
    let mean_weight = weights.iter().enumerate().map(|(k, a)| k as f64 * a).sum();
    Ok(PauliWeights { weights, mean_weight })
}
