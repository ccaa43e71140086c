//! Noise channels applied per register between purification cycles, plus
//! Clifford twirling of the dephasing channel.
//!
//! All channels are implemented on raw operators so they can be compared as
//! linear maps on the Pauli basis; the [`DensityMatrix`] wrappers are what
//! the rest of the crate uses.

mod twirl;

pub use twirl::{generate_twirl_set, twirl_set_size, TwirlGate, TwirlSet, MAX_TWIRL_QUBITS};

use crate::error::{check_probability, PqecError, Result};
use crate::linalg::{self, CMatrix, Mat2};
use crate::qstate::{scale_pauli_components, DensityMatrix, Pauli, PauliString, MAX_PAULI_QUBITS};

/// Noise channel family and strength.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseModel {
    GlobalDepolarizing {
        p: f64,
    },
    LocalDepolarizing {
        p: f64,
    },
    LocalDephasing {
        p: f64,
    },
    /// Local dephasing averaged over a seeded subset of `{I, H, HS}^{⊗M}`.
    TwirledDephasing {
        p: f64,
        twirl_fraction: f64,
        twirl_seed: u64,
    },
}

impl NoiseModel {
    pub fn p(&self) -> f64 {
        match *self {
            NoiseModel::GlobalDepolarizing { p }
            | NoiseModel::LocalDepolarizing { p }
            | NoiseModel::LocalDephasing { p }
            | NoiseModel::TwirledDephasing { p, .. } => p,
        }
    }

    /// Same family with a different error probability.
    pub fn with_p(&self, p: f64) -> NoiseModel {
        let mut out = *self;
        match &mut out {
            NoiseModel::GlobalDepolarizing { p: q }
            | NoiseModel::LocalDepolarizing { p: q }
            | NoiseModel::LocalDephasing { p: q }
            | NoiseModel::TwirledDephasing { p: q, .. } => *q = p,
        }
        out
    }

    pub fn name(&self) -> &'static str {
        match self {
            NoiseModel::GlobalDepolarizing { .. } => "global-depol",
            NoiseModel::LocalDepolarizing { .. } => "local-depol",
            NoiseModel::LocalDephasing { .. } => "dephasing",
            NoiseModel::TwirledDephasing { .. } => "twirled-dephasing",
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_probability(self.p())?;
        if let NoiseModel::TwirledDephasing { twirl_fraction, .. } = *self {
            if !(twirl_fraction > 0.0 && twirl_fraction <= 1.0) {
                return Err(PqecError::InvalidArgument(format!(
                    "twirl fraction {twirl_fraction} outside (0, 1]"
                )));
            }
        }
        Ok(())
    }

    /// Resolves the model for an `M`-qubit register, sampling the twirl set
    /// once so repeated applications use the same subset.
    pub fn build(&self, num_qubits: usize) -> Result<Channel> {
        self.validate()?;
        let kind = match *self {
            NoiseModel::GlobalDepolarizing { p } => ChannelKind::GlobalDepolarizing { p },
            NoiseModel::LocalDepolarizing { p } => ChannelKind::LocalDepolarizing { p },
            NoiseModel::LocalDephasing { p } => ChannelKind::LocalDephasing { p },
            NoiseModel::TwirledDephasing {
                p,
                twirl_fraction,
                twirl_seed,
            } => {
                let set = generate_twirl_set(num_qubits, twirl_fraction, twirl_seed)?;
                let transfer = (num_qubits <= MAX_PAULI_QUBITS).then(|| twirled_dephasing_transfer(p, &set));
                ChannelKind::TwirledDephasing { p, set, transfer }
            }
        };
        Ok(Channel {
            num_qubits,
            model: *self,
            kind,
        })
    }
}

#[derive(Debug, Clone)]
enum ChannelKind {
    GlobalDepolarizing {
        p: f64,
    },
    LocalDepolarizing {
        p: f64,
    },
    LocalDephasing {
        p: f64,
    },
    TwirledDephasing {
        p: f64,
        set: TwirlSet,
        /// Pauli-transfer eigenvalues, when the register is small enough.
        transfer: Option<Vec<f64>>,
    },
}

/// A [`NoiseModel`] bound to a register size.
#[derive(Debug, Clone)]
pub struct Channel {
    num_qubits: usize,
    model: NoiseModel,
    kind: ChannelKind,
}

impl Channel {
    pub fn model(&self) -> &NoiseModel {
        &self.model
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn twirl_set(&self) -> Option<&TwirlSet> {
        match &self.kind {
            ChannelKind::TwirledDephasing { set, .. } => Some(set),
            _ => None,
        }
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        crate::qstate::check_dim(1 << self.num_qubits, rho.dim())?;
        let out = self.apply_operator(rho.matrix());
        Ok(DensityMatrix::from_parts(out, self.num_qubits))
    }

    /// The channel as a linear map on arbitrary `D×D` operators.
    pub fn apply_operator(&self, op: &CMatrix) -> CMatrix {
        let m = self.num_qubits;
        match &self.kind {
            ChannelKind::GlobalDepolarizing { p } => global_depolarizing_op(op, *p),
            ChannelKind::LocalDepolarizing { p } => local_depolarizing_op(op, *p, m),
            ChannelKind::LocalDephasing { p } => local_dephasing_op(op, *p, m),
            ChannelKind::TwirledDephasing {
                transfer: Some(factors),
                ..
            } => scale_pauli_components(op, factors),
            ChannelKind::TwirledDephasing { p, set, .. } => twirled_dephasing_op(op, *p, set),
        }
    }
}

fn scaled(m: &Mat2, s: f64) -> Mat2 {
    m.map(|row| row.map(|z| z * s))
}

fn global_depolarizing_op(op: &CMatrix, p: f64) -> CMatrix {
    let d = op.nrows();
    let tr = linalg::trace(op);
    let mut out = op.scale(1.0 - p);
    for i in 0..d {
        out[(i, i)] += tr * (p / d as f64);
    }
    out
}

fn depolarizing_kraus(p: f64) -> [Mat2; 4] {
    let s = (p / 3.0).sqrt();
    [
        scaled(&linalg::PAULI_I, (1.0 - p).sqrt()),
        scaled(&linalg::PAULI_X, s),
        scaled(&linalg::PAULI_Y, s),
        scaled(&linalg::PAULI_Z, s),
    ]
}

fn dephasing_kraus(p: f64) -> [Mat2; 2] {
    [
        scaled(&linalg::PAULI_I, (1.0 - p).sqrt()),
        scaled(&linalg::PAULI_Z, p.sqrt()),
    ]
}

/// Applies the same single-qubit Kraus map to every qubit in the given order.
fn per_qubit_kraus(op: &CMatrix, kraus: &[Mat2], order: impl IntoIterator<Item = usize>, m: usize) -> CMatrix {
    order
        .into_iter()
        .fold(op.clone(), |acc, q| linalg::kraus_on_qubit(&acc, kraus, q, m))
}

fn local_depolarizing_op(op: &CMatrix, p: f64, m: usize) -> CMatrix {
    per_qubit_kraus(op, &depolarizing_kraus(p), 0..m, m)
}

fn local_dephasing_op(op: &CMatrix, p: f64, m: usize) -> CMatrix {
    per_qubit_kraus(op, &dephasing_kraus(p), 0..m, m)
}

fn twirled_dephasing_op(op: &CMatrix, p: f64, set: &TwirlSet) -> CMatrix {
    let m = set.num_qubits();
    let kraus = dephasing_kraus(p);
    let mut acc = CMatrix::zeros(op.nrows(), op.ncols());
    for seq in set.sequences() {
        // U† E_z(U ρ U†) U with U = ⊗_q U_q
        let mut x = op.clone();
        for (q, gate) in seq.iter().enumerate() {
            x = linalg::conjugate_on_qubit(&x, &gate.matrix(), q, m);
        }
        x = per_qubit_kraus(&x, &kraus, 0..m, m);
        for (q, gate) in seq.iter().enumerate() {
            x = linalg::conjugate_on_qubit(&x, &linalg::mat2_adjoint(&gate.matrix()), q, m);
        }
        acc += x;
    }
    acc.unscale(set.len() as f64)
}

/// Dephasing axis seen by the register after conjugating by a frame gate.
fn frame_axis(gate: TwirlGate) -> Pauli {
    match gate {
        TwirlGate::I => Pauli::Z,
        TwirlGate::H => Pauli::X,
        TwirlGate::HS => Pauli::Y,
    }
}

/// Each frame sequence turns `Z`-dephasing into dephasing along one Pauli
/// axis per qubit, which multiplies a Pauli string by `1 - 2p` for every
/// factor that anticommutes with that axis. The twirl is the average of
/// these diagonal maps.
fn twirled_dephasing_transfer(p: f64, set: &TwirlSet) -> Vec<f64> {
    let m = set.num_qubits();
    let damp = 1.0 - 2.0 * p;
    let mut factors = vec![0.0; 1 << (2 * m)];
    for seq in set.sequences() {
        for (index, f) in factors.iter_mut().enumerate() {
            let pauli = PauliString::from_index(index, m);
            *f += pauli
                .code()
                .iter()
                .zip(seq)
                .map(|(&q, &g)| if q == Pauli::I || q == frame_axis(g) { 1.0 } else { damp })
                .product::<f64>();
        }
    }
    let n = set.len() as f64;
    factors.iter_mut().for_each(|f| *f /= n);
    factors
}

/// `(1-p)ρ + p I/D`.
pub fn apply_global_depolarizing(rho: &DensityMatrix, p: f64) -> Result<DensityMatrix> {
    NoiseModel::GlobalDepolarizing { p }.build(rho.num_qubits())?.apply(rho)
}

/// Single-qubit depolarizing channel on every qubit.
pub fn apply_local_depolarizing(rho: &DensityMatrix, p: f64) -> Result<DensityMatrix> {
    NoiseModel::LocalDepolarizing { p }.build(rho.num_qubits())?.apply(rho)
}

/// `(1-p)ρ + p ZρZ` on every qubit.
pub fn apply_local_dephasing(rho: &DensityMatrix, p: f64) -> Result<DensityMatrix> {
    NoiseModel::LocalDephasing { p }.build(rho.num_qubits())?.apply(rho)
}

/// `(1/T) Σ_{U∈set} U† E_z(U ρ U†) U`.
pub fn apply_twirled_dephasing(rho: &DensityMatrix, p: f64, set: &TwirlSet) -> Result<DensityMatrix> {
    check_probability(p)?;
    if set.is_empty() {
        return Err(PqecError::InvalidArgument("empty twirl set".into()));
    }
    crate::qstate::check_dim(1 << set.num_qubits(), rho.dim())?;
    Ok(DensityMatrix::from_parts(
        twirled_dephasing_op(rho.matrix(), p, set),
        rho.num_qubits(),
    ))
}

/// Local dephasing applied qubit by qubit in an explicit order.
pub fn apply_local_dephasing_in_order(rho: &DensityMatrix, p: f64, order: &[usize]) -> Result<DensityMatrix> {
    check_probability(p)?;
    let m = rho.num_qubits();
    if let Some(&q) = order.iter().find(|&&q| q >= m) {
        return Err(PqecError::InvalidArgument(format!("qubit {q} out of range")));
    }
    Ok(DensityMatrix::from_parts(
        per_qubit_kraus(rho.matrix(), &dephasing_kraus(p), order.iter().copied(), m),
        m,
    ))
}

/// Local depolarizing applied qubit by qubit in an explicit order.
pub fn apply_local_depolarizing_in_order(rho: &DensityMatrix, p: f64, order: &[usize]) -> Result<DensityMatrix> {
    check_probability(p)?;
    let m = rho.num_qubits();
    if let Some(&q) = order.iter().find(|&&q| q >= m) {
        return Err(PqecError::InvalidArgument(format!("qubit {q} out of range")));
    }
    Ok(DensityMatrix::from_parts(
        per_qubit_kraus(rho.matrix(), &depolarizing_kraus(p), order.iter().copied(), m),
        m,
    ))
}

/// Maximum entrywise deviation between two channels over all `4^M` Pauli
/// inputs, which by linearity compares them as maps.
pub fn channel_matrix_equality<A, B>(a: A, b: B, num_qubits: usize) -> Result<f64>
where
    A: Fn(&CMatrix) -> CMatrix,
    B: Fn(&CMatrix) -> CMatrix,
{
    let dim = 1usize << num_qubits;
    let mut worst: f64 = 0.0;
    for index in 0..1usize << (2 * num_qubits) {
        let input = PauliString::from_index(index, num_qubits).matrix();
        let (oa, ob) = (a(&input), b(&input));
        if oa.shape() != (dim, dim) || ob.shape() != (dim, dim) {
            return Err(PqecError::DimensionMismatch {
                expected: dim,
                found: if oa.nrows() != dim { oa.nrows() } else { ob.nrows() },
            });
        }
        worst = worst.max(linalg::max_abs_diff(&oa, &ob));
    }
    Ok(worst)
}

/// Convenience for comparing two resolved channels.
pub fn channel_deviation(a: &Channel, b: &Channel) -> Result<f64> {
    if a.num_qubits() != b.num_qubits() {
        return Err(PqecError::DimensionMismatch {
            expected: 1 << a.num_qubits(),
            found: 1 << b.num_qubits(),
        });
    }
    channel_matrix_equality(|x| a.apply_operator(x), |x| b.apply_operator(x), a.num_qubits())
}
