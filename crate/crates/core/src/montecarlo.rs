//! Shot-level simulation of the purification measurement record and the
//! parity-weighted ratio estimator.
//!
//! Each shot draws a full outcome tree, then measures an observable on the
//! conditional state. The estimate of `Tr(O ρ^N)/Tr(ρ^N)` is
//! `mean(Ω o) / mean(Ω)`.
//!
//! Shot `k` uses its own ChaCha8 stream (`seed`, stream `k`), so results do
//! not depend on how shots are split across threads.

use std::ops::{Add, Range};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{PqecError, Result};
use crate::linalg::{self, CMatrix};
use crate::purifier::{swap_gadget, swap_probability, ConditionalOutcome, OutcomeString, DEGENERATE_PROBABILITY};
use crate::qstate::{self, check_dim, DensityMatrix};

/// Deepest tree the sampler will draw.
pub const MAX_SAMPLED_ROUNDS: u32 = 10;

/// Hermitian observable with its eigendecomposition cached.
#[derive(Debug, Clone)]
pub struct Observable {
    matrix: CMatrix,
    eigenvalues: Vec<f64>,
    eigenvectors: CMatrix,
}

impl Observable {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || linalg::qubits_for_dim(matrix.nrows()).is_none() {
            return Err(PqecError::InvalidArgument(
                "observable must be a square 2^M matrix".into(),
            ));
        }
        let dev = linalg::hermiticity_error(&matrix);
        if dev > qstate::HERMITIAN_TOLERANCE {
            return Err(PqecError::NotHermitian(dev));
        }
        let (eigenvalues, eigenvectors) = linalg::eigh(&matrix);
        Ok(Self {
            matrix,
            eigenvalues,
            eigenvectors,
        })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// `max |eigenvalue|`.
    pub fn operator_norm(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Born probabilities `⟨v_i|ρ|v_i⟩` in eigenvalue order.
    pub fn outcome_probabilities(&self, state: &DensityMatrix) -> Result<Vec<f64>> {
        check_dim(self.matrix.nrows(), state.dim())?;
        let rho = state.matrix();
        Ok((0..self.eigenvalues.len())
            .map(|i| {
                let v = self.eigenvectors.column(i);
                (v.adjoint() * rho * v)[(0, 0)].re.max(0.0)
            })
            .collect())
    }

    /// Draws one eigenvalue with its Born probability.
    pub fn sample<R: Rng + ?Sized>(&self, state: &DensityMatrix, rng: &mut R) -> Result<f64> {
        let probs = self.outcome_probabilities(state)?;
        let total: f64 = probs.iter().sum();
        let mut u = rng.random::<f64>() * total;
        for (i, p) in probs.iter().enumerate() {
            if u < *p {
                return Ok(self.eigenvalues[i]);
            }
            u -= p;
        }
        // Rounding left u just past the last nonzero bin.
        let last = probs.iter().rposition(|&p| p > 0.0).unwrap_or(0);
        Ok(self.eigenvalues[last])
    }
}

/// One shot: the outcome-string parity and the observable reading.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShotRecord {
    pub parity: i8,
    pub observable_outcome: f64,
}

/// Draws a full outcome tree for `ℓ` rounds with every leaf equal to `ρ`.
///
/// Each node outcome is drawn from its conditional probability given the
/// two child states. Zero-probability branches are never drawn.
pub fn sample_outcome_tree<R: Rng + ?Sized>(
    rho: &DensityMatrix,
    ell: u32,
    rng: &mut R,
) -> Result<(OutcomeString, ConditionalOutcome)> {
    if ell > MAX_SAMPLED_ROUNDS {
        return Err(PqecError::ResourceLimit {
            what: "sampled tree rounds",
            max: MAX_SAMPLED_ROUNDS as usize,
            requested: ell as usize,
        });
    }
    let mut outcomes = Vec::with_capacity((1usize << ell) - 1);
    let (state, probability) = sample_subtree(rho, ell, &mut outcomes, rng)?;
    let string = OutcomeString::new(outcomes, ell)?;
    let parity = string.parity();
    Ok((
        string,
        ConditionalOutcome {
            state,
            probability,
            parity,
        },
    ))
}

fn sample_subtree<R: Rng + ?Sized>(
    rho: &DensityMatrix,
    level: u32,
    outcomes: &mut Vec<i8>,
    rng: &mut R,
) -> Result<(DensityMatrix, f64)> {
    if level == 0 {
        return Ok((rho.clone(), 1.0));
    }
    let (left, p_left) = sample_subtree(rho, level - 1, outcomes, rng)?;
    let (right, p_right) = sample_subtree(rho, level - 1, outcomes, rng)?;
    let p_plus = swap_probability(&left, &right, 1)?;
    let sign = if 1.0 - p_plus < DEGENERATE_PROBABILITY {
        1
    } else if p_plus < DEGENERATE_PROBABILITY {
        -1
    } else if rng.random::<f64>() < p_plus {
        1
    } else {
        -1
    };
    outcomes.push(sign);
    let (state, p) = swap_gadget(&left, &right, sign)?;
    Ok((state, p_left * p_right * p))
}

/// Measures `observable` once on `state`.
pub fn sample_observable<R: Rng + ?Sized>(state: &DensityMatrix, observable: &CMatrix, rng: &mut R) -> Result<f64> {
    Observable::new(observable.clone())?.sample(state, rng)
}

/// Generator for shot `index` under `seed`.
pub fn shot_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn one_shot(rho: &DensityMatrix, observable: &Observable, ell: u32, seed: u64, index: u64) -> Result<ShotRecord> {
    let mut rng = shot_rng(seed, index);
    let (_, outcome) = sample_outcome_tree(rho, ell, &mut rng)?;
    let o = observable.sample(&outcome.state, &mut rng)?;
    Ok(ShotRecord {
        parity: outcome.parity,
        observable_outcome: o,
    })
}

fn check_inputs(rho: &DensityMatrix, observable: &Observable) -> Result<()> {
    check_dim(observable.matrix().nrows(), rho.dim())
}

/// Simulates the shots with indices in `shots`, in index order.
pub fn simulate_shots(
    rho: &DensityMatrix,
    observable: &Observable,
    ell: u32,
    seed: u64,
    shots: Range<u64>,
) -> Result<Vec<ShotRecord>> {
    check_inputs(rho, observable)?;
    shots
        .into_par_iter()
        .map(|k| one_shot(rho, observable, ell, seed, k))
        .collect()
}

/// Like [`simulate_shots`] but folds the records into running sums.
pub fn simulate_accumulate(
    rho: &DensityMatrix,
    observable: &Observable,
    ell: u32,
    seed: u64,
    shots: Range<u64>,
) -> Result<ShotAccumulator> {
    check_inputs(rho, observable)?;
    shots
        .into_par_iter()
        .map(|k| one_shot(rho, observable, ell, seed, k).map(ShotAccumulator::from))
        .try_reduce(ShotAccumulator::default, |a, b| Ok(a + b))
}

/// Running sums sufficient for the ratio estimator.
///
/// Merging is associative and commutative up to floating-point rounding.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ShotAccumulator {
    pub n: u64,
    pub sum_parity: f64,
    pub sum_parity_outcome: f64,
    pub sum_outcome: f64,
    pub sum_outcome_sqr: f64,
}

impl ShotAccumulator {
    pub fn push(&mut self, shot: &ShotRecord) {
        *self = *self + ShotAccumulator::from(*shot);
    }

    pub fn finish(&self) -> Result<EstimatorResult> {
        if self.n < 2 {
            return Err(PqecError::InvalidArgument(format!(
                "ratio estimate needs at least 2 shots, got {}",
                self.n
            )));
        }
        let n = self.n as f64;
        let a_hat = self.sum_parity_outcome / n;
        let b_hat = self.sum_parity / n;
        let status = if b_hat.abs() < 3.0 / n.sqrt() {
            EstimatorStatus::UnstableDenominator
        } else {
            EstimatorStatus::Ok
        };
        let estimate = a_hat / b_hat;
        // Ω² = 1, so the plug-in variance of Ω(o − e) only needs moments of o.
        let second = (self.sum_outcome_sqr - 2.0 * estimate * self.sum_outcome) / n + estimate * estimate;
        let first = a_hat - estimate * b_hat;
        let variance = (second - first * first).max(0.0);
        let standard_error = variance.sqrt() / (n.sqrt() * b_hat.abs());
        Ok(EstimatorResult {
            estimate,
            numerator_mean: a_hat,
            denominator_mean: b_hat,
            standard_error,
            n_samples: self.n,
            status,
        })
    }
}

impl From<ShotRecord> for ShotAccumulator {
    fn from(s: ShotRecord) -> Self {
        let w = f64::from(s.parity);
        let o = s.observable_outcome;
        Self {
            n: 1,
            sum_parity: w,
            sum_parity_outcome: w * o,
            sum_outcome: o,
            sum_outcome_sqr: o * o,
        }
    }
}

impl Add for ShotAccumulator {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        Self {
            n: self.n + rhs.n,
            sum_parity: self.sum_parity + rhs.sum_parity,
            sum_parity_outcome: self.sum_parity_outcome + rhs.sum_parity_outcome,
            sum_outcome: self.sum_outcome + rhs.sum_outcome,
            sum_outcome_sqr: self.sum_outcome_sqr + rhs.sum_outcome_sqr,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimatorStatus {
    Ok,
    /// `|B̂| < 3/√n`: the denominator is not resolved from zero.
    UnstableDenominator,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorResult {
    /// `Â / B̂`.
    pub estimate: f64,
    /// `Â = mean(Ω o)`.
    pub numerator_mean: f64,
    /// `B̂ = mean(Ω)`.
    pub denominator_mean: f64,
    pub standard_error: f64,
    pub n_samples: u64,
    pub status: EstimatorStatus,
}

/// Ratio estimate from a list of shots.
pub fn ratio_estimate(shots: &[ShotRecord]) -> Result<EstimatorResult> {
    shots
        .iter()
        .fold(ShotAccumulator::default(), |acc, s| acc + ShotAccumulator::from(*s))
        .finish()
}

/// `ceil(1 / (ε² · Tr(ρ^N)²))` samples for an observable with `‖O‖∞ ≤ 1`.
pub fn required_samples(epsilon: f64, trace_rho_n: f64) -> Result<u64> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(PqecError::InvalidArgument(format!(
            "epsilon {epsilon} must be positive"
        )));
    }
    if !(trace_rho_n > 0.0 && trace_rho_n <= 1.0) {
        return Err(PqecError::InvalidArgument(format!(
            "Tr(rho^N) = {trace_rho_n} outside (0, 1]"
        )));
    }
    let x = 1.0 / (epsilon * epsilon * trace_rho_n * trace_rho_n);
    // Snap values that land within rounding of an integer, e.g. 9999.999999999998.
    let nearest = x.round();
    let n = if (x - nearest).abs() <= 1e-9 * x {
        nearest
    } else {
        x.ceil()
    };
    Ok(n as u64)
}
