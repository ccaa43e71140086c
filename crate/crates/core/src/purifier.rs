//! SWAP-gadget purification.
//!
//! A gadget projects two registers onto the symmetric (`+1`) or
//! antisymmetric (`-1`) subspace and discards the second one. Stacking
//! gadgets into a binary tree of depth `ℓ` consumes `N = 2^ℓ` copies; the
//! parity-weighted average over all `2^ℓ - 1` outcomes is exactly `ρ^N`,
//! while the plain average gives back `ρ`. The exact map used everywhere
//! else is the spectral shortcut [`purified_state`]; the explicit tree is
//! kept for small `ℓ` as an independent check.

use rayon::prelude::*;

use crate::error::{PqecError, Result};
use crate::linalg::{self, CMatrix};
use crate::qstate::{self, check_dim, fidelity, purity, spectral_power_f64, BlochVector, DensityMatrix, PureState};

/// Branch probabilities below this are treated as impossible outcomes.
pub const DEGENERATE_PROBABILITY: f64 = 1e-14;

/// Deepest tree evaluated by exhaustive outcome enumeration.
pub const MAX_TREE_ROUNDS: u32 = 4;

/// Deepest purification supported by the spectral path (`N = 2^ℓ` must be
/// representable as a float power).
pub const MAX_SPECTRAL_ROUNDS: u32 = 60;

/// SWAP-test outcomes of a depth-`ℓ` tree, listed left subtree, right
/// subtree, then root (post-order).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OutcomeString {
    outcomes: Vec<i8>,
    rounds: u32,
}

impl OutcomeString {
    pub fn new(outcomes: Vec<i8>, rounds: u32) -> Result<Self> {
        if rounds > 30 {
            return Err(PqecError::InvalidArgument(format!(
                "outcome string supports at most 30 rounds, got {rounds}"
            )));
        }
        let expected = (1usize << rounds) - 1;
        if outcomes.len() != expected {
            return Err(PqecError::DimensionMismatch {
                expected,
                found: outcomes.len(),
            });
        }
        if let Some(bad) = outcomes.iter().find(|&&s| s != 1 && s != -1) {
            return Err(PqecError::InvalidArgument(format!("outcome {bad} is not ±1")));
        }
        Ok(Self { outcomes, rounds })
    }

    /// Bit `i` of `bits` set means outcome `i` is `-1`.
    pub fn from_bits(bits: u64, rounds: u32) -> Result<Self> {
        let len = (1usize << rounds) - 1;
        let outcomes = (0..len).map(|i| if bits >> i & 1 == 1 { -1 } else { 1 }).collect();
        Self::new(outcomes, rounds)
    }

    /// Every outcome string of a depth-`ℓ` tree, `2^{2^ℓ - 1}` in total.
    pub fn all(rounds: u32) -> Result<Vec<Self>> {
        check_tree_rounds(rounds)?;
        let len = (1u64 << rounds) - 1;
        (0..1u64 << len).map(|b| Self::from_bits(b, rounds)).collect()
    }

    pub fn outcomes(&self) -> &[i8] {
        &self.outcomes
    }

    pub fn rounds(&self) -> u32 {
        self.rounds
    }

    /// `Ω = Π σ_i`.
    pub fn parity(&self) -> i8 {
        self.outcomes.iter().product()
    }
}

/// The conditional state `ρ_σ` of one outcome string.
#[derive(Debug, Clone)]
pub struct ConditionalOutcome {
    pub state: DensityMatrix,
    /// Product of the per-node outcome probabilities.
    pub probability: f64,
    pub parity: i8,
}

fn check_sign(sign: i8) -> Result<f64> {
    match sign {
        1 => Ok(1.0),
        -1 => Ok(-1.0),
        other => Err(PqecError::InvalidArgument(format!("SWAP outcome {other} is not ±1"))),
    }
}

fn check_tree_rounds(rounds: u32) -> Result<()> {
    if rounds == 0 || rounds > MAX_TREE_ROUNDS {
        return Err(PqecError::ResourceLimit {
            what: "outcome-tree enumeration rounds",
            max: MAX_TREE_ROUNDS as usize,
            requested: rounds as usize,
        });
    }
    Ok(())
}

/// Probability `P± = (1 ± Tr(ρρ'))/2` of a SWAP-test outcome.
pub fn swap_probability(rho_a: &DensityMatrix, rho_b: &DensityMatrix, sign: i8) -> Result<f64> {
    rho_a.check_same_dim(rho_b)?;
    let s = check_sign(sign)?;
    let overlap = linalg::trace_of_product(rho_a.matrix(), rho_b.matrix()).re;
    Ok(0.5 * (1.0 + s * overlap))
}

/// SWAP gadget: `ρ± = (ρ + ρ' ± (ρρ' + ρ'ρ)) / (4 P±)`.
///
/// The output is symmetrized and clamped onto the PSD cone.
pub fn swap_gadget(rho_a: &DensityMatrix, rho_b: &DensityMatrix, sign: i8) -> Result<(DensityMatrix, f64)> {
    let prob = swap_probability(rho_a, rho_b, sign)?;
    if prob < DEGENERATE_PROBABILITY {
        return Err(PqecError::DegenerateOutcome(prob));
    }
    let s = check_sign(sign)?;
    let (a, b) = (rho_a.matrix(), rho_b.matrix());
    let anti = a * b + b * a;
    let raw = (a + b + anti.scale(s)).unscale(4.0 * prob);
    let state = clamp_psd(raw, rho_a.num_qubits())?;
    Ok((state, prob))
}

fn clamp_psd(m: CMatrix, num_qubits: usize) -> Result<DensityMatrix> {
    let rho = DensityMatrix::from_parts(linalg::symmetrize(&m), num_qubits);
    let spec = qstate::spectrum(&rho)?;
    Ok(DensityMatrix::from_parts(
        linalg::from_spectrum(&spec.values, &spec.vectors),
        num_qubits,
    ))
}

/// Evaluates the outcome tree for one string with every leaf equal to `ρ`.
pub fn conditional_state(rho: &DensityMatrix, sigma: &OutcomeString) -> Result<ConditionalOutcome> {
    let mut cursor = 0;
    let (state, probability) = evaluate_subtree(rho, sigma.rounds(), sigma.outcomes(), &mut cursor)?;
    debug_assert_eq!(cursor, sigma.outcomes().len());
    Ok(ConditionalOutcome {
        state,
        probability,
        parity: sigma.parity(),
    })
}

fn evaluate_subtree(
    rho: &DensityMatrix,
    level: u32,
    outcomes: &[i8],
    cursor: &mut usize,
) -> Result<(DensityMatrix, f64)> {
    if level == 0 {
        return Ok((rho.clone(), 1.0));
    }
    let (left, p_left) = evaluate_subtree(rho, level - 1, outcomes, cursor)?;
    let (right, p_right) = evaluate_subtree(rho, level - 1, outcomes, cursor)?;
    let sign = outcomes[*cursor];
    *cursor += 1;
    let (state, p) = swap_gadget(&left, &right, sign)?;
    Ok((state, p_left * p_right * p))
}

/// `ρ^N / Tr(ρ^N)` with `N = 2^ℓ`; `ℓ = 0` returns `ρ` unchanged.
pub fn purified_state(rho: &DensityMatrix, ell: u32) -> Result<DensityMatrix> {
    if ell == 0 {
        return Ok(rho.clone());
    }
    if ell > MAX_SPECTRAL_ROUNDS {
        return Err(PqecError::ResourceLimit {
            what: "purification rounds",
            max: MAX_SPECTRAL_ROUNDS as usize,
            requested: ell as usize,
        });
    }
    let sp = spectral_power_f64(rho, 2f64.powi(ell as i32))?;
    Ok(DensityMatrix::from_parts(sp.normalized(), rho.num_qubits()))
}

/// Runs `f` over every non-degenerate outcome string and sums the results.
fn sum_over_outcomes<F>(rho: &DensityMatrix, ell: u32, f: F) -> Result<CMatrix>
where
    F: Fn(&ConditionalOutcome) -> CMatrix + Sync,
{
    let strings = OutcomeString::all(ell)?;
    let dim = rho.dim();
    let parts: Vec<Option<CMatrix>> = strings
        .par_iter()
        .map(|s| match conditional_state(rho, s) {
            Ok(c) => Ok(Some(f(&c))),
            Err(PqecError::DegenerateOutcome(_)) => Ok(None),
            Err(e) => Err(e),
        })
        .collect::<Result<_>>()?;
    // Sequential, index-ordered accumulation keeps the sum deterministic.
    Ok(parts
        .into_iter()
        .flatten()
        .fold(CMatrix::zeros(dim, dim), |acc, m| acc + m))
}

/// `Σ_σ P_σ Ω_σ ρ_σ` by brute-force enumeration, which equals `ρ^{2^ℓ}`.
///
/// Returns the unnormalized matrix and its trace.
pub fn parity_weighted_sum(rho: &DensityMatrix, ell: u32) -> Result<(CMatrix, f64)> {
    let sum = sum_over_outcomes(rho, ell, |c| {
        c.state.matrix().scale(c.probability * f64::from(c.parity))
    })?;
    let tr = linalg::trace(&sum).re;
    Ok((sum, tr))
}

/// `max |Σ_σ P_σ ρ_σ - ρ|`, which should vanish.
pub fn plain_sum_check(rho: &DensityMatrix, ell: u32) -> Result<f64> {
    let sum = sum_over_outcomes(rho, ell, |c| c.state.matrix().scale(c.probability))?;
    Ok(linalg::max_abs_diff(&sum, rho.matrix()))
}

fn check_observable(observable: &CMatrix, dim: usize) -> Result<()> {
    if observable.nrows() != observable.ncols() {
        return Err(PqecError::InvalidArgument("observable must be square".into()));
    }
    check_dim(dim, observable.nrows())?;
    let dev = linalg::hermiticity_error(observable);
    if dev > qstate::HERMITIAN_TOLERANCE {
        return Err(PqecError::NotHermitian(dev));
    }
    Ok(())
}

/// `Tr(O ρ^N) / Tr(ρ^N)`, `N = 2^ℓ`.
pub fn extract_observable_exact(observable: &CMatrix, rho: &DensityMatrix, ell: u32) -> Result<f64> {
    check_observable(observable, rho.dim())?;
    let purified = purified_state(rho, ell)?;
    purified.expectation(observable)
}

/// The same ratio computed from the outcome tree:
/// `Σ P Ω ⟨O⟩_σ / Σ P Ω`.
pub fn extract_observable_tree(observable: &CMatrix, rho: &DensityMatrix, ell: u32) -> Result<f64> {
    check_observable(observable, rho.dim())?;
    if ell == 0 {
        return rho.expectation(observable);
    }
    let strings = OutcomeString::all(ell)?;
    let (mut num, mut den) = (0.0, 0.0);
    for s in &strings {
        match conditional_state(rho, s) {
            Ok(c) => {
                let w = c.probability * f64::from(c.parity);
                num += w * c.state.expectation(observable)?;
                den += w;
            }
            Err(PqecError::DegenerateOutcome(_)) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(num / den)
}

/// Single-qubit purification as a radial map: `r → 2r / (1 + |r|²)`.
pub fn bloch_purify(r: &BlochVector) -> BlochVector {
    r.scaled(2.0 / (1.0 + r.norm_sqr()))
}

/// Fidelity map of a Werner state under one round,
/// `F → F² / (F² + (1-F)²/(D-1))`.
pub fn werner_fidelity_update(f: f64, dim: usize) -> f64 {
    let f2 = f * f;
    f2 / (f2 + (1.0 - f).powi(2) / (dim as f64 - 1.0))
}

/// Bounds on the fidelity after one round:
/// `F²/Tr ρ² ≤ F' ≤ min(1, F/Tr ρ²)`.
pub fn fidelity_bounds(rho: &DensityMatrix, psi: &PureState) -> Result<(f64, f64)> {
    let f = fidelity(rho, psi)?;
    let pur = purity(rho);
    if pur <= 0.0 {
        return Err(PqecError::InvalidState("zero purity".into()));
    }
    Ok((f * f / pur, (f / pur).min(1.0)))
}

/// Input and output fidelity of a qubit target at polar angle `θ` after
/// `Z`-dephasing with probability `p` and one purification round.
pub fn anisotropic_qubit_purify_fidelity(theta: f64, p: f64) -> (f64, f64) {
    let beta = 1.0 - 2.0 * p;
    let (s2, c2) = (theta.sin().powi(2), theta.cos().powi(2));
    let overlap = beta * s2 + c2;
    let radius_sqr = beta * beta * s2 + c2;
    let f_in = 0.5 * (1.0 + 1.0 - (1.0 - beta) * s2);
    let f_out = 0.5 * (1.0 + 2.0 * overlap / (1.0 + radius_sqr));
    (f_in, f_out)
}

/// Effective purified state of the ratio `Σ P Ω ρ_σ / Σ P Ω`, useful for
/// checking tree results against the spectral map.
pub fn tree_purified_state(rho: &DensityMatrix, ell: u32) -> Result<DensityMatrix> {
    let (sum, tr) = parity_weighted_sum(rho, ell)?;
    Ok(DensityMatrix::from_parts(sum.unscale(tr), rho.num_qubits()))
}
