//! Noise/purify cycles, logical error rates, parameter sweeps and threshold
//! crossings.
//!
//! A cycle applies the noise channel and then `ℓ` exact purification rounds.
//! The logical error rate is the first-cycle fidelity drop
//! `γ_L = F(0) - F(1)`. The threshold is where the `γ_L(p)` curves for
//! consecutive `ℓ` cross.

use rayon::prelude::*;

use crate::channels::NoiseModel;
use crate::error::{check_probability, PqecError, Result};
use crate::purifier::purified_state;
use crate::qstate::{density_from_pure, fidelity, werner_fidelity, werner_purify_lambda, PureState};

pub const DEFAULT_P_POINTS: usize = 41;
pub const DEFAULT_ELLS: [u32; 5] = [0, 1, 2, 3, 5];
pub const DEFAULT_CYCLES: usize = 30;

/// `count` evenly spaced points from `min` to `max` inclusive.
pub fn linspace(min: f64, max: f64, count: usize) -> Vec<f64> {
    match count {
        0 => vec![],
        1 => vec![min],
        _ => {
            let step = (max - min) / (count - 1) as f64;
            (0..count)
                .map(|i| if i == count - 1 { max } else { min + step * i as f64 })
                .collect()
        }
    }
}

/// 41 points on `[0, 1]`.
pub fn default_p_grid() -> Vec<f64> {
    linspace(0.0, 1.0, DEFAULT_P_POINTS)
}

/// Fidelity history of one noise/purify experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleTrace {
    /// `F(0..=T)`, with `F(0)` the fidelity of the initial pure state.
    pub fidelities: Vec<f64>,
    pub channel: NoiseModel,
    pub ell: u32,
    pub num_qubits: usize,
    pub cycles: usize,
}

impl CycleTrace {
    /// `F(T)`.
    pub fn final_fidelity(&self) -> f64 {
        *self.fidelities.last().expect("trace has F(0)")
    }
}

fn clamp_unit(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

/// Iterates `ρ ← P_ℓ(E(ρ))` from `|ψ₀⟩⟨ψ₀|` for `cycles` steps.
pub fn run_cycles(psi0: &PureState, channel: &NoiseModel, ell: u32, cycles: usize) -> Result<CycleTrace> {
    if cycles == 0 {
        return Err(PqecError::InvalidArgument("at least one cycle is required".into()));
    }
    let built = channel.build(psi0.num_qubits())?;
    let mut rho = density_from_pure(psi0)?;
    let mut fidelities = Vec::with_capacity(cycles + 1);
    fidelities.push(clamp_unit(fidelity(&rho, psi0)?));
    for _ in 0..cycles {
        rho = purified_state(&built.apply(&rho)?, ell)?;
        fidelities.push(clamp_unit(fidelity(&rho, psi0)?));
    }
    Ok(CycleTrace {
        fidelities,
        channel: *channel,
        ell,
        num_qubits: psi0.num_qubits(),
        cycles,
    })
}

/// `γ_L = F(0) - F(1)`.
pub fn logical_error_rate(trace: &CycleTrace) -> f64 {
    trace.fidelities[0] - trace.fidelities[1]
}

/// Fixed point of global depolarizing noise followed by one round,
/// `F₀ = ½(1 + √(1 - 4(D-1)p² / (D²(1-p)²)))`.
///
/// Where the square root's argument is negative the closed form has no real
/// solution and [`PqecError::UndefinedSteadyState`] carries the discriminant.
pub fn steady_state_fidelity_analytic(dim: usize, p: f64) -> Result<f64> {
    check_probability(p)?;
    if dim < 2 {
        return Err(PqecError::InvalidArgument(format!("dimension {dim} < 2")));
    }
    let d = dim as f64;
    let disc = 1.0 - 4.0 * (d - 1.0) * p * p / (d * d * (1.0 - p).powi(2));
    if disc.is_nan() || disc < 0.0 {
        return Err(PqecError::UndefinedSteadyState(disc));
    }
    Ok(0.5 * (1.0 + disc.sqrt()))
}

/// Werner-family cycle: depolarize the mixing parameter, then purify it `ℓ`
/// times. Returns `F(0..=T)`.
pub fn werner_cycles(dim: usize, p: f64, ell: u32, cycles: usize) -> Result<Vec<f64>> {
    check_probability(p)?;
    let mut lambda = 0.0;
    let mut out = Vec::with_capacity(cycles + 1);
    out.push(werner_fidelity(lambda, dim));
    for _ in 0..cycles {
        lambda = (1.0 - p) * lambda + p;
        for _ in 0..ell {
            lambda = werner_purify_lambda(lambda, dim);
        }
        out.push(werner_fidelity(lambda, dim));
    }
    Ok(out)
}

/// Numerical steady state of the Werner recursion, iterated until successive
/// fidelities differ by less than `tol` or `max_cycles` is reached.
pub fn steady_state_fidelity_iterated(dim: usize, p: f64, ell: u32, tol: f64, max_cycles: usize) -> Result<f64> {
    check_probability(p)?;
    let mut lambda: f64 = 0.0;
    let mut f = werner_fidelity(lambda, dim);
    for _ in 0..max_cycles {
        lambda = (1.0 - p) * lambda + p;
        for _ in 0..ell {
            lambda = werner_purify_lambda(lambda, dim);
        }
        let next = werner_fidelity(lambda, dim);
        if (next - f).abs() < tol {
            return Ok(next);
        }
        f = next;
    }
    Ok(f)
}

/// Grid of error probabilities and round counts for one channel family.
#[derive(Debug, Clone)]
pub struct SweepConfig {
    /// Channel family; its own `p` is replaced by each grid value.
    pub model: NoiseModel,
    pub psi0: PureState,
    pub p_values: Vec<f64>,
    pub ell_values: Vec<u32>,
    pub cycles: usize,
}

impl SweepConfig {
    /// Default grids for the given family and target.
    pub fn with_defaults(model: NoiseModel, psi0: PureState) -> Self {
        Self {
            model,
            psi0,
            p_values: default_p_grid(),
            ell_values: DEFAULT_ELLS.to_vec(),
            cycles: DEFAULT_CYCLES,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.p_values.is_empty() || self.ell_values.is_empty() {
            return Err(PqecError::InvalidArgument("sweep grid is empty".into()));
        }
        for &p in &self.p_values {
            check_probability(p)?;
        }
        self.model.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub p: f64,
    pub ell: u32,
    pub gamma_l: f64,
    /// `F(T)`.
    pub steady_state_fidelity: f64,
    pub trace: CycleTrace,
}

/// Cells stored row-major: all `ℓ` for the first `p`, then the next `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub model: NoiseModel,
    pub num_qubits: usize,
    pub cycles: usize,
    pub p_values: Vec<f64>,
    pub ell_values: Vec<u32>,
    pub cells: Vec<SweepCell>,
}

impl SweepResult {
    pub fn cell(&self, p_index: usize, ell_index: usize) -> &SweepCell {
        &self.cells[p_index * self.ell_values.len() + ell_index]
    }

    /// `γ_L(p)` for one `ℓ`, in grid order.
    pub fn gamma_series(&self, ell: u32) -> Option<Vec<f64>> {
        let li = self.ell_values.iter().position(|&e| e == ell)?;
        Some((0..self.p_values.len()).map(|pi| self.cell(pi, li).gamma_l).collect())
    }
}

/// Runs every `(p, ℓ)` cell independently.
pub fn sweep(config: &SweepConfig) -> Result<SweepResult> {
    config.validate()?;
    let n_ell = config.ell_values.len();
    let cells = (0..config.p_values.len() * n_ell)
        .into_par_iter()
        .map(|idx| {
            let p = config.p_values[idx / n_ell];
            let ell = config.ell_values[idx % n_ell];
            run_cycles(&config.psi0, &config.model.with_p(p), ell, config.cycles)
                .map(|trace| SweepCell {
                    p,
                    ell,
                    gamma_l: logical_error_rate(&trace),
                    steady_state_fidelity: trace.final_fidelity(),
                    trace,
                })
                .map_err(|e| PqecError::Cell {
                    p,
                    ell,
                    source: Box::new(e),
                })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        model: config.model,
        num_qubits: config.psi0.num_qubits(),
        cycles: config.cycles,
        p_values: config.p_values.clone(),
        ell_values: config.ell_values.clone(),
        cells,
    })
}

/// Crossing of `γ_L(ℓ_b, p)` above `γ_L(ℓ_a, p)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossingPair {
    pub ell_a: u32,
    pub ell_b: u32,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdEstimate {
    /// Median of the pairwise crossings.
    pub p_th: f64,
    pub crossing_pairs: Vec<CrossingPair>,
    /// Largest spacing of the p grid; the estimate's uncertainty.
    pub grid_resolution: f64,
}

/// Which way the curves stay ordered when they never cross.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MonotoneDirection {
    /// More rounds lower `γ_L` over the whole range.
    PurificationHelps,
    /// More rounds never lower `γ_L` anywhere it is resolved.
    PurificationNeverHelps,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ThresholdOutcome {
    Crossing(ThresholdEstimate),
    NoCrossing { direction: MonotoneDirection },
}

impl ThresholdOutcome {
    pub fn p_th(&self) -> Option<f64> {
        match self {
            ThresholdOutcome::Crossing(e) => Some(e.p_th),
            ThresholdOutcome::NoCrossing { .. } => None,
        }
    }
}

/// `γ_L` values below this are indistinguishable from rounding in `1 - F`.
const GAMMA_FLOOR: f64 = 1e-12;
/// Relative tolerance for calling two `γ_L` values equal.
const GAMMA_REL_TOL: f64 = 1e-9;

enum PairResult {
    Crossing(f64),
    Helps,
    NeverHelps,
}

/// Scans one pair of curves. Points where both rates sit at the rounding
/// floor are skipped; the crossing is the first resolved point with
/// `γ_b ≥ γ_a` after the curves have been seen ordered with `γ_b < γ_a`.
fn pair_crossing(p: &[f64], gamma_a: &[f64], gamma_b: &[f64]) -> PairResult {
    let mut previous: Option<(f64, f64)> = None;
    for i in 0..p.len() {
        let scale = gamma_a[i].abs().max(gamma_b[i].abs());
        if scale < GAMMA_FLOOR {
            continue;
        }
        let diff = gamma_b[i] - gamma_a[i];
        let tol = GAMMA_REL_TOL * scale;
        match previous {
            None if diff < -tol => previous = Some((p[i], diff)),
            None => {}
            Some(_) if diff < -tol => previous = Some((p[i], diff)),
            Some((p0, d0)) => {
                let span = diff - d0;
                let t = if span > 0.0 { (-d0 / span).clamp(0.0, 1.0) } else { 1.0 };
                return PairResult::Crossing(p0 + t * (p[i] - p0));
            }
        }
    }
    if previous.is_some() {
        PairResult::Helps
    } else {
        PairResult::NeverHelps
    }
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Threshold from the crossings of consecutive-`ℓ` curves.
pub fn find_threshold(result: &SweepResult) -> Result<ThresholdOutcome> {
    let mut ells = result.ell_values.clone();
    ells.sort_unstable();
    ells.dedup();
    if ells.len() < 2 || ells[0] != 0 {
        return Err(PqecError::InvalidArgument(
            "threshold needs at least two ℓ values including 0".into(),
        ));
    }
    if result.p_values.len() < 2 {
        return Err(PqecError::InvalidArgument(
            "threshold needs at least two p values".into(),
        ));
    }
    let grid_resolution = result
        .p_values
        .windows(2)
        .map(|w| (w[1] - w[0]).abs())
        .fold(0.0, f64::max);

    let mut pairs = Vec::new();
    let mut helps = 0usize;
    let mut never = 0usize;
    for w in ells.windows(2) {
        let ga = result.gamma_series(w[0]).expect("ℓ in grid");
        let gb = result.gamma_series(w[1]).expect("ℓ in grid");
        match pair_crossing(&result.p_values, &ga, &gb) {
            PairResult::Crossing(p) => pairs.push(CrossingPair {
                ell_a: w[0],
                ell_b: w[1],
                p,
            }),
            PairResult::Helps => helps += 1,
            PairResult::NeverHelps => never += 1,
        }
    }
    if pairs.is_empty() {
        let direction = if helps >= never {
            MonotoneDirection::PurificationHelps
        } else {
            MonotoneDirection::PurificationNeverHelps
        };
        return Ok(ThresholdOutcome::NoCrossing { direction });
    }
    let mut ps: Vec<f64> = pairs.iter().map(|c| c.p).collect();
    Ok(ThresholdOutcome::Crossing(ThresholdEstimate {
        p_th: median(&mut ps),
        crossing_pairs: pairs,
        grid_resolution,
    }))
}
