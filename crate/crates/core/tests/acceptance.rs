//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line to
//! stderr (bypassing the test harness capture) and the test fails if any
//! criterion fails.

use std::f64::consts::PI;
use std::io::Write;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use pqec::channels::{
    apply_local_dephasing, apply_local_depolarizing, channel_deviation, generate_twirl_set, NoiseModel, TwirlGate,
};
use pqec::linalg::{self, max_abs_diff, CMatrix};
use pqec::montecarlo::{required_samples, simulate_accumulate, EstimatorStatus, Observable};
use pqec::purifier::{
    anisotropic_qubit_purify_fidelity, conditional_state, parity_weighted_sum, plain_sum_check, purified_state,
    werner_fidelity_update, OutcomeString,
};
use pqec::qstate::random::{random_density_matrix, random_pure_state};
use pqec::qstate::{
    density_from_pure, fidelity, pauli_weight_distribution, spectral_power, DensityMatrix, PureState, WernerState,
};
use pqec::threshold::{
    find_threshold, run_cycles, steady_state_fidelity_analytic, sweep, SweepConfig, ThresholdOutcome,
};

type Check = std::result::Result<String, String>;
type Criterion = (u32, &'static str, fn() -> Check);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn criterion_1() -> Check {
    let mut r = rng(1);
    let mut worst_parity: f64 = 0.0;
    let mut worst_plain: f64 = 0.0;
    for m in [1, 2] {
        for ell in [1u32, 2, 3] {
            for _ in 0..50 {
                let rho = random_density_matrix(m, &mut r);
                let (sum, _) = parity_weighted_sum(&rho, ell).map_err(err)?;
                let exact = spectral_power(&rho, 1 << ell).map_err(err)?.matrix();
                worst_parity = worst_parity.max(max_abs_diff(&sum, &exact));
                worst_plain = worst_plain.max(plain_sum_check(&rho, ell).map_err(err)?);
            }
        }
    }
    ensure(worst_parity <= 1e-9 && worst_plain <= 1e-9, || {
        format!("parity dev {worst_parity:.3e}, plain dev {worst_plain:.3e}")
    })?;
    Ok(format!(
        "parity dev {worst_parity:.2e}, plain dev {worst_plain:.2e} (300 states)"
    ))
}

/// Two-round conditional state written out as a polynomial in `ρ`.
fn two_round_closed_form(rho: &CMatrix, s1: f64, s2: f64, s3: f64) -> CMatrix {
    let rho2 = rho * rho;
    let tr2 = linalg::trace(&rho2).re;
    let p1 = 0.5 * (1.0 + s1 * tr2);
    let p2 = 0.5 * (1.0 + s2 * tr2);
    let a = (rho + rho2.scale(s1)).unscale(2.0 * p1);
    let b = (rho + rho2.scale(s2)).unscale(2.0 * p2);
    let p3 = 0.5 * (1.0 + s3 * linalg::trace_of_product(&a, &b).re);
    let rho3 = &rho2 * rho;
    let rho4 = &rho2 * &rho2;
    let c1 = 1.0 / (p1 * p3) + 1.0 / (p2 * p3);
    let c2 = s1 / (p1 * p3) + s2 / (p2 * p3) + s3 / (p1 * p2 * p3);
    let c3 = (s2 * s3 + s1 * s3) / (p1 * p2 * p3);
    let c4 = s1 * s2 * s3 / (p1 * p2 * p3);
    (rho.scale(c1) + rho2.scale(c2) + rho3.scale(c3) + rho4.scale(c4)).unscale(8.0)
}

fn criterion_2() -> Check {
    let mut r = rng(2);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let rho = random_density_matrix(1, &mut r);
        for s in OutcomeString::all(2).map_err(err)? {
            let o: Vec<f64> = s.outcomes().iter().map(|&x| f64::from(x)).collect();
            let closed = two_round_closed_form(rho.matrix(), o[0], o[1], o[2]);
            let tree = conditional_state(&rho, &s).map_err(err)?;
            worst = worst.max(max_abs_diff(&closed, tree.state.matrix()));
        }
    }
    ensure(worst <= 1e-10, || format!("max deviation {worst:.3e}"))?;
    Ok(format!("max deviation {worst:.2e} over 160 strings"))
}

fn criterion_3() -> Check {
    let mut worst_map: f64 = 0.0;
    let mut worst_cross: f64 = 0.0;
    let mut worst_quad: f64 = 0.0;
    for m in [1usize, 2, 4, 8] {
        let dim = 1usize << m;
        let d = dim as f64;
        let target = PureState::zero(m).map_err(err)?;
        let formula = |f: f64| f * f / (f * f + (1.0 - f).powi(2) / (d - 1.0));
        for i in 0..=10 {
            let f = 1.0 / d + (1.0 - 1.0 / d) * i as f64 / 10.0;
            let lambda = (1.0 - f) / (1.0 - 1.0 / d);
            let rho = WernerState::new(lambda, target.clone())
                .map_err(err)?
                .to_density()
                .map_err(err)?;
            let via_matrix = fidelity(&purified_state(&rho, 1).map_err(err)?, &target).map_err(err)?;
            worst_map = worst_map
                .max((via_matrix - formula(f)).abs())
                .max((werner_fidelity_update(f, dim) - formula(f)).abs());
        }
        worst_cross = worst_cross.max((werner_fidelity_update(1.0 / d, dim) - 1.0 / d).abs());
        let eps = 1e-3;
        let drop = 1.0 - werner_fidelity_update(1.0 - eps, dim);
        let expected = eps * eps / (d - 1.0);
        worst_quad = worst_quad.max((drop - expected).abs() / expected);
    }
    ensure(worst_map <= 1e-12 && worst_cross <= 1e-12 && worst_quad <= 0.01, || {
        format!("map {worst_map:.3e}, crossing {worst_cross:.3e}, quadratic rel {worst_quad:.3e}")
    })?;
    Ok(format!(
        "map dev {worst_map:.2e}, F=1/D fixed point dev {worst_cross:.2e}, quadratic coeff rel err {worst_quad:.2e}"
    ))
}

fn criterion_4() -> Check {
    let mut worst: f64 = 0.0;
    let mut example = 0.0;
    for m in [1usize, 2] {
        for p in [0.05, 0.1, 0.2] {
            let psi = PureState::plus(m).map_err(err)?;
            let trace = run_cycles(&psi, &NoiseModel::GlobalDepolarizing { p }, 1, 200).map_err(err)?;
            let analytic = steady_state_fidelity_analytic(1 << m, p).map_err(err)?;
            worst = worst.max((trace.final_fidelity() - analytic).abs());
            if m == 1 && p == 0.1 {
                example = trace.final_fidelity();
            }
        }
    }
    ensure(worst <= 1e-8 && (example - 0.996904).abs() < 5e-7, || {
        format!("max dev {worst:.3e}, D=2 p=0.1 gives {example:.6}")
    })?;
    Ok(format!("max dev {worst:.2e}; D=2, p=0.1 -> {example:.6}"))
}

fn threshold_for(model: NoiseModel, psi: PureState) -> std::result::Result<f64, String> {
    let result = sweep(&SweepConfig::with_defaults(model, psi)).map_err(err)?;
    match find_threshold(&result).map_err(err)? {
        ThresholdOutcome::Crossing(est) => Ok(est.p_th),
        ThresholdOutcome::NoCrossing { direction } => Err(format!("no crossing ({direction:?})")),
    }
}

fn criterion_5() -> Check {
    let cases = [
        ("global-depol M=1", NoiseModel::GlobalDepolarizing { p: 0.0 }, 1, 1.0),
        ("local-depol M=1", NoiseModel::LocalDepolarizing { p: 0.0 }, 1, 0.75),
        ("local-depol M=5", NoiseModel::LocalDepolarizing { p: 0.0 }, 5, 0.75),
        ("dephasing M=1", NoiseModel::LocalDephasing { p: 0.0 }, 1, 0.5),
        ("dephasing M=5", NoiseModel::LocalDephasing { p: 0.0 }, 5, 0.5),
    ];
    let mut parts = Vec::new();
    let mut failed = false;
    for (label, model, m, expected) in cases {
        let p_th = threshold_for(model, PureState::plus(m).map_err(err)?)?;
        failed |= (p_th - expected).abs() > 0.02;
        parts.push(format!("{label} {p_th:.4}"));
    }
    let summary = parts.join(", ");
    if failed {
        Err(summary)
    } else {
        Ok(summary)
    }
}

fn criterion_6() -> Check {
    let mut worst_channel: f64 = 0.0;
    let mut worst_sweep: f64 = 0.0;
    for m in 1..=3usize {
        for p in [0.1, 0.3, 0.6] {
            let full = NoiseModel::TwirledDephasing {
                p,
                twirl_fraction: 1.0,
                twirl_seed: 0,
            }
            .build(m)
            .map_err(err)?;
            let depol = NoiseModel::LocalDepolarizing { p }.build(m).map_err(err)?;
            worst_channel = worst_channel.max(channel_deviation(&full, &depol).map_err(err)?);
        }
        let psi = PureState::plus(m).map_err(err)?;
        let twirled = sweep(&SweepConfig::with_defaults(
            NoiseModel::TwirledDephasing {
                p: 0.0,
                twirl_fraction: 1.0,
                twirl_seed: 0,
            },
            psi.clone(),
        ))
        .map_err(err)?;
        let depol = sweep(&SweepConfig::with_defaults(
            NoiseModel::LocalDepolarizing { p: 0.0 },
            psi,
        ))
        .map_err(err)?;
        for (a, b) in twirled.cells.iter().zip(&depol.cells) {
            worst_sweep = worst_sweep.max((a.gamma_l - b.gamma_l).abs());
            for (fa, fb) in a.trace.fidelities.iter().zip(&b.trace.fidelities) {
                worst_sweep = worst_sweep.max((fa - fb).abs());
            }
        }
    }
    ensure(worst_channel < 1e-10 && worst_sweep <= 1e-9, || {
        format!("channel dev {worst_channel:.3e}, sweep dev {worst_sweep:.3e}")
    })?;
    Ok(format!(
        "channel dev {worst_channel:.2e}, sweep cell dev {worst_sweep:.2e}"
    ))
}

/// Seed for the fixed 20% twirl subsets. For M=1 the subset is a single
/// gate; an H gate would leave the |+> target untouched, so the check below
/// also confirms the seed did not draw it.
const TWIRL_SEED_M5: u64 = 0;
const TWIRL_SEED_M1: u64 = 7;

fn criterion_7() -> Check {
    let twirl = |seed| NoiseModel::TwirledDephasing {
        p: 0.0,
        twirl_fraction: 0.2,
        twirl_seed: seed,
    };
    let p5 = threshold_for(twirl(TWIRL_SEED_M5), PureState::plus(5).map_err(err)?)?;
    let gate = generate_twirl_set(1, 0.2, TWIRL_SEED_M1).map_err(err)?.sequences()[0][0];
    ensure(gate != TwirlGate::H, || format!("M=1 seed {TWIRL_SEED_M1} drew H"))?;
    let p1 = threshold_for(twirl(TWIRL_SEED_M1), PureState::plus(1).map_err(err)?)?;
    let summary = format!("M=5 seed {TWIRL_SEED_M5}: {p5:.4}; M=1 seed {TWIRL_SEED_M1} (gate {gate}): {p1:.4}");
    ensure(p5 > 0.5 && p5 < 0.8 && (p1 - 0.5).abs() <= 0.02, || summary.clone())?;
    Ok(summary)
}

fn criterion_8() -> Check {
    let mut r = rng(8);
    let mut worst_slope: f64 = 0.0;
    let mut worst_loglog: f64 = 0.0;
    for _ in 0..10 {
        let psi = random_pure_state(2, &mut r);
        let rho0 = density_from_pure(&psi).map_err(err)?;
        let kbar = pauli_weight_distribution(&psi).map_err(err)?.mean_weight;
        let p = 1e-3;
        let infid = 1.0 - fidelity(&apply_local_depolarizing(&rho0, p).map_err(err)?, &psi).map_err(err)?;
        let slope = infid / p;
        let expected = 4.0 / 3.0 * kbar;
        worst_slope = worst_slope.max((slope - expected).abs() / expected);

        let ps: Vec<f64> = (0..=10).map(|i| 1e-3 * 10f64.powf(i as f64 / 10.0)).collect();
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for &p in &ps {
            let noisy = apply_local_depolarizing(&rho0, p).map_err(err)?;
            let purified = purified_state(&noisy, 1).map_err(err)?;
            let infid = 1.0 - fidelity(&purified, &psi).map_err(err)?;
            xs.push(p.ln());
            ys.push(infid.ln());
        }
        let n = xs.len() as f64;
        let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        worst_loglog = worst_loglog.max((sxy / sxx - 2.0).abs());
    }
    ensure(worst_slope <= 0.005 && worst_loglog <= 0.05, || {
        format!("slope rel err {worst_slope:.3e}, log-log slope dev {worst_loglog:.3e}")
    })?;
    Ok(format!(
        "linear slope rel err {worst_slope:.2e}, log-log slope dev {worst_loglog:.2e}"
    ))
}

fn z() -> CMatrix {
    linalg::mat2_to_matrix(&linalg::PAULI_Z)
}

fn criterion_9() -> Check {
    let obs = Observable::new(z()).map_err(err)?;
    let mut r = rng(9);
    let mut worst_z: f64 = 0.0;
    for i in 0..10u64 {
        let rho = random_density_matrix(1, &mut r);
        for ell in [1u32, 2] {
            let exact = purified_state(&rho, ell).map_err(err)?.expectation(&z()).map_err(err)?;
            let est = simulate_accumulate(&rho, &obs, ell, 1000 + 10 * i + u64::from(ell), 0..100_000)
                .map_err(err)?
                .finish()
                .map_err(err)?;
            ensure(est.status == EstimatorStatus::Ok, || {
                format!("unstable denominator: {est:?}")
            })?;
            worst_z = worst_z.max((est.estimate - exact).abs() / est.standard_error);
        }
    }
    ensure(worst_z <= 4.0, || format!("worst |est - exact| / SE = {worst_z:.2}"))?;

    // Batch spread of the estimate against the delta-method prediction.
    let rho = DensityMatrix::diagonal(&[0.8, 0.2]).map_err(err)?;
    let batch = 2_000u64;
    let mut estimates = Vec::new();
    let mut predicted = Vec::new();
    for b in 0..200u64 {
        let est = simulate_accumulate(&rho, &obs, 1, 77, b * batch..(b + 1) * batch)
            .map_err(err)?
            .finish()
            .map_err(err)?;
        estimates.push(est.estimate);
        predicted.push(est.standard_error);
    }
    let mean = estimates.iter().sum::<f64>() / 200.0;
    let empirical = (estimates.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / 199.0).sqrt();
    let predicted = predicted.iter().sum::<f64>() / 200.0;
    let ratio = empirical / predicted;
    ensure((1.0 / 1.25..=1.25).contains(&ratio), || {
        format!("batch SE ratio {ratio:.3}")
    })?;

    // Overhead bound at the required sample count.
    let mut worst_overhead: f64 = 0.0;
    for (i, (state, ell, eps)) in [
        (DensityMatrix::diagonal(&[0.8, 0.2]).map_err(err)?, 1u32, 0.02),
        (DensityMatrix::diagonal(&[0.7, 0.3]).map_err(err)?, 2, 0.02),
        (random_density_matrix(1, &mut r), 1, 0.01),
    ]
    .into_iter()
    .enumerate()
    {
        let tr = spectral_power(&state, 1 << ell).map_err(err)?.trace();
        let n = required_samples(eps, tr).map_err(err)?;
        let est = simulate_accumulate(&state, &obs, ell, 500 + i as u64, 0..n)
            .map_err(err)?
            .finish()
            .map_err(err)?;
        worst_overhead = worst_overhead.max(est.standard_error / eps);
    }
    ensure(worst_overhead <= 1.5, || format!("SE / eps = {worst_overhead:.3}"))?;
    Ok(format!(
        "worst |z| {worst_z:.2}, batch SE ratio {ratio:.3}, worst SE/eps {worst_overhead:.3}"
    ))
}

fn criterion_10() -> Check {
    let mut worst: f64 = 0.0;
    for &theta in &[0.0, PI / 6.0, PI / 3.0, PI / 2.0, 2.0 * PI / 3.0, PI] {
        for &phi in &[0.0, PI / 4.0, 1.3] {
            for &p in &[0.0, 0.1, 0.3, 0.5, 0.7, 1.0] {
                let psi = PureState::bloch_product(theta, phi, 1).map_err(err)?;
                let noisy = apply_local_dephasing(&density_from_pure(&psi).map_err(err)?, p).map_err(err)?;
                let f_in = fidelity(&noisy, &psi).map_err(err)?;
                let f_out = fidelity(&purified_state(&noisy, 1).map_err(err)?, &psi).map_err(err)?;
                let (a, b) = anisotropic_qubit_purify_fidelity(theta, p);
                worst = worst.max((f_in - a).abs()).max((f_out - b).abs());
            }
        }
    }
    let (_, example) = anisotropic_qubit_purify_fidelity(PI / 2.0, 0.3);
    ensure(worst <= 1e-12 && (example - 0.844828).abs() < 5e-7, || {
        format!("closed form dev {worst:.3e}, example {example:.6}")
    })?;

    // F against ℓ saturates at the fidelity of the dominant eigenvector.
    let (theta, phi) = (PI / 3.0, PI / 4.0);
    let mut saturations = Vec::new();
    for m in [1usize, 3] {
        let psi = PureState::bloch_product(theta, phi, m).map_err(err)?;
        let rho0 = density_from_pure(&psi).map_err(err)?;
        for p in [0.1, 0.3, 0.5, 0.7] {
            let noisy = apply_local_dephasing(&rho0, p).map_err(err)?;
            let fs: Vec<f64> = (0..=20)
                .map(|ell| fidelity(&purified_state(&noisy, ell).map_err(err)?, &psi).map_err(err))
                .collect::<std::result::Result<_, _>>()?;
            let beta = 1.0 - 2.0 * p;
            let r = [
                beta * theta.sin() * phi.cos(),
                beta * theta.sin() * phi.sin(),
                theta.cos(),
            ];
            let n = [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()];
            let norm = r.iter().map(|x| x * x).sum::<f64>().sqrt();
            let limit = (0.5 * (1.0 + (0..3).map(|k| n[k] * r[k]).sum::<f64>() / norm)).powi(m as i32);
            let last = fs[20];
            ensure((fs[20] - fs[19]).abs() < 1e-12, || {
                format!("M={m} p={p}: not converged")
            })?;
            ensure((last - limit).abs() < 1e-9 && last < 1.0 - 1e-3, || {
                format!("M={m} p={p}: F(20) = {last:.9}, dominant-eigenvector limit {limit:.9}")
            })?;
            saturations.push(last);
        }
    }
    let lo = saturations.iter().cloned().fold(1.0, f64::min);
    let hi = saturations.iter().cloned().fold(0.0, f64::max);
    Ok(format!(
        "closed form dev {worst:.2e}; theta=pi/2 p=0.3 -> {example:.6}; saturated F in [{lo:.4}, {hi:.4}]"
    ))
}

#[test]
fn acceptance_criteria() {
    let criteria: [Criterion; 10] = [
        (1, "parity-extraction oracle", criterion_1),
        (2, "two-round closed form", criterion_2),
        (3, "Werner fidelity map", criterion_3),
        (4, "global depolarizing steady state", criterion_4),
        (5, "threshold crossings", criterion_5),
        (6, "full twirl equals local depolarizing", criterion_6),
        (7, "approximate twirl thresholds", criterion_7),
        (8, "small-p expansion", criterion_8),
        (9, "Monte Carlo ratio estimator", criterion_9),
        (10, "anisotropic saturation", criterion_10),
    ];
    let mut failures = Vec::new();
    let mut stderr = std::io::stderr();
    for (id, name, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        let line = match &outcome {
            Ok(detail) => format!("criterion {id:>2} PASS [{name}] {detail} ({secs:.1}s)"),
            Err(detail) => format!("criterion {id:>2} FAIL [{name}] {detail} ({secs:.1}s)"),
        };
        let _ = writeln!(stderr, "{line}");
        if outcome.is_err() {
            failures.push(line);
        }
    }
    assert!(failures.is_empty(), "failed criteria:\n{}", failures.join("\n"));
}
