//! The subcommands.

use pqec::channels::{channel_deviation, NoiseModel};
use pqec::montecarlo::{
    ratio_estimate, required_samples, simulate_shots, EstimatorStatus, Observable, ShotAccumulator,
};
use pqec::purifier::{extract_observable_exact, purified_state};
use pqec::qstate::{density_from_pure, fidelity, purity, spectral_power};
use pqec::threshold::{
    find_threshold, run_cycles, sweep, MonotoneDirection, SweepConfig, SweepResult, ThresholdOutcome,
};
use pqec::{DensityMatrix, PureState};

use crate::config::{Command, ExperimentConfig};
use crate::svg::{Plot, Series};
use crate::table::{format_real, ResultTable};
use crate::CliError;

/// Whether the run produced its main result.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Complete,
    /// `threshold` found no crossing.
    NoCrossing,
}

#[derive(Debug)]
pub struct RunOutput {
    pub table: ResultTable,
    /// Secondary tables, keyed by a file-name suffix.
    pub extra: Vec<(&'static str, ResultTable)>,
    pub plot: Option<Plot>,
    /// Human-readable lines for stderr.
    pub summary: Vec<String>,
    pub status: Status,
}

impl RunOutput {
    fn new(table: ResultTable) -> Self {
        Self {
            table,
            extra: Vec::new(),
            plot: None,
            summary: Vec::new(),
            status: Status::Complete,
        }
    }
}

pub fn run(config: &ExperimentConfig) -> Result<RunOutput, CliError> {
    match config.command {
        Command::Purify => purify(config),
        Command::Cycle => cycle(config),
        Command::Sweep => run_sweep(config),
        Command::Threshold => threshold(config),
        Command::Sample => sample(config),
        Command::TwirlCheck => twirl_check(config),
    }
}

fn target(config: &ExperimentConfig) -> Result<PureState, CliError> {
    Ok(config.state.build(config.num_qubits)?)
}

fn model(config: &ExperimentConfig) -> NoiseModel {
    config.channel.expect("channel resolved for this command")
}

fn noisy_state(config: &ExperimentConfig, psi: &PureState) -> Result<DensityMatrix, CliError> {
    let channel = model(config).build(config.num_qubits)?;
    Ok(channel.apply(&density_from_pure(psi)?)?)
}

fn purify(config: &ExperimentConfig) -> Result<RunOutput, CliError> {
    let psi = target(config)?;
    let rho = noisy_state(config, &psi)?;
    let mut table = ResultTable::new(&["ell", "F", "purity"]);
    let mut points = Vec::new();
    for &ell in &config.ell_values {
        let out = purified_state(&rho, ell)?;
        let f = fidelity(&out, &psi)?;
        table.push(vec![ell.into(), f.into(), purity(&out).into()]);
        points.push((ell as f64, f));
    }
    let mut output = RunOutput::new(table);
    output.plot = Some(Plot {
        title: format!("{} p = {}", model(config).name(), config.p_values[0]),
        x_label: "ℓ".into(),
        y_label: "F".into(),
        series: vec![Series {
            label: "F".into(),
            points,
        }],
    });
    Ok(output)
}

fn cycle(config: &ExperimentConfig) -> Result<RunOutput, CliError> {
    let psi = target(config)?;
    let mut table = ResultTable::new(&["ell", "t", "F"]);
    let mut series = Vec::new();
    for &ell in &config.ell_values {
        let trace = run_cycles(&psi, &model(config), ell, config.cycles)?;
        for (t, &f) in trace.fidelities.iter().enumerate() {
            table.push(vec![ell.into(), t.into(), f.into()]);
        }
        series.push(Series {
            label: format!("ℓ={ell}"),
            points: trace
                .fidelities
                .iter()
                .enumerate()
                .map(|(t, &f)| (t as f64, f))
                .collect(),
        });
    }
    let mut output = RunOutput::new(table);
    output.plot = Some(Plot {
        title: format!("{} p = {}", model(config).name(), config.p_values[0]),
        x_label: "cycle".into(),
        y_label: "F".into(),
        series,
    });
    Ok(output)
}

fn sweep_result(config: &ExperimentConfig) -> Result<SweepResult, CliError> {
    Ok(sweep(&SweepConfig {
        model: model(config),
        psi0: target(config)?,
        p_values: config.p_values.clone(),
        ell_values: config.ell_values.clone(),
        cycles: config.cycles,
    })?)
}

fn sweep_table(result: &SweepResult) -> ResultTable {
    let mut table = ResultTable::new(&["channel", "M", "p", "ell", "t_max", "gamma_L", "F_steady"]);
    for cell in &result.cells {
        table.push(vec![
            result.model.name().into(),
            result.num_qubits.into(),
            cell.p.into(),
            cell.ell.into(),
            result.cycles.into(),
            cell.gamma_l.into(),
            cell.steady_state_fidelity.into(),
        ]);
    }
    table
}

fn gamma_plot(result: &SweepResult) -> Plot {
    Plot {
        title: format!("{} M = {}", result.model.name(), result.num_qubits),
        x_label: "p".into(),
        y_label: "γ_L".into(),
        series: result
            .ell_values
            .iter()
            .map(|&ell| Series {
                label: format!("ℓ={ell}"),
                points: result
                    .p_values
                    .iter()
                    .copied()
                    .zip(result.gamma_series(ell).unwrap_or_default())
                    .collect(),
            })
            .collect(),
    }
}

fn run_sweep(config: &ExperimentConfig) -> Result<RunOutput, CliError> {
    let result = sweep_result(config)?;
    let mut output = RunOutput::new(sweep_table(&result));
    if config.output.traces {
        let mut traces = ResultTable::new(&["p", "ell", "t", "F"]);
        for cell in &result.cells {
            for (t, &f) in cell.trace.fidelities.iter().enumerate() {
                traces.push(vec![cell.p.into(), cell.ell.into(), t.into(), f.into()]);
            }
        }
        output.extra.push(("traces", traces));
    }
    output.plot = Some(gamma_plot(&result));
    Ok(output)
}

fn threshold(config: &ExperimentConfig) -> Result<RunOutput, CliError> {
    let result = sweep_result(config)?;
    let outcome = find_threshold(&result)?;
    let mut table = ResultTable::new(&["ell_a", "ell_b", "p_cross"]);
    let mut summary = Vec::new();
    let status = match &outcome {
        ThresholdOutcome::Crossing(est) => {
            table.note("p_th", format_real(est.p_th));
            table.note("grid_resolution", format_real(est.grid_resolution));
            for pair in &est.crossing_pairs {
                table.push(vec![pair.ell_a.into(), pair.ell_b.into(), pair.p.into()]);
            }
            summary.push(format!("p_th = {:.6} ± {:.6}", est.p_th, est.grid_resolution));
            Status::Complete
        }
        ThresholdOutcome::NoCrossing { direction } => {
            let text = match direction {
                MonotoneDirection::PurificationHelps => "purification helps everywhere",
                MonotoneDirection::PurificationNeverHelps => "purification never helps",
            };
            table.note("p_th", "none");
            table.note("no_crossing", text);
            summary.push(format!("no crossing: {text}"));
            Status::NoCrossing
        }
    };
    let mut plot = gamma_plot(&result);
    if let Some(p) = outcome.p_th() {
        plot.title = format!("{} (p_th ≈ {p:.4})", plot.title);
    }
    Ok(RunOutput {
        table,
        extra: vec![("sweep", sweep_table(&result))],
        plot: Some(plot),
        summary,
        status,
    })
}

fn sample(config: &ExperimentConfig) -> Result<RunOutput, CliError> {
    let psi = target(config)?;
    let rho = noisy_state(config, &psi)?;
    let ell = config.ell_values[0];
    let matrix = config.observable.matrix();
    let observable = Observable::new(matrix.clone())?;
    let per_batch = config.shots / config.batches;

    let mut table = ResultTable::new(&["batch", "n", "A_hat", "B_hat", "estimate", "se"]);
    let mut total = ShotAccumulator::default();
    for b in 0..config.batches {
        let range = b * per_batch..(b + 1) * per_batch;
        // Sequential fold over shots in index order keeps sums reproducible.
        let shots = simulate_shots(&rho, &observable, ell, config.seed, range)?;
        let est = ratio_estimate(&shots)?;
        for s in &shots {
            total.push(s);
        }
        table.push(vec![
            b.into(),
            est.n_samples.into(),
            est.numerator_mean.into(),
            est.denominator_mean.into(),
            est.estimate.into(),
            est.standard_error.into(),
        ]);
    }
    let combined = total.finish()?;
    let exact = extract_observable_exact(&matrix, &rho, ell)?;
    let power = spectral_power(&rho, 1u64 << ell)?;
    let trace_rho_n = power.log_scale.exp() * power.scaled_trace;

    table.note("observable", &config.observable);
    table.note("estimate", format_real(combined.estimate));
    table.note("standard_error", format_real(combined.standard_error));
    table.note("exact", format_real(exact));
    table.note("trace_rho_N", format_real(trace_rho_n));

    let mut summary = vec![
        format!(
            "<{}> ≈ {:.6} ± {:.6} from {} shots (exact {:.6})",
            config.observable, combined.estimate, combined.standard_error, combined.n_samples, exact
        ),
        format!("Tr(rho^N) = {trace_rho_n:.6e}"),
    ];
    if let Ok(n) = required_samples(combined.standard_error.max(f64::MIN_POSITIVE), trace_rho_n) {
        summary.push(format!("bound for ε = this standard error: {n} shots"));
    }
    if combined.status == EstimatorStatus::UnstableDenominator {
        summary.push("warning: denominator not resolved from zero; estimate is unreliable".into());
    }
    let mut output = RunOutput::new(table);
    output.summary = summary;
    Ok(output)
}

fn twirl_check(config: &ExperimentConfig) -> Result<RunOutput, CliError> {
    let m = config.num_qubits;
    let fraction = config.twirl.unwrap_or(1.0);
    let mut table = ResultTable::new(&["M", "p", "fraction", "max_deviation"]);
    let mut summary = Vec::new();
    for &p in &config.p_values {
        let twirled = NoiseModel::TwirledDephasing {
            p,
            twirl_fraction: fraction,
            twirl_seed: config.seed,
        }
        .build(m)?;
        let depol = NoiseModel::LocalDepolarizing { p }.build(m)?;
        let dev = channel_deviation(&twirled, &depol)?;
        table.push(vec![m.into(), p.into(), fraction.into(), dev.into()]);
        summary.push(format!("M = {m}, p = {p}: max deviation {dev:.3e}"));
    }
    let mut output = RunOutput::new(table);
    output.summary = summary;
    Ok(output)
}
