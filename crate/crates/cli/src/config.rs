//! Flags, config files and their resolution into a validated experiment.

use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use pqec::channels::{NoiseModel, MAX_TWIRL_QUBITS};
use pqec::qstate::PauliString;

use crate::parse::{parse_int_values, parse_real_values, parse_state, StateSpec};
use crate::CliError;

/// Seed used when none is given.
pub const DEFAULT_SEED: u64 = 0;
/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "PQEC_OUT_DIR";

const MAX_QUBITS: usize = 8;
const MAX_CHECK_QUBITS: usize = 5;
const MAX_SAMPLED_ELL: u32 = pqec::montecarlo::MAX_SAMPLED_ROUNDS;
const MAX_ELL: u32 = pqec::purifier::MAX_SPECTRAL_ROUNDS;

#[derive(Parser, Debug)]
#[command(name = "pqec", version, about = "Purification error-correction simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CommandArgs,
}

#[derive(Subcommand, Debug)]
pub enum CommandArgs {
    /// Apply the channel once, then purify for each ℓ.
    Purify(RunArgs),
    /// Iterate noise and purification cycles.
    Cycle(RunArgs),
    /// Logical error rates over a p × ℓ grid.
    Sweep(RunArgs),
    /// Sweep and locate the crossing of the γ_L curves.
    Threshold(RunArgs),
    /// Monte Carlo shots and the parity-weighted ratio estimator.
    Sample(RunArgs),
    /// Compare the twirled dephasing channel with local depolarizing noise.
    #[command(name = "twirl-check")]
    TwirlCheck(RunArgs),
}

impl CommandArgs {
    pub fn split(self) -> (Command, RunArgs) {
        match self {
            CommandArgs::Purify(a) => (Command::Purify, a),
            CommandArgs::Cycle(a) => (Command::Cycle, a),
            CommandArgs::Sweep(a) => (Command::Sweep, a),
            CommandArgs::Threshold(a) => (Command::Threshold, a),
            CommandArgs::Sample(a) => (Command::Sample, a),
            CommandArgs::TwirlCheck(a) => (Command::TwirlCheck, a),
        }
    }
}

#[derive(Args, Debug, Clone, Default)]
pub struct RunArgs {
    /// global-depol, local-depol, dephasing or twirled-dephasing
    #[arg(long)]
    pub channel: Option<String>,
    /// Number of qubits
    #[arg(long = "M", value_name = "M")]
    pub m: Option<usize>,
    /// Error probability: value, list `a,b`, or grid `min:max:count`
    #[arg(long, allow_hyphen_values = true)]
    pub p: Option<String>,
    /// Purification rounds: value, list `a,b`, or range `a..b`
    #[arg(long)]
    pub ell: Option<String>,
    #[arg(long)]
    pub cycles: Option<usize>,
    #[arg(long)]
    pub shots: Option<u64>,
    #[arg(long)]
    pub batches: Option<u64>,
    /// Seed for twirl subsets and Monte Carlo shots
    #[arg(long)]
    pub seed: Option<u64>,
    /// plus^M, zero^M or bloch:theta,phi
    #[arg(long)]
    pub state: Option<String>,
    /// Fraction of the frame sequences used to twirl dephasing
    #[arg(long)]
    pub twirl: Option<f64>,
    /// Pauli string measured by `sample`, e.g. ZI
    #[arg(long)]
    pub observable: Option<String>,
    /// Also write per-cycle fidelities for every sweep cell
    #[arg(long)]
    pub traces: bool,
    /// CSV output path
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// SVG plot path
    #[arg(long)]
    pub svg: Option<PathBuf>,
    /// Worker threads (default: all cores)
    #[arg(long)]
    pub jobs: Option<usize>,
    /// TOML or JSON file with the same keys as the flags
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Purify,
    Cycle,
    Sweep,
    Threshold,
    Sample,
    TwirlCheck,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Purify => "purify",
            Command::Cycle => "cycle",
            Command::Sweep => "sweep",
            Command::Threshold => "threshold",
            Command::Sample => "sample",
            Command::TwirlCheck => "twirl-check",
        }
    }

    fn from_name(s: &str) -> Option<Self> {
        [
            Command::Purify,
            Command::Cycle,
            Command::Sweep,
            Command::Threshold,
            Command::Sample,
            Command::TwirlCheck,
        ]
        .into_iter()
        .find(|c| c.name() == s)
    }
}

/// A bad or conflicting setting, named by its key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UsageError {
    pub key: &'static str,
    pub message: String,
}

impl UsageError {
    pub fn new(key: &'static str, message: impl Into<String>) -> Self {
        Self {
            key,
            message: message.into(),
        }
    }
}

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid `{}`: {}", self.key, self.message)
    }
}

impl std::error::Error for UsageError {}

/// Number or string, as config files may write either.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Scalar {
    fn into_text(self) -> String {
        match self {
            Scalar::Int(i) => i.to_string(),
            Scalar::Float(x) => x.to_string(),
            Scalar::Text(s) => s,
        }
    }
}

/// Config file contents. Keys mirror the long flag names.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub channel: Option<String>,
    #[serde(rename = "M", skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<Scalar>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ell: Option<Scalar>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cycles: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shots: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub batches: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub state: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub twirl: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub observable: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub traces: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub svg: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jobs: Option<usize>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .unwrap_or("")
            .to_ascii_lowercase();
        let parsed = match ext.as_str() {
            "toml" => toml::from_str(&text).map_err(|e| e.to_string()),
            "json" => serde_json::from_str(&text).map_err(|e| e.to_string()),
            other => Err(format!("unsupported config extension {other:?} (use .toml or .json)")),
        };
        parsed.map_err(|message| CliError::Config {
            path: path.to_path_buf(),
            message,
        })
    }

    /// Flags override file values.
    fn overlay(mut self, args: RunArgs) -> Self {
        macro_rules! take {
            ($($field:ident),*) => {$(
                if args.$field.is_some() {
                    self.$field = args.$field;
                }
            )*};
        }
        take!(channel, m, cycles, shots, batches, seed, state, twirl, observable, out, svg, jobs);
        if let Some(p) = args.p {
            self.p = Some(Scalar::Text(p));
        }
        if let Some(ell) = args.ell {
            self.ell = Some(Scalar::Text(ell));
        }
        if args.traces {
            self.traces = Some(true);
        }
        self
    }
}

/// Output locations.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct OutputConfig {
    pub csv: Option<PathBuf>,
    pub svg: Option<PathBuf>,
    pub traces: bool,
}

/// A fully resolved and validated experiment.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub command: Command,
    /// Channel family with `p` set to the first grid value.
    pub channel: Option<NoiseModel>,
    pub num_qubits: usize,
    pub state: StateSpec,
    pub p_values: Vec<f64>,
    pub ell_values: Vec<u32>,
    pub cycles: usize,
    pub shots: u64,
    pub batches: u64,
    pub seed: u64,
    pub twirl: Option<f64>,
    pub observable: PauliString,
    pub output: OutputConfig,
    pub jobs: Option<usize>,
    /// Canonical JSON of every setting that affects the results.
    pub canonical: String,
}

fn channel_family(name: &str) -> Option<&'static str> {
    Some(match name.trim().to_ascii_lowercase().as_str() {
        "global-depol" | "global-depolarizing" | "global" => "global-depol",
        "local-depol" | "local-depolarizing" | "depol" => "local-depol",
        "dephasing" | "local-dephasing" => "dephasing",
        "twirled-dephasing" | "twirled" => "twirled-dephasing",
        _ => return None,
    })
}

fn require<T>(value: Option<T>, key: &'static str, command: Command) -> Result<T, UsageError> {
    value.ok_or_else(|| UsageError::new(key, format!("required by `{}`", command.name())))
}

fn single<T: Copy>(values: &[T], key: &'static str, command: Command) -> Result<T, UsageError> {
    match values {
        [v] => Ok(*v),
        _ => Err(UsageError::new(
            key,
            format!("`{}` takes a single value, got {}", command.name(), values.len()),
        )),
    }
}

/// Merges flags over an optional config file and validates the result.
pub fn parse_config(command: Command, args: RunArgs) -> Result<ExperimentConfig, CliError> {
    let file = match &args.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    if let Some(name) = &file.command {
        match Command::from_name(name) {
            Some(c) if c == command => {}
            Some(_) => {
                return Err(UsageError::new(
                    "command",
                    format!("config file is for `{name}`, not `{}`", command.name()),
                )
                .into())
            }
            None => return Err(UsageError::new("command", format!("unknown command {name:?}")).into()),
        }
    }
    Ok(resolve(command, file.overlay(args))?)
}

fn resolve(command: Command, raw: ConfigFile) -> Result<ExperimentConfig, UsageError> {
    use Command::*;

    let state_text = raw.state.clone().unwrap_or_else(|| "plus".into());
    let state = parse_state(&state_text)?;
    let num_qubits = match (raw.m, state.qubits) {
        (Some(m), Some(s)) if m != s => {
            return Err(UsageError::new("state", format!("state has {s} qubits but M = {m}")))
        }
        (Some(m), _) | (None, Some(m)) => m,
        (None, None) => 1,
    };
    if num_qubits == 0 || num_qubits > MAX_QUBITS {
        return Err(UsageError::new("M", format!("{num_qubits} outside 1..={MAX_QUBITS}")));
    }

    let p_text = match (raw.p.clone(), command) {
        (Some(p), _) => p.into_text(),
        (None, Sweep | Threshold) => "0:1:41".into(),
        (None, TwirlCheck) => "0.1,0.3,0.6".into(),
        (None, _) => return Err(require(None::<()>, "p", command).unwrap_err()),
    };
    let p_values = parse_real_values("p", &p_text)?;
    if let Some(bad) = p_values.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(UsageError::new("p", format!("{bad} outside [0, 1]")));
    }
    if matches!(command, Purify | Cycle | Sample) {
        single(&p_values, "p", command)?;
    }

    let ell_text = match (raw.ell.clone(), command) {
        (Some(e), _) => e.into_text(),
        (None, Purify) => "0..8".into(),
        (None, Cycle | Sample) => "1".into(),
        (None, Sweep | Threshold) => "0,1,2,3,5".into(),
        (None, TwirlCheck) => "0".into(),
    };
    let mut ell_values = parse_int_values("ell", &ell_text)?;
    let ell_cap = if command == Sample { MAX_SAMPLED_ELL } else { MAX_ELL };
    if let Some(bad) = ell_values.iter().find(|&&e| e > ell_cap) {
        return Err(UsageError::new("ell", format!("{bad} exceeds {ell_cap}")));
    }
    if command == Sample {
        single(&ell_values, "ell", command)?;
    }
    if command == Threshold {
        ell_values.sort_unstable();
        ell_values.dedup();
        if ell_values.len() < 2 || ell_values[0] != 0 {
            return Err(UsageError::new(
                "ell",
                "threshold needs at least two values including 0",
            ));
        }
    }

    let seed = raw.seed.unwrap_or(DEFAULT_SEED);
    let twirl = raw.twirl;
    if let Some(f) = twirl {
        if !(f > 0.0 && f <= 1.0) {
            return Err(UsageError::new("twirl", format!("{f} outside (0, 1]")));
        }
    }

    let family = match (&raw.channel, command) {
        (Some(name), _) => {
            Some(channel_family(name).ok_or_else(|| UsageError::new("channel", format!("unknown channel {name:?}")))?)
        }
        (None, TwirlCheck) => None,
        (None, _) => return Err(require(None::<()>, "channel", command).unwrap_err()),
    };
    let p0 = p_values[0];
    let channel = match (family, twirl, command) {
        (Some(f), _, TwirlCheck) if f != "dephasing" && f != "twirled-dephasing" => {
            return Err(UsageError::new("channel", "twirl-check always twirls dephasing"))
        }
        (_, _, TwirlCheck) => None,
        (Some("global-depol"), None, _) => Some(NoiseModel::GlobalDepolarizing { p: p0 }),
        (Some("local-depol"), None, _) => Some(NoiseModel::LocalDepolarizing { p: p0 }),
        (Some("dephasing"), None, _) => Some(NoiseModel::LocalDephasing { p: p0 }),
        (Some("dephasing" | "twirled-dephasing"), fraction, _) => Some(NoiseModel::TwirledDephasing {
            p: p0,
            twirl_fraction: fraction.unwrap_or(1.0),
            twirl_seed: seed,
        }),
        (Some(f), Some(_), _) => {
            return Err(UsageError::new(
                "twirl",
                format!("twirling applies to dephasing, not {f}"),
            ))
        }
        _ => unreachable!("channel names are normalized above"),
    };
    let twirled = matches!(channel, Some(NoiseModel::TwirledDephasing { .. })) || command == TwirlCheck;
    if twirled && num_qubits > MAX_TWIRL_QUBITS {
        return Err(UsageError::new(
            "M",
            format!("twirling supports at most {MAX_TWIRL_QUBITS} qubits"),
        ));
    }
    if command == TwirlCheck && num_qubits > MAX_CHECK_QUBITS {
        return Err(UsageError::new(
            "M",
            format!("twirl-check compares full channels; use M <= {MAX_CHECK_QUBITS}"),
        ));
    }

    let cycles = raw.cycles.unwrap_or(pqec::threshold::DEFAULT_CYCLES);
    if cycles == 0 {
        return Err(UsageError::new("cycles", "must be at least 1"));
    }
    let shots = raw.shots.unwrap_or(100_000);
    let batches = raw.batches.unwrap_or(10);
    if command == Sample {
        if batches == 0 {
            return Err(UsageError::new("batches", "must be at least 1"));
        }
        if shots / batches < 2 {
            return Err(UsageError::new("shots", "need at least 2 shots per batch"));
        }
    }
    let observable_text = raw
        .observable
        .clone()
        .unwrap_or_else(|| format!("Z{}", "I".repeat(num_qubits - 1)));
    let observable: PauliString = observable_text
        .parse()
        .map_err(|e: pqec::PqecError| UsageError::new("observable", e.to_string()))?;
    if observable.num_qubits() != num_qubits {
        return Err(UsageError::new(
            "observable",
            format!(
                "{observable_text} has {} factors but M = {num_qubits}",
                observable.num_qubits()
            ),
        ));
    }
    if raw.jobs == Some(0) {
        return Err(UsageError::new("jobs", "must be at least 1"));
    }
    let traces = raw.traces.unwrap_or(false);
    if traces && command != Sweep {
        return Err(UsageError::new("traces", "only `sweep` writes traces"));
    }
    if raw.svg.is_some() && matches!(command, Sample | TwirlCheck) {
        return Err(UsageError::new("svg", format!("`{}` has no plot", command.name())));
    }

    let canonical = ConfigFile {
        command: Some(command.name().into()),
        channel: if command == TwirlCheck {
            None
        } else {
            family.map(String::from)
        },
        m: Some(num_qubits),
        p: Some(Scalar::Text(p_text.trim().to_string())),
        ell: (command != TwirlCheck).then(|| Scalar::Text(ell_text.trim().to_string())),
        cycles: matches!(command, Cycle | Sweep | Threshold).then_some(cycles),
        shots: (command == Sample).then_some(shots),
        batches: (command == Sample).then_some(batches),
        seed: Some(seed),
        state: (command != TwirlCheck).then(|| state_text.trim().to_string()),
        twirl: if twirled { Some(twirl.unwrap_or(1.0)) } else { None },
        observable: (command == Sample).then(|| observable.to_string()),
        traces: traces.then_some(true),
        out: None,
        svg: None,
        jobs: None,
    };
    let canonical = serde_json::to_string(&canonical).expect("config serializes");

    Ok(ExperimentConfig {
        command,
        channel,
        num_qubits,
        state,
        p_values,
        ell_values,
        cycles,
        shots,
        batches,
        seed,
        twirl,
        observable,
        output: OutputConfig {
            csv: raw.out,
            svg: raw.svg,
            traces,
        },
        jobs: raw.jobs,
        canonical,
    })
}
