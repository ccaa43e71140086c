//! Command-line front end for the `pqec` simulator.

pub mod config;
pub mod parse;
pub mod run;
pub mod svg;
pub mod table;

use std::io::Write;
use std::path::{Path, PathBuf};

use thiserror::Error;

use config::{ExperimentConfig, UsageError, OUT_DIR_ENV};
use run::Status;
use table::Provenance;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(#[from] UsageError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("config file {path}: {message}")]
    Config { path: PathBuf, message: String },
    #[error(transparent)]
    Simulation(#[from] pqec::PqecError),
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    let io = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io)?;
    }
    std::fs::write(path, contents).map_err(io)
}

/// `foo.csv` + `traces` gives `foo.traces.csv`.
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    path.with_file_name(format!("{stem}.{suffix}.csv"))
}

/// Runs one experiment and writes its tables and plot.
pub fn execute(config: &ExperimentConfig) -> Result<Status, CliError> {
    if let Some(jobs) = config.jobs {
        // Fails only if a pool already exists, in which case it is reused.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }
    let output = run::run(config)?;
    let provenance = Provenance {
        command: config.command.name().to_string(),
        seed: config.seed,
        config: config.canonical.clone(),
    };

    let destination = config.output.csv.clone().or_else(|| {
        std::env::var_os(OUT_DIR_ENV).map(|dir| PathBuf::from(dir).join(format!("{}.csv", config.command.name())))
    });
    let main_text = output.table.render(&provenance);
    match &destination {
        Some(path) => write_file(path, &main_text)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(main_text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|source| CliError::Io {
                    path: PathBuf::from("<stdout>"),
                    source,
                })?;
        }
    }
    for (suffix, table) in &output.extra {
        let path = sibling(
            destination
                .as_deref()
                .unwrap_or(Path::new(&format!("{}.csv", config.command.name()))),
            suffix,
        );
        write_file(&path, &table.render(&provenance))?;
        eprintln!("wrote {}", path.display());
    }
    if let (Some(path), Some(plot)) = (&config.output.svg, &output.plot) {
        write_file(path, &svg::render(plot))?;
    }
    for line in &output.summary {
        eprintln!("{line}");
    }
    Ok(output.status)
}
