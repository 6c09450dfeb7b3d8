//! Experiment runner for the `gpe-core` solvers: one TOML config per run,
//! a JSON summary, CSV observable series and binary field dumps.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod runner;

use std::path::{Path, PathBuf};

pub use config::{parse_config, ConfigErrors, ExperimentConfig, Mode};
pub use runner::{run_experiment, RunError, RunOptions};

/// Environment variable holding the worker thread count.
pub const THREADS_VAR: &str = "GPE_THREADS";

/// Output directory used when neither the command line nor the config names one.
pub const DEFAULT_OUT: &str = "gpe-out";

/// Reads `GPE_THREADS`; unset, empty or unparsable values mean "let rayon decide".
pub fn threads_from_env() -> Option<usize> {
    let raw = std::env::var(THREADS_VAR).ok()?;
    match raw.trim().parse::<usize>() {
        Ok(n) if n > 0 => Some(n),
        _ => {
            log::warn!("ignoring {THREADS_VAR}={raw:?}; expected a positive integer");
            None
        }
    }
}

/// Loads a config file and resolves the field paths it references.
pub fn load_config(path: &Path, mode: Mode) -> Result<ExperimentConfig, RunError> {
    let text = std::fs::read_to_string(path).map_err(|source| RunError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut cfg = parse_config(&text, mode)?;
    let base = path.parent().unwrap_or(Path::new("."));
    cfg.resolve_paths(base)?;
    Ok(cfg)
}

/// Full command: load, run, persist. Returns the process exit status.
pub fn run(mode: Mode, config: &Path, out: Option<PathBuf>, deterministic: bool) -> i32 {
    let cfg = match load_config(config, mode) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("gpe {mode}: {e}");
            if let Some(dir) = &out {
                if let Err(w) = runner::write_failure_summary(mode, dir, &e) {
                    eprintln!("gpe {mode}: {w}");
                }
            }
            return e.exit_code();
        }
    };
    let out = out
        .or_else(|| cfg.output.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    let opts = RunOptions {
        out,
        deterministic,
        threads: threads_from_env(),
    };
    match run_experiment(&cfg, &opts) {
        Ok(code) => {
            if code != runner::EXIT_OK {
                eprintln!(
                    "gpe {mode}: run failed with status {code}; see {}",
                    opts.out.join("summary.json").display()
                );
            }
            code
        }
        Err(e) => {
            eprintln!("gpe {mode}: {e}");
            e.exit_code()
        }
    }
}
