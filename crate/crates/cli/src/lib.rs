//! Command-line front end for varying-thresholds distributional
//! regression: CSV in, fitted curves / CDFs / quantiles / bands /
//! importances / evaluation reports out, each with a JSON sidecar
//! recording the resolved configuration.

use std::fmt;
use std::path::{Path, PathBuf};

use vtreg_core::{
    aggregate_bootstrap, bootstrap_replicate, fit_varying_thresholds, CoefBands, Dataset,
    ErrorCategory, VtConfig,
};

pub mod commands;
pub mod io;

pub use commands::{run, Cli, Command};

#[derive(Debug)]
pub enum CliError {
    Core(vtreg_core::Error),
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    Config(String),
    Json {
        path: PathBuf,
        message: String,
    },
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn config(message: impl Into<String>) -> Self {
        CliError::Config(message.into())
    }

    /// 1 for data errors, 2 for fit failures, 3 for configuration errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) => match e.category() {
                ErrorCategory::Data => 1,
                ErrorCategory::Fit => 2,
                ErrorCategory::Config => 3,
            },
            CliError::Io { .. } | CliError::Json { .. } => 1,
            CliError::Config(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
            CliError::Config(msg) => write!(f, "{msg}"),
            CliError::Json { path, message } => write!(f, "{}: {message}", path.display()),
        }
    }
}

impl std::error::Error for CliError {}

impl From<vtreg_core::Error> for CliError {
    fn from(e: vtreg_core::Error) -> Self {
        CliError::Core(e)
    }
}

/// Bootstrap bands with replicates spread over worker threads. Each
/// replicate draws from its own seed-derived substream, so the result is
/// bit-identical to the sequential `bootstrap_bands` for any thread count.
pub fn bootstrap_bands_threaded(
    d: &Dataset,
    config: &VtConfig,
    b: usize,
    level: f64,
    seed: u64,
    threads: usize,
) -> Result<CoefBands, vtreg_core::Error> {
    use vtreg_core::{Error, Fitter};
    if b < 2 {
        return Err(Error::TooFewReplicates(b));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::BadLevel(level));
    }
    if matches!(config.fitter, Fitter::Forest(_)) {
        return Err(Error::NoCoefficientFunctions);
    }
    let grid = config.grid.build(d.y())?;
    let full = fit_varying_thresholds(d, &grid, config.link, &config.fitter)?
        .coefficient_curves()?;
    let threads = threads.max(1).min(b);
    let mut draws: Vec<Option<Vec<Vec<f64>>>> = vec![None; b];
    let chunk = b.div_ceil(threads);
    std::thread::scope(|scope| {
        for (t, slot) in draws.chunks_mut(chunk).enumerate() {
            let grid = &grid;
            scope.spawn(move || {
                for (offset, entry) in slot.iter_mut().enumerate() {
                    let r = (t * chunk + offset) as u64;
                    *entry = bootstrap_replicate(d, grid, config, seed, r).ok();
                }
            });
        }
    });
    aggregate_bootstrap(&full, &draws, level)
}
