//! Pointwise confidence bands for coefficient functions: Wald intervals
//! from the per-threshold standard errors, and case-resampling bootstrap
//! percentile intervals.

use alloc::string::String;
use alloc::vec::Vec;

use crate::data::Dataset;
use crate::distribution::{fit_varying_thresholds, CoefCurves, Fitter, VtFit};
use crate::error::{Error, Result};
use crate::link::{normal_quantile, Link};
use crate::rng::Rng;
use crate::threshold::{build_grid, ordinal_grid, GridStrategy, ThresholdGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BandMethod {
    Wald,
    Bootstrap,
}

impl BandMethod {
    pub fn name(self) -> &'static str {
        match self {
            BandMethod::Wald => "wald",
            BandMethod::Bootstrap => "bootstrap",
        }
    }
}

/// Pointwise confidence bands per coefficient per interior threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefBands {
    pub names: Vec<String>,
    pub thetas: Vec<f64>,
    /// `estimate[c][t]` from the full-data fit; lower/upper share the layout.
    pub estimate: Vec<Vec<f64>>,
    pub lower: Vec<Vec<f64>>,
    pub upper: Vec<Vec<f64>>,
    pub level: f64,
    pub method: BandMethod,
    /// Successful replicate count (bootstrap only).
    pub replicates: Option<usize>,
    pub dropped_replicates: usize,
    /// Cells where the percentile band had to be widened to contain the
    /// full-data estimate.
    pub widened: usize,
}

/// Wald bands estimate +- z * se from the raw (pre-monotonization)
/// per-threshold fits; only the maximum likelihood fitter carries
/// standard errors.
pub fn wald_bands(fit: &VtFit, level: f64) -> Result<CoefBands> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::BadLevel(level));
    }
    if !matches!(fit.fitter, Fitter::Ml) {
        return Err(Error::NoStandardErrors);
    }
    let curves = fit.coefficient_curves()?;
    let se = curves.se.as_ref().ok_or(Error::NoStandardErrors)?;
    let z = normal_quantile((1.0 + level) / 2.0);
    let mut lower = curves.estimates.clone();
    let mut upper = curves.estimates.clone();
    for c in 0..curves.estimates.len() {
        for t in 0..curves.thetas.len() {
            lower[c][t] -= z * se[c][t];
            upper[c][t] += z * se[c][t];
        }
    }
    Ok(CoefBands {
        names: curves.names,
        thetas: curves.thetas,
        estimate: curves.estimates,
        lower,
        upper,
        level,
        method: BandMethod::Wald,
        replicates: None,
        dropped_replicates: 0,
        widened: 0,
    })
}

/// Grid construction recipe shared by the bootstrap replicates.
#[derive(Debug, Clone, PartialEq)]
pub enum GridSpec {
    Continuous { k: usize, strategy: GridStrategy },
    Ordinal { categories: usize },
}

impl GridSpec {
    pub fn build(&self, y: &[f64]) -> Result<ThresholdGrid> {
        match self {
            GridSpec::Continuous { k, strategy } => build_grid(y, *k, *strategy),
            GridSpec::Ordinal { categories } => ordinal_grid(*categories),
        }
    }
}

/// Fit configuration refitted on every bootstrap resample.
#[derive(Debug, Clone, PartialEq)]
pub struct VtConfig {
    pub link: Link,
    pub fitter: Fitter,
    pub grid: GridSpec,
}

/// One case-resampling replicate: draws n rows with replacement using the
/// replicate's own substream, refits on the full-data grid, and returns
/// the coefficient matrix `[coef][theta]`. Pure in (inputs, seed, replicate),
/// so replicates may run in any order or in parallel.
pub fn bootstrap_replicate(
    d: &Dataset,
    grid: &ThresholdGrid,
    config: &VtConfig,
    seed: u64,
    replicate: u64,
) -> Result<Vec<Vec<f64>>> {
    let n = d.n();
    let mut rng = Rng::substream(seed, replicate);
    let idx: Vec<usize> = (0..n).map(|_| rng.next_index(n)).collect();
    let resampled = d.select(&idx);
    let fit = fit_varying_thresholds(&resampled, grid, config.link, &config.fitter)?;
    Ok(fit.coefficient_curves()?.estimates)
}

/// Type-1 empirical percentile index (1-based): ceil(n * q) clamped into
/// [1, n].
pub fn percentile_index(n: usize, q: f64) -> usize {
    (crate::math::ceil(n as f64 * q) as usize).clamp(1, n)
}

/// Combines replicate draws into percentile bands around the full-data
/// estimates. `draws[r] = None` marks a failed replicate; more than 10%
/// failures abort. Aggregation is independent of the order in which the
/// draws were produced.
pub fn aggregate_bootstrap(
    full: &CoefCurves,
    draws: &[Option<Vec<Vec<f64>>>],
    level: f64,
) -> Result<CoefBands> {
    let b = draws.len();
    let ok: Vec<&Vec<Vec<f64>>> = draws.iter().flatten().collect();
    let dropped = b - ok.len();
    if dropped * 10 > b {
        return Err(Error::BootstrapFailures {
            failed: dropped,
            total: b,
        });
    }
    let succ = ok.len();
    let lo_idx = percentile_index(succ, (1.0 - level) / 2.0);
    let hi_idx = percentile_index(succ, (1.0 + level) / 2.0);
    let n_coef = full.estimates.len();
    let n_theta = full.thetas.len();
    let mut lower = full.estimates.clone();
    let mut upper = full.estimates.clone();
    let mut widened = 0;
    let mut values = Vec::with_capacity(succ);
    for c in 0..n_coef {
        for t in 0..n_theta {
            values.clear();
            values.extend(ok.iter().map(|rep| rep[c][t]));
            values.sort_by(f64::total_cmp);
            let mut lo = values[lo_idx - 1];
            let mut hi = values[hi_idx - 1];
            let est = full.estimates[c][t];
            if est < lo {
                lo = est;
                widened += 1;
            }
            if est > hi {
                hi = est;
                widened += 1;
            }
            lower[c][t] = lo;
            upper[c][t] = hi;
        }
    }
    Ok(CoefBands {
        names: full.names.clone(),
        thetas: full.thetas.clone(),
        estimate: full.estimates.clone(),
        lower,
        upper,
        level,
        method: BandMethod::Bootstrap,
        replicates: Some(succ),
        dropped_replicates: dropped,
        widened,
    })
}

/// Percentile bootstrap bands: B case resamples refit on the full-data
/// threshold grid, deterministic per seed.
pub fn bootstrap_bands(
    d: &Dataset,
    config: &VtConfig,
    b: usize,
    level: f64,
    seed: u64,
) -> Result<CoefBands> {
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
    let draws: Vec<Option<Vec<Vec<f64>>>> = (0..b)
        .map(|r| bootstrap_replicate(d, &grid, config, seed, r as u64).ok())
        .collect();
    aggregate_bootstrap(&full, &draws, level)
}
