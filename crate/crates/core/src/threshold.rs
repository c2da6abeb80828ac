//! Threshold grids over the response range and response binarization.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridKind {
    Continuous,
    Ordinal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GridStrategy {
    EqualSpacing,
    #[default]
    EqualMass,
}

/// Ordered cut points theta_0 < ... < theta_k over the response range.
///
/// Only the interior thresholds theta_1..theta_{k-1} are ever fitted; the
/// endpoints anchor the estimated distribution function at 0 and 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdGrid {
    thetas: Vec<f64>,
    kind: GridKind,
    collapsed: bool,
}

impl ThresholdGrid {
    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    /// Number of intervals (one less than the number of cut points).
    pub fn k(&self) -> usize {
        self.thetas.len() - 1
    }

    /// True when duplicate interior thresholds were dropped during
    /// construction, reducing k below the requested value.
    pub fn collapsed(&self) -> bool {
        self.collapsed
    }

    pub fn interior(&self) -> &[f64] {
        &self.thetas[1..self.thetas.len() - 1]
    }
}

/// Default interval count: min(20, number of distinct response values - 1).
pub fn default_k(y: &[f64]) -> usize {
    let mut v = y.to_vec();
    v.sort_by(f64::total_cmp);
    v.dedup();
    20.min(v.len().saturating_sub(1)).max(2)
}

/// Builds a continuous grid with endpoints at the observed min and max.
///
/// Equal spacing places interior thresholds uniformly; equal mass places
/// them at empirical quantiles j/k (type-1 order statistics). Interior
/// values that collide with a neighbour are dropped and the grid is
/// flagged as collapsed.
pub fn build_grid(y: &[f64], k: usize, strategy: GridStrategy) -> Result<ThresholdGrid> {
    if k < 2 {
        return Err(Error::GridTooSmall(k));
    }
    if y.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let lo = y.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if lo.is_nan() || hi.is_nan() || lo >= hi {
        return Err(Error::DegenerateResponse);
    }
    let mut interior = Vec::with_capacity(k - 1);
    match strategy {
        GridStrategy::EqualSpacing => {
            for j in 1..k {
                interior.push(lo + (hi - lo) * j as f64 / k as f64);
            }
        }
        GridStrategy::EqualMass => {
            let mut sorted = y.to_vec();
            sorted.sort_by(f64::total_cmp);
            let n = sorted.len();
            for j in 1..k {
                // type-1 empirical quantile at probability j/k
                let idx = math::ceil(n as f64 * j as f64 / k as f64) as usize;
                interior.push(sorted[idx.clamp(1, n) - 1]);
            }
        }
    }
    let mut thetas = Vec::with_capacity(k + 1);
    thetas.push(lo);
    let mut collapsed = false;
    for t in interior {
        if t > *thetas.last().unwrap() && t < hi {
            thetas.push(t);
        } else {
            collapsed = true;
        }
    }
    thetas.push(hi);
    Ok(ThresholdGrid {
        thetas,
        kind: GridKind::Continuous,
        collapsed,
    })
}

/// Grid for an ordinal response with categories 1..=k: interior thresholds
/// sit exactly at r = 1..k-1 and the padded endpoints (0.5 and k + 0.5)
/// exist only to satisfy the grid invariants; they are never fitted.
pub fn ordinal_grid(k_categories: usize) -> Result<ThresholdGrid> {
    if k_categories < 2 {
        return Err(Error::TooFewCategories(k_categories));
    }
    let mut thetas = Vec::with_capacity(k_categories + 1);
    thetas.push(0.5);
    for r in 1..k_categories {
        thetas.push(r as f64);
    }
    thetas.push(k_categories as f64 + 0.5);
    Ok(ThresholdGrid {
        thetas,
        kind: GridKind::Ordinal,
        collapsed: false,
    })
}

/// Indicator of Y > theta (strict inequality).
pub fn binarize(y: &[f64], theta: f64) -> Vec<u8> {
    debug_assert!(theta.is_finite());
    y.iter().map(|&v| u8::from(v > theta)).collect()
}
