//! Regression datasets: construction, standardization, splitting, and a
//! linear-model simulator.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{dot, Matrix};
use crate::math;
use crate::rng::Rng;

/// A response vector paired row-wise with a numeric covariate matrix.
///
/// Categorical covariates must be encoded numerically by the caller before
/// construction; the library consumes numeric matrices only.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    y: Vec<f64>,
    x: Matrix,
    names: Vec<String>,
}

/// Column means and sample standard deviations recorded by `standardize`,
/// so new covariate rows can be mapped onto the fitted scale.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingRecord {
    pub means: Vec<f64>,
    pub sds: Vec<f64>,
}

impl ScalingRecord {
    /// Applies the stored transform to a raw covariate row.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.means.len() {
            return Err(Error::DimensionMismatch {
                expected: self.means.len(),
                got: x.len(),
            });
        }
        Ok(x.iter()
            .zip(self.means.iter().zip(&self.sds))
            .map(|(v, (m, s))| (v - m) / s)
            .collect())
    }
}

impl Dataset {
    pub fn new(y: Vec<f64>, x: Matrix, names: Vec<String>) -> Result<Self> {
        if y.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if x.rows() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: y.len(),
                got: x.rows(),
            });
        }
        if names.len() != x.cols() {
            return Err(Error::DimensionMismatch {
                expected: x.cols(),
                got: names.len(),
            });
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { place: "response" });
        }
        if x.data().iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { place: "covariates" });
        }
        Ok(Dataset { y, x, names })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.y.len()
    }

    #[inline]
    pub fn p(&self) -> usize {
        self.x.cols()
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn x(&self) -> &Matrix {
        &self.x
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.x.row(i)
    }

    /// New dataset from the given row indices (repetition allowed).
    pub fn select(&self, idx: &[usize]) -> Dataset {
        Dataset {
            y: idx.iter().map(|&i| self.y[i]).collect(),
            x: self.x.select_rows(idx),
            names: self.names.clone(),
        }
    }

    /// Column means of the covariate matrix.
    pub fn column_means(&self) -> Vec<f64> {
        let n = self.n() as f64;
        (0..self.p())
            .map(|j| self.x.column(j).iter().sum::<f64>() / n)
            .collect()
    }

    /// Centers and scales every covariate column to sample mean 0 and
    /// sample sd 1 (denominator n-1). The response is left untouched.
    pub fn standardize(&self) -> Result<(Dataset, ScalingRecord)> {
        let n = self.n();
        let p = self.p();
        if n < 2 {
            return Err(Error::ConstantColumn(
                self.names.first().cloned().unwrap_or_default(),
            ));
        }
        let mut means = Vec::with_capacity(p);
        let mut sds = Vec::with_capacity(p);
        let mut out = self.x.clone();
        for j in 0..p {
            let col = self.x.column(j);
            let mean = col.iter().sum::<f64>() / n as f64;
            let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
            let sd = math::sqrt(var);
            if sd <= 0.0 {
                return Err(Error::ConstantColumn(self.names[j].clone()));
            }
            for i in 0..n {
                out.set(i, j, (self.x.get(i, j) - mean) / sd);
            }
            means.push(mean);
            sds.push(sd);
        }
        let d = Dataset {
            y: self.y.clone(),
            x: out,
            names: self.names.clone(),
        };
        Ok((d, ScalingRecord { means, sds }))
    }

    /// Seeded shuffle-then-prefix split into (train, validation); the two
    /// parts partition the rows.
    pub fn split(&self, train_frac: f64, seed: u64) -> Result<(Dataset, Dataset)> {
        let n = self.n();
        let n_train = math::round(n as f64 * train_frac) as usize;
        if !(train_frac > 0.0 && train_frac < 1.0) || n_train == 0 || n_train >= n {
            return Err(Error::DegenerateSplit {
                frac: train_frac,
                n,
            });
        }
        let mut idx: Vec<usize> = (0..n).collect();
        Rng::substream(seed, 0x5354).shuffle(&mut idx);
        let train = self.select(&idx[..n_train]);
        let valid = self.select(&idx[n_train..]);
        Ok((train, valid))
    }
}

/// Draws covariates i.i.d. standard normal and builds
/// Y = gamma0 + x' gamma + sigma * eps with standard normal noise.
pub fn simulate_linear(
    n: usize,
    gamma0: f64,
    gamma: &[f64],
    sigma: f64,
    seed: u64,
) -> Result<Dataset> {
    if sigma <= 0.0 {
        return Err(Error::NonPositiveSigma(sigma));
    }
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    let p = gamma.len();
    let mut rng = Rng::substream(seed, 0x5359);
    let mut x = Matrix::zeros(n, p);
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        for j in 0..p {
            x.set(i, j, rng.normal());
        }
        let eta = gamma0 + dot(gamma, x.row(i));
        y.push(eta + sigma * rng.normal());
    }
    let names = (1..=p).map(|j| format!("x{j}")).collect();
    Dataset::new(y, x, names)
}
