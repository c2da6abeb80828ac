//! Repeated-split prediction comparison: varying-thresholds variants
//! against the classical linear model, scored by absolute error and the
//! ranked probability score.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::data::Dataset;
use crate::distribution::{conditional_cdf, fit_varying_thresholds, ConditionalCdf, Fitter};
use crate::error::{Error, Result};
use crate::forest::ForestParams;
use crate::link::{normal_cdf, Link};
use crate::linalg::{ols, Matrix};
use crate::math;
use crate::rng;
use crate::threshold::{build_grid, GridStrategy};

/// Ordinary least squares baseline with a Gaussian predictive
/// distribution per row.
#[derive(Debug, Clone, PartialEq)]
pub struct GlmFit {
    pub gamma0: f64,
    pub gamma: Vec<f64>,
    pub sigma: f64,
}

pub fn fit_glm(train: &Dataset) -> Result<GlmFit> {
    let n = train.n();
    let p = train.p();
    if n <= p + 1 {
        return Err(Error::TooFewObservations { n, p });
    }
    let (gamma0, gamma, rss) = ols(train.x(), train.y())?;
    let sigma = math::sqrt(rss / (n - p - 1) as f64);
    Ok(GlmFit {
        gamma0,
        gamma,
        sigma,
    })
}

impl GlmFit {
    /// Predictive (mean, sd) for one covariate row.
    pub fn predict(&self, x: &[f64]) -> Result<(f64, f64)> {
        if x.len() != self.gamma.len() {
            return Err(Error::DimensionMismatch {
                expected: self.gamma.len(),
                got: x.len(),
            });
        }
        Ok((
            self.gamma0 + crate::linalg::dot(&self.gamma, x),
            self.sigma,
        ))
    }
}

/// Per-row Gaussian predictive distributions for a block of covariate rows.
pub fn glm_baseline(train: &Dataset, test_rows: &Matrix) -> Result<Vec<(f64, f64)>> {
    let fit = fit_glm(train)?;
    (0..test_rows.rows())
        .map(|i| fit.predict(test_rows.row(i)))
        .collect()
}

fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(f: &impl Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        ((b - a) / 6.0 * (fa + 4.0 * fm + fb), m, fm)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &impl Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        whole: f64,
        m: f64,
        fm: f64,
        tol: f64,
        depth: usize,
    ) -> f64 {
        let (left, lm, flm) = simpson(f, a, fa, m, fm);
        let (right, rm, frm) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || math::abs(delta) <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, fa, m, fm, left, lm, flm, tol / 2.0, depth - 1)
            + recurse(f, m, fm, b, fb, right, rm, frm, tol / 2.0, depth - 1)
    }
    if b <= a {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let (whole, m, fm) = simpson(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, whole, m, fm, tol, 40)
}

/// Ranked probability score of a Gaussian forecast, by adaptive
/// quadrature truncated at +-8 sd (tail contribution below 1e-14).
pub fn normal_rps(mean: f64, sd: f64, y: f64) -> f64 {
    if sd <= 1e-12 {
        // degenerate forecast: the integral collapses to |y - mean|
        return math::abs(y - mean);
    }
    let lo = mean - 8.0 * sd;
    let hi = mean + 8.0 * sd;
    let cut = y.clamp(lo, hi);
    let below = |t: f64| {
        let z = (t - mean) / sd;
        let c = normal_cdf(z);
        c * c
    };
    let above = |t: f64| {
        let z = (t - mean) / sd;
        let c = 1.0 - normal_cdf(z);
        c * c
    };
    adaptive_simpson(&below, lo, cut, 1e-8) + adaptive_simpson(&above, cut, hi, 1e-8)
}

/// One prediction method entering the comparison.
#[derive(Debug, Clone, PartialEq)]
pub enum MethodSpec {
    /// Classical linear model with Gaussian predictive distribution.
    Glm,
    /// Varying-thresholds model with linear predictor, maximum likelihood.
    VtMl {
        link: Link,
        k: usize,
        strategy: GridStrategy,
    },
    /// Varying-thresholds model with lasso-selected linear predictor
    /// (logit link); covariates are standardized internally on each
    /// training split.
    VtLasso {
        k: usize,
        strategy: GridStrategy,
        lambda: f64,
    },
    /// Varying-thresholds model with random-forest predictors.
    VtForest {
        link: Link,
        k: usize,
        strategy: GridStrategy,
        params: ForestParams,
    },
    /// Diagnostic baseline that forecasts a point mass at the realized
    /// response; scores zero by construction.
    Oracle,
}

impl MethodSpec {
    pub fn label(&self) -> String {
        match self {
            MethodSpec::Glm => "glm".to_string(),
            MethodSpec::VtMl { .. } => "VCpar".to_string(),
            MethodSpec::VtLasso { .. } => "VClasso".to_string(),
            MethodSpec::VtForest { .. } => "VCRF".to_string(),
            MethodSpec::Oracle => "oracle".to_string(),
        }
    }
}

/// Scores of one method on one validation split.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitScore {
    pub split: usize,
    pub method: String,
    pub mae: f64,
    pub rps: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub methods: Vec<String>,
    pub rows: Vec<SplitScore>,
    pub n_splits: usize,
    pub train_frac: f64,
    /// (split, method) pairs where the fit failed and the split was
    /// skipped for that method.
    pub skipped: Vec<(usize, String)>,
}

impl EvalReport {
    pub fn mean_rps(&self, method: &str) -> f64 {
        let vals: Vec<f64> = self
            .rows
            .iter()
            .filter(|r| r.method == method)
            .map(|r| r.rps)
            .collect();
        vals.iter().sum::<f64>() / vals.len() as f64
    }

    pub fn mean_mae(&self, method: &str) -> f64 {
        let vals: Vec<f64> = self
            .rows
            .iter()
            .filter(|r| r.method == method)
            .map(|r| r.mae)
            .collect();
        vals.iter().sum::<f64>() / vals.len() as f64
    }

    /// Fraction of common splits on which `a` attains strictly lower RPS
    /// than `b`.
    pub fn win_rate_rps(&self, a: &str, b: &str) -> f64 {
        let mut wins = 0usize;
        let mut total = 0usize;
        for s in 0..self.n_splits {
            let ra = self
                .rows
                .iter()
                .find(|r| r.split == s && r.method == a)
                .map(|r| r.rps);
            let rb = self
                .rows
                .iter()
                .find(|r| r.split == s && r.method == b)
                .map(|r| r.rps);
            if let (Some(ra), Some(rb)) = (ra, rb) {
                total += 1;
                if ra < rb {
                    wins += 1;
                }
            }
        }
        wins as f64 / total.max(1) as f64
    }
}

fn score_method(
    spec: &MethodSpec,
    split: usize,
    train: &Dataset,
    valid: &Dataset,
) -> Result<(f64, f64)> {
    let n_valid = valid.n();
    let mut abs_sum = 0.0;
    let mut rps_sum = 0.0;
    match spec {
        MethodSpec::Glm => {
            let fit = fit_glm(train)?;
            for i in 0..n_valid {
                let (mean, sd) = fit.predict(valid.row(i))?;
                abs_sum += math::abs(valid.y()[i] - mean);
                rps_sum += normal_rps(mean, sd, valid.y()[i]);
            }
        }
        MethodSpec::VtMl { link, k, strategy } => {
            let grid = build_grid(train.y(), *k, *strategy)?;
            let fit = fit_varying_thresholds(train, &grid, *link, &Fitter::Ml)?;
            for i in 0..n_valid {
                let cdf = conditional_cdf(&fit, valid.row(i))?;
                abs_sum += math::abs(valid.y()[i] - cdf.quantile(0.5));
                rps_sum += cdf.rps(valid.y()[i]);
            }
        }
        MethodSpec::VtLasso { k, strategy, lambda } => {
            let (strain, scaling) = train.standardize()?;
            let grid = build_grid(strain.y(), *k, *strategy)?;
            let fit = fit_varying_thresholds(
                &strain,
                &grid,
                Link::Logit,
                &Fitter::Lasso { lambda: *lambda },
            )?;
            for i in 0..n_valid {
                let x = scaling.apply(valid.row(i))?;
                let cdf = conditional_cdf(&fit, &x)?;
                abs_sum += math::abs(valid.y()[i] - cdf.quantile(0.5));
                rps_sum += cdf.rps(valid.y()[i]);
            }
        }
        MethodSpec::VtForest {
            link,
            k,
            strategy,
            params,
        } => {
            let grid = build_grid(train.y(), *k, *strategy)?;
            let per_split = ForestParams {
                seed: rng::derive_seed(params.seed, split as u64),
                ..params.clone()
            };
            let fit =
                fit_varying_thresholds(train, &grid, *link, &Fitter::Forest(per_split))?;
            for i in 0..n_valid {
                let cdf = conditional_cdf(&fit, valid.row(i))?;
                abs_sum += math::abs(valid.y()[i] - cdf.quantile(0.5));
                rps_sum += cdf.rps(valid.y()[i]);
            }
        }
        MethodSpec::Oracle => {
            for i in 0..n_valid {
                let cdf = ConditionalCdf::point_mass(valid.y()[i]);
                abs_sum += math::abs(valid.y()[i] - cdf.quantile(0.5));
                rps_sum += cdf.rps(valid.y()[i]);
            }
        }
    }
    Ok((abs_sum / n_valid as f64, rps_sum / n_valid as f64))
}

/// Fits every method on each of `n_splits` seeded train/validation splits
/// and reports per-split mean absolute error (point prediction: the CDF
/// median for varying-thresholds methods, the mean for the linear model)
/// and mean ranked probability score. A method failing on more than 10%
/// of splits aborts the comparison.
pub fn compare_methods(
    d: &Dataset,
    methods: &[MethodSpec],
    n_splits: usize,
    train_frac: f64,
    seed: u64,
) -> Result<EvalReport> {
    if n_splits == 0 {
        return Err(Error::NoSplits);
    }
    let mut rows = Vec::with_capacity(n_splits * methods.len());
    let mut skipped = Vec::new();
    for split in 0..n_splits {
        let (train, valid) = d.split(train_frac, seed + split as u64)?;
        for spec in methods {
            match score_method(spec, split, &train, &valid) {
                Ok((mae, rps)) => rows.push(SplitScore {
                    split,
                    method: spec.label(),
                    mae,
                    rps,
                }),
                Err(_) => skipped.push((split, spec.label())),
            }
        }
    }
    for spec in methods {
        let label = spec.label();
        let failed = skipped.iter().filter(|(_, m)| *m == label).count();
        if failed * 10 > n_splits {
            return Err(Error::MethodFailures {
                method: label,
                failed,
                total: n_splits,
            });
        }
    }
    Ok(EvalReport {
        methods: methods.iter().map(MethodSpec::label).collect(),
        rows,
        n_splits,
        train_frac,
        skipped,
    })
}
