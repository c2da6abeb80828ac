//! The varying-thresholds model: one binary fit per interior threshold,
//! combined into conditional distribution functions with quantiles,
//! moments, and the ranked probability score.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::forest::{fit_forest, Forest, ForestParams};
use crate::glm::{fit_irls, fit_lasso, BinaryFit};
use crate::isotonic::pava_nonincreasing;
use crate::link::Link;
use crate::rng;
use crate::threshold::{binarize, GridKind, ThresholdGrid};

/// Forest leaf probabilities are clamped away from {0, 1} before link
/// inversion, which would otherwise produce infinite predictors.
const PROB_CLAMP: f64 = 1e-6;

/// How the per-threshold binary models are fitted.
#[derive(Debug, Clone, PartialEq)]
pub enum Fitter {
    Ml,
    Lasso { lambda: f64 },
    Forest(ForestParams),
}

impl Fitter {
    pub fn name(&self) -> &'static str {
        match self {
            Fitter::Ml => "ml",
            Fitter::Lasso { .. } => "lasso",
            Fitter::Forest(_) => "forest",
        }
    }
}

/// The model fitted at a single interior threshold.
#[derive(Debug, Clone, PartialEq)]
pub enum ThresholdModel {
    Binary(BinaryFit),
    Forest(Forest),
}

impl ThresholdModel {
    /// Predictor eta_r(x) on the link scale.
    pub fn eta(&self, x: &[f64], link: Link) -> Result<f64> {
        match self {
            ThresholdModel::Binary(fit) => fit.predict_eta(x),
            ThresholdModel::Forest(forest) => {
                let p = forest.prob(x)?.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
                Ok(link.quantile(p))
            }
        }
    }

    pub fn as_binary(&self) -> Option<&BinaryFit> {
        match self {
            ThresholdModel::Binary(fit) => Some(fit),
            ThresholdModel::Forest(_) => None,
        }
    }

    pub fn as_forest(&self) -> Option<&Forest> {
        match self {
            ThresholdModel::Forest(f) => Some(f),
            ThresholdModel::Binary(_) => None,
        }
    }
}

/// A fitted varying-thresholds model: exactly one model per interior
/// threshold of the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct VtFit {
    pub grid: ThresholdGrid,
    pub link: Link,
    pub models: Vec<ThresholdModel>,
    pub names: Vec<String>,
    pub fitter: Fitter,
}

/// Fits one binary model per interior threshold. Threshold fits are
/// independent of each other; any threshold whose binarized labels are
/// single-class aborts the whole fit and names the offending threshold.
pub fn fit_varying_thresholds(
    d: &Dataset,
    grid: &ThresholdGrid,
    link: Link,
    fitter: &Fitter,
) -> Result<VtFit> {
    let interior = grid.interior();
    if interior.is_empty() {
        return Err(Error::NoInteriorThresholds);
    }
    let mut models = Vec::with_capacity(interior.len());
    for (r, &theta) in interior.iter().enumerate() {
        let y01 = binarize(d.y(), theta);
        let ones = y01.iter().filter(|&&v| v == 1).count();
        if ones == 0 || ones == y01.len() {
            return Err(Error::SingleClassAtThreshold { theta });
        }
        let model = match fitter {
            Fitter::Ml => ThresholdModel::Binary(fit_irls(d.x(), &y01, link)?),
            Fitter::Lasso { lambda } => {
                ThresholdModel::Binary(fit_lasso(d.x(), &y01, link, *lambda)?)
            }
            Fitter::Forest(params) => {
                let per_threshold = ForestParams {
                    seed: rng::derive_seed(params.seed, r as u64),
                    ..params.clone()
                };
                ThresholdModel::Forest(fit_forest(d.x(), &y01, &per_threshold)?)
            }
        };
        models.push(model);
    }
    Ok(VtFit {
        grid: grid.clone(),
        link,
        models,
        names: d.names().to_vec(),
        fitter: fitter.clone(),
    })
}

/// Coefficient functions of a linear-predictor fit, tabulated per interior
/// threshold; the data behind coefficient-curve plots.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefCurves {
    /// "(intercept)" followed by the covariate names.
    pub names: Vec<String>,
    pub thetas: Vec<f64>,
    /// `estimates[c][t]`: coefficient c at interior threshold t.
    pub estimates: Vec<Vec<f64>>,
    /// Standard errors in the same layout, when the fitter provides them.
    pub se: Option<Vec<Vec<f64>>>,
}

impl VtFit {
    pub fn coefficient_curves(&self) -> Result<CoefCurves> {
        let p = self.names.len();
        let t = self.models.len();
        let mut names = vec!["(intercept)".to_string()];
        names.extend(self.names.iter().cloned());
        let mut estimates = vec![vec![0.0; t]; p + 1];
        let mut ses = vec![vec![0.0; t]; p + 1];
        let mut have_se = true;
        for (ti, model) in self.models.iter().enumerate() {
            let fit = model.as_binary().ok_or(Error::NoStandardErrors)?;
            estimates[0][ti] = fit.beta0;
            for j in 0..p {
                estimates[j + 1][ti] = fit.beta[j];
            }
            match &fit.se {
                Some(se) => {
                    for j in 0..=p {
                        ses[j][ti] = se[j];
                    }
                }
                None => have_se = false,
            }
        }
        Ok(CoefCurves {
            names,
            thetas: self.grid.interior().to_vec(),
            estimates,
            se: have_se.then_some(ses),
        })
    }
}

/// An estimated conditional distribution function for one covariate vector.
#[derive(Debug, Clone, PartialEq)]
pub enum ConditionalCdf {
    /// Piecewise-linear between grid knots, anchored at 0 and 1; zero mass
    /// outside the knot range.
    PiecewiseLinear { thetas: Vec<f64>, probs: Vec<f64> },
    /// Step function jumping at each point to the given cumulative value;
    /// the last cumulative value is 1. Used for ordinal responses and
    /// degenerate point-mass forecasts.
    Step { points: Vec<f64>, cumulative: Vec<f64> },
}

/// Summary moments of an estimated conditional distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub mean: f64,
    pub median: f64,
    pub sd: f64,
}

/// Evaluates eta_r(x) at every interior threshold, enforces monotonicity on
/// the predictor scale, and maps through 1 - F to distribution values.
pub fn conditional_cdf(fit: &VtFit, x: &[f64]) -> Result<ConditionalCdf> {
    if x.len() != fit.names.len() {
        return Err(Error::DimensionMismatch {
            expected: fit.names.len(),
            got: x.len(),
        });
    }
    let mut etas = Vec::with_capacity(fit.models.len());
    for model in &fit.models {
        etas.push(model.eta(x, fit.link)?);
    }
    let monotone = pava_nonincreasing(&etas, None)?;
    let mut probs: Vec<f64> = monotone
        .values
        .iter()
        .map(|&e| (1.0 - fit.link.cdf(e)).clamp(0.0, 1.0))
        .collect();
    for i in 1..probs.len() {
        if probs[i] < probs[i - 1] {
            probs[i] = probs[i - 1];
        }
    }
    match fit.grid.kind() {
        GridKind::Continuous => {
            let mut full = Vec::with_capacity(probs.len() + 2);
            full.push(0.0);
            full.extend(probs);
            full.push(1.0);
            Ok(ConditionalCdf::PiecewiseLinear {
                thetas: fit.grid.thetas().to_vec(),
                probs: full,
            })
        }
        GridKind::Ordinal => {
            let interior = fit.grid.interior();
            let mut points = interior.to_vec();
            points.push(interior.last().unwrap() + 1.0);
            probs.push(1.0);
            Ok(ConditionalCdf::Step {
                points,
                cumulative: probs,
            })
        }
    }
}

impl ConditionalCdf {
    /// A degenerate distribution placing all mass at y.
    pub fn point_mass(y: f64) -> Self {
        ConditionalCdf::Step {
            points: vec![y],
            cumulative: vec![1.0],
        }
    }

    /// F(theta): piecewise-linear interpolation (or step lookup), 0 below
    /// the first knot, 1 above the last.
    pub fn eval(&self, theta: f64) -> f64 {
        match self {
            ConditionalCdf::PiecewiseLinear { thetas, probs } => {
                if theta <= thetas[0] {
                    return if theta < thetas[0] { 0.0 } else { probs[0] };
                }
                let last = thetas.len() - 1;
                if theta >= thetas[last] {
                    return if theta > thetas[last] { 1.0 } else { probs[last] };
                }
                let j = match thetas.binary_search_by(|t| t.total_cmp(&theta)) {
                    Ok(j) => return probs[j],
                    Err(j) => j, // theta lies in (thetas[j-1], thetas[j])
                };
                let (t0, t1) = (thetas[j - 1], thetas[j]);
                let (p0, p1) = (probs[j - 1], probs[j]);
                p0 + (p1 - p0) / (t1 - t0) * (theta - t0)
            }
            ConditionalCdf::Step { points, cumulative } => {
                if theta < points[0] {
                    return 0.0;
                }
                let mut val = 0.0;
                for (pt, c) in points.iter().zip(cumulative) {
                    if *pt <= theta {
                        val = *c;
                    } else {
                        break;
                    }
                }
                val
            }
        }
    }

    /// Generalized inverse: the smallest theta with F(theta) >= alpha. On a
    /// flat segment at level alpha the left endpoint is returned; for step
    /// distributions the jump point (the category) is returned.
    pub fn quantile(&self, alpha: f64) -> f64 {
        assert!(
            alpha > 0.0 && alpha < 1.0,
            "quantile needs alpha in (0,1), got {alpha}"
        );
        match self {
            ConditionalCdf::PiecewiseLinear { thetas, probs } => {
                let j = probs
                    .iter()
                    .position(|&p| p >= alpha)
                    .expect("probs end at 1");
                if j == 0 {
                    return thetas[0];
                }
                let (p0, p1) = (probs[j - 1], probs[j]);
                let (t0, t1) = (thetas[j - 1], thetas[j]);
                t0 + (alpha - p0) / (p1 - p0) * (t1 - t0)
            }
            ConditionalCdf::Step { points, cumulative } => {
                let j = cumulative
                    .iter()
                    .position(|&c| c >= alpha)
                    .expect("cumulative ends at 1");
                points[j]
            }
        }
    }

    /// Exact moments: a mixture of uniforms on the linear segments, or a
    /// discrete distribution on the jump points.
    pub fn moments(&self) -> Moments {
        let (mean, second) = match self {
            ConditionalCdf::PiecewiseLinear { thetas, probs } => {
                let mut mean = 0.0;
                let mut second = 0.0;
                for j in 0..thetas.len() - 1 {
                    let mass = probs[j + 1] - probs[j];
                    if mass <= 0.0 {
                        continue;
                    }
                    let (a, b) = (thetas[j], thetas[j + 1]);
                    mean += mass * 0.5 * (a + b);
                    second += mass * (a * a + a * b + b * b) / 3.0;
                }
                (mean, second)
            }
            ConditionalCdf::Step { points, cumulative } => {
                let mut mean = 0.0;
                let mut second = 0.0;
                let mut prev = 0.0;
                for (pt, c) in points.iter().zip(cumulative) {
                    let mass = c - prev;
                    prev = *c;
                    mean += mass * pt;
                    second += mass * pt * pt;
                }
                (mean, second)
            }
        };
        let var = (second - mean * mean).max(0.0);
        Moments {
            mean,
            median: self.quantile(0.5),
            sd: crate::math::sqrt(var),
        }
    }

    /// Ranked probability score against the observation y: the exact
    /// integral of (I(y <= t) - F(t))^2 over the knot range, computed in
    /// closed form per linear segment. Mass outside the range is truncated.
    pub fn rps(&self, y: f64) -> f64 {
        match self {
            ConditionalCdf::PiecewiseLinear { thetas, probs } => {
                let mut total = 0.0;
                for j in 0..thetas.len() - 1 {
                    let (t0, t1) = (thetas[j], thetas[j + 1]);
                    let (p0, p1) = (probs[j], probs[j + 1]);
                    let slope = (p1 - p0) / (t1 - t0);
                    // pieces below y integrate F^2, pieces at or above y
                    // integrate (1-F)^2
                    let cut = y.clamp(t0, t1);
                    total += quad_integral(p0, slope, 0.0, cut - t0);
                    total += quad_integral(1.0 - p0, -slope, cut - t0, t1 - t0);
                }
                total
            }
            ConditionalCdf::Step { points, cumulative } => {
                let mut total = 0.0;
                for j in 0..points.len() - 1 {
                    let ind = f64::from(y <= points[j]);
                    let d = ind - cumulative[j];
                    total += d * d * (points[j + 1] - points[j]);
                }
                total
            }
        }
    }
}

/// Integral of (a + b u)^2 du over [u1, u2].
fn quad_integral(a: f64, b: f64, u1: f64, u2: f64) -> f64 {
    if u2 <= u1 {
        return 0.0;
    }
    let term = |u: f64| a * a * u + a * b * u * u + b * b * u * u * u / 3.0;
    term(u2) - term(u1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::simulate_linear;
    use crate::linalg::ols;
    use crate::math;
    use crate::rng::Rng;
    use crate::threshold::{build_grid, ordinal_grid, GridStrategy};
    use proptest::prelude::*;

    fn intercept_fit(beta0: f64) -> ThresholdModel {
        ThresholdModel::Binary(BinaryFit {
            beta0,
            beta: vec![],
            se: Some(vec![0.1]),
            converged: true,
            iterations: 1,
            lambda: 0.0,
            loglik: 0.0,
            warnings: Vec::new(),
        })
    }

    fn toy_cdf() -> ConditionalCdf {
        ConditionalCdf::PiecewiseLinear {
            thetas: vec![0.0, 1.0, 2.0],
            probs: vec![0.0, 0.4, 1.0],
        }
    }

    #[test]
    fn cdf_eval_examples() {
        let c = toy_cdf();
        assert!((c.eval(0.5) - 0.2).abs() < 1e-15);
        assert_eq!(c.eval(0.0), 0.0);
        assert_eq!(c.eval(7.0), 1.0);
        assert_eq!(c.eval(-1.0), 0.0);
        assert!((c.eval(1.0) - 0.4).abs() < 1e-15);
    }

    #[test]
    fn quantile_examples() {
        let c = toy_cdf();
        assert!((c.quantile(0.4) - 1.0).abs() < 1e-12);
        assert!((c.quantile(0.7) - 1.5).abs() < 1e-12);
        assert!((c.quantile(0.2) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn quantile_flat_segment_returns_left_endpoint() {
        let c = ConditionalCdf::PiecewiseLinear {
            thetas: vec![0.0, 1.0, 2.0, 3.0],
            probs: vec![0.0, 0.5, 0.5, 1.0],
        };
        assert!((c.quantile(0.5) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn moments_of_uniform_segment() {
        let c = ConditionalCdf::PiecewiseLinear {
            thetas: vec![0.0, 1.0],
            probs: vec![0.0, 1.0],
        };
        let m = c.moments();
        assert!((m.mean - 0.5).abs() < 1e-12);
        assert!((m.sd - 1.0 / math::sqrt(12.0)).abs() < 1e-12);
        assert!((m.median - 0.5).abs() < 1e-12);
    }

    #[test]
    fn moments_symmetric_two_segment() {
        let c = ConditionalCdf::PiecewiseLinear {
            thetas: vec![0.0, 1.0, 2.0],
            probs: vec![0.0, 0.5, 1.0],
        };
        let m = c.moments();
        assert!((m.mean - 1.0).abs() < 1e-12);
        assert!((m.median - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rps_examples() {
        assert_eq!(ConditionalCdf::point_mass(3.0).rps(3.0), 0.0);
        let uniform = ConditionalCdf::PiecewiseLinear {
            thetas: vec![0.0, 1.0],
            probs: vec![0.0, 1.0],
        };
        assert!((uniform.rps(0.0) - 1.0 / 3.0).abs() < 1e-12);
        assert!((uniform.rps(1.0) - 1.0 / 3.0).abs() < 1e-12);
    }

    fn rps_quadrature(c: &ConditionalCdf, y: f64) -> f64 {
        let (lo, hi) = match c {
            ConditionalCdf::PiecewiseLinear { thetas, .. } => {
                (thetas[0], *thetas.last().unwrap())
            }
            ConditionalCdf::Step { points, .. } => (points[0], *points.last().unwrap()),
        };
        // midpoint rule on each side of the indicator's jump at y
        let h = 1e-4;
        let piece = |a: f64, b: f64, ind: f64| -> f64 {
            if b <= a {
                return 0.0;
            }
            let steps = ((b - a) / h).ceil() as usize;
            let w = (b - a) / steps as f64;
            (0..steps)
                .map(|i| {
                    let t = a + (i as f64 + 0.5) * w;
                    let d = ind - c.eval(t);
                    d * d * w
                })
                .sum()
        };
        let cut = y.clamp(lo, hi);
        piece(lo, cut, 0.0) + piece(cut, hi, 1.0)
    }

    #[test]
    fn rps_matches_quadrature_on_random_cdfs() {
        let mut rng = Rng::new(77);
        for case in 0..10 {
            let k = 3 + (case % 4);
            // knots at least 0.05 apart keep the quadrature oracle itself
            // accurate to well below the comparison tolerance
            let mut thetas: Vec<f64> = (0..=k).map(|_| rng.next_f64() * 10.0 - 5.0).collect();
            thetas.sort_by(f64::total_cmp);
            thetas.dedup_by(|a, b| (*a - *b).abs() < 0.05);
            if thetas.len() < 2 {
                continue;
            }
            let m = thetas.len();
            let mut probs: Vec<f64> = (0..m).map(|_| rng.next_f64()).collect();
            probs.sort_by(f64::total_cmp);
            probs[0] = 0.0;
            probs[m - 1] = 1.0;
            let c = ConditionalCdf::PiecewiseLinear { thetas, probs };
            let y = rng.next_f64() * 12.0 - 6.0;
            let exact = c.rps(y);
            let approx = rps_quadrature(&c, y);
            assert!(exact >= 0.0);
            assert!(
                (exact - approx).abs() < 1e-6,
                "case {case}: {exact} vs {approx}"
            );
        }
    }

    #[test]
    fn step_cdf_moments_and_rps() {
        let point = ConditionalCdf::point_mass(2.5);
        let m = point.moments();
        assert_eq!((m.mean, m.median, m.sd), (2.5, 2.5, 0.0));

        // discrete distribution on {1, 2, 3} with masses 0.2, 0.5, 0.3
        let step = ConditionalCdf::Step {
            points: vec![1.0, 2.0, 3.0],
            cumulative: vec![0.2, 0.7, 1.0],
        };
        let m = step.moments();
        assert!((m.mean - 2.1).abs() < 1e-12);
        assert_eq!(m.median, 2.0);
        let var = 0.2 * 1.0 + 0.5 * 4.0 + 0.3 * 9.0 - 2.1 * 2.1;
        assert!((m.sd - math::sqrt(var)).abs() < 1e-12);
        assert_eq!(step.eval(0.5), 0.0);
        assert_eq!(step.eval(2.3), 0.7);
        assert_eq!(step.eval(3.0), 1.0);
        assert_eq!(step.quantile(0.9), 3.0);

        // the step score is the unit-width discrete ranked probability sum
        for y in [1.0, 2.0, 3.0] {
            let want = (f64::from(y <= 1.0) - 0.2f64).powi(2)
                + (f64::from(y <= 2.0) - 0.7f64).powi(2);
            assert!((step.rps(y) - want).abs() < 1e-12);
            assert!((rps_quadrature(&step, y) - want).abs() < 1e-6);
        }
    }

    #[test]
    fn moments_match_monte_carlo() {
        let c = ConditionalCdf::PiecewiseLinear {
            thetas: vec![-1.0, 0.5, 1.0, 4.0],
            probs: vec![0.0, 0.3, 0.8, 1.0],
        };
        let m = c.moments();
        let mut rng = Rng::new(5);
        let n = 1_000_000usize;
        let mut s = 0.0;
        let mut s2 = 0.0;
        for _ in 0..n {
            let u = rng.next_f64().clamp(1e-12, 1.0 - 1e-12);
            let v = c.quantile(u);
            s += v;
            s2 += v * v;
        }
        let nf = n as f64;
        let mc_mean = s / nf;
        let mc_var = s2 / nf - mc_mean * mc_mean;
        let se_mean = m.sd / math::sqrt(nf);
        assert!((mc_mean - m.mean).abs() < 3.0 * se_mean);
        assert!((math::sqrt(mc_var) - m.sd).abs() < 3.0 * se_mean);
    }

    #[test]
    fn pava_leaves_decreasing_etas_alone() {
        let grid = build_grid(&[0.0, 1.0, 2.0, 3.0], 3, GridStrategy::EqualSpacing).unwrap();
        let fit = VtFit {
            grid,
            link: Link::Logit,
            models: vec![intercept_fit(2.0), intercept_fit(0.5)],
            names: vec![],
            fitter: Fitter::Ml,
        };
        let c = conditional_cdf(&fit, &[]).unwrap();
        match c {
            ConditionalCdf::PiecewiseLinear { probs, .. } => {
                assert!((probs[1] - (1.0 - Link::Logit.cdf(2.0))).abs() < 1e-12);
                assert!((probs[2] - (1.0 - Link::Logit.cdf(0.5))).abs() < 1e-12);
            }
            _ => panic!("expected piecewise-linear"),
        }
    }

    #[test]
    fn pava_pools_violating_etas() {
        let grid = build_grid(&[0.0, 1.0, 2.0, 3.0], 3, GridStrategy::EqualSpacing).unwrap();
        let fit = VtFit {
            grid,
            link: Link::Logit,
            models: vec![intercept_fit(1.0), intercept_fit(2.0)],
            names: vec![],
            fitter: Fitter::Ml,
        };
        let c = conditional_cdf(&fit, &[]).unwrap();
        match c {
            ConditionalCdf::PiecewiseLinear { probs, .. } => {
                let pooled = 1.0 - Link::Logit.cdf(1.5);
                assert!((probs[1] - pooled).abs() < 1e-12);
                assert!((probs[2] - pooled).abs() < 1e-12);
            }
            _ => panic!("expected piecewise-linear"),
        }
    }

    #[test]
    fn single_interior_threshold_reduces_to_binary() {
        let d = simulate_linear(80, 0.0, &[1.0], 1.0, 3).unwrap();
        let grid = build_grid(d.y(), 2, GridStrategy::EqualMass).unwrap();
        let fit = fit_varying_thresholds(&d, &grid, Link::Logit, &Fitter::Ml).unwrap();
        assert_eq!(fit.models.len(), 1);
        let y01 = binarize(d.y(), grid.interior()[0]);
        let direct = fit_irls(d.x(), &y01, Link::Logit).unwrap();
        assert_eq!(fit.models[0].as_binary().unwrap(), &direct);
    }

    #[test]
    fn single_class_threshold_is_reported() {
        // a grid whose top threshold exceeds every response in a subset,
        // as happens when bootstrap resamples reuse the full-data grid
        let mut y = vec![0.0; 30];
        y[29] = 100.0;
        let mut rng = Rng::new(1);
        for v in y.iter_mut().take(29) {
            *v = rng.next_f64();
        }
        let d = {
            let rows: Vec<Vec<f64>> = (0..30).map(|_| vec![rng.normal()]).collect();
            crate::data::Dataset::new(
                y.clone(),
                crate::linalg::Matrix::from_rows(&rows),
                vec!["x1".into()],
            )
            .unwrap()
        };
        let grid = build_grid(d.y(), 4, GridStrategy::EqualSpacing).unwrap();
        let without_top: Vec<usize> = (0..29).collect();
        let subset = d.select(&without_top);
        let err = fit_varying_thresholds(&subset, &grid, Link::Logit, &Fitter::Ml).unwrap_err();
        match err {
            Error::SingleClassAtThreshold { theta } => assert!(theta > 25.0),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn recovers_simulation_coefficients_over_central_thresholds() {
        let d = simulate_linear(1000, 1.0, &[0.5, 1.0], 1.0, 42).unwrap();
        let grid = build_grid(d.y(), 20, GridStrategy::EqualMass).unwrap();
        let fit = fit_varying_thresholds(&d, &grid, Link::Probit, &Fitter::Ml).unwrap();
        let curves = fit.coefficient_curves().unwrap();
        let t = curves.thetas.len();
        let skip = t / 10;
        for (j, truth) in [0.5, 1.0].iter().enumerate() {
            let vals = &curves.estimates[j + 1][skip..t - skip];
            let dev: f64 =
                vals.iter().map(|v| math::abs(v - truth)).sum::<f64>() / vals.len() as f64;
            assert!(dev < 0.15, "coef {j}: mean abs deviation {dev}");
        }
    }

    #[test]
    fn small_sample_coefficients_stay_near_truth() {
        // n = 100 version: noisier, but the central thresholds still track
        // the generating coefficients
        let d = simulate_linear(100, 1.0, &[0.5, 1.0], 1.0, 5).unwrap();
        let grid = build_grid(d.y(), 10, GridStrategy::EqualMass).unwrap();
        let fit = fit_varying_thresholds(&d, &grid, Link::Probit, &Fitter::Ml).unwrap();
        let curves = fit.coefficient_curves().unwrap();
        let t = curves.thetas.len();
        let skip = t / 10;
        for (j, truth) in [0.5, 1.0].iter().enumerate() {
            let vals = &curves.estimates[j + 1][skip..t - skip];
            let dev: f64 =
                vals.iter().map(|v| math::abs(v - truth)).sum::<f64>() / vals.len() as f64;
            assert!(dev < 0.35, "coef {j}: mean abs deviation {dev}");
        }
    }

    #[test]
    fn pure_leaf_forests_produce_finite_predictors() {
        // a pure-class tree emits probability exactly 0 or 1, which must be
        // clamped before link inversion
        let rows: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64]).collect();
        let y01 = vec![1u8; 20];
        let params = crate::forest::ForestParams {
            n_trees: 3,
            seed: 1,
            ..Default::default()
        };
        let forest = crate::forest::fit_forest(
            &crate::linalg::Matrix::from_rows(&rows),
            &y01,
            &params,
        )
        .unwrap();
        assert_eq!(forest.prob(&[5.0]).unwrap(), 1.0);
        let model = ThresholdModel::Forest(forest);
        for link in [Link::Logit, Link::Probit] {
            let eta = model.eta(&[5.0], link).unwrap();
            assert!(eta.is_finite());
            assert!((eta - link.quantile(1.0 - 1e-6)).abs() < 1e-12);
        }
    }

    #[test]
    fn forest_fitter_yields_monotone_cdfs_end_to_end() {
        let d = simulate_linear(250, 0.5, &[1.0, -0.7], 1.0, 12).unwrap();
        let grid = build_grid(d.y(), 8, GridStrategy::EqualMass).unwrap();
        let params = crate::forest::ForestParams {
            n_trees: 30,
            seed: 3,
            ..Default::default()
        };
        let fit =
            fit_varying_thresholds(&d, &grid, Link::Logit, &Fitter::Forest(params)).unwrap();
        let mut rng = Rng::new(44);
        for _ in 0..20 {
            let x = [rng.normal() * 2.0, rng.normal() * 2.0];
            match conditional_cdf(&fit, &x).unwrap() {
                ConditionalCdf::PiecewiseLinear { probs, .. } => {
                    assert_eq!(probs[0], 0.0);
                    assert_eq!(*probs.last().unwrap(), 1.0);
                    for w in probs.windows(2) {
                        assert!(w[1] >= w[0] - 1e-14);
                    }
                }
                _ => panic!("continuous grid must yield piecewise-linear"),
            }
        }
        // identical refit: per-threshold forest substreams are seed-derived
        let again =
            fit_varying_thresholds(&d, &grid, Link::Logit, &fit.fitter).unwrap();
        assert_eq!(fit, again);
    }

    #[test]
    fn intercept_sequence_is_affine_in_theta() {
        let d = simulate_linear(1000, 1.0, &[0.5, 1.0], 1.0, 7).unwrap();
        let grid = build_grid(d.y(), 20, GridStrategy::EqualMass).unwrap();
        let fit = fit_varying_thresholds(&d, &grid, Link::Probit, &Fitter::Ml).unwrap();
        let curves = fit.coefficient_curves().unwrap();
        let t = curves.thetas.len();
        let skip = t / 10;
        let xs = &curves.thetas[skip..t - skip];
        let ys = &curves.estimates[0][skip..t - skip];
        let x = crate::linalg::Matrix::from_rows(
            &xs.iter().map(|&v| vec![v]).collect::<Vec<_>>(),
        );
        let (_, coefs, rss) = ols(&x, ys).unwrap();
        let mean = ys.iter().sum::<f64>() / ys.len() as f64;
        let tss: f64 = ys.iter().map(|v| (v - mean) * (v - mean)).sum();
        let r2 = 1.0 - rss / tss;
        assert!(r2 > 0.98, "R^2 {r2}");
        assert!((coefs[0] + 1.0).abs() < 0.15, "slope {}", coefs[0]);
    }

    #[test]
    fn ordinal_fit_recovers_constant_coefficients() {
        // proportional-odds data: latent logistic with fixed cutpoints
        let n = 1500;
        let beta_true = [0.8, -0.5];
        let cuts = [-1.2, -0.4, 0.4, 1.2];
        let mut rng = Rng::new(321);
        let mut rows = Vec::with_capacity(n);
        let mut y = Vec::with_capacity(n);
        for _ in 0..n {
            let row = vec![rng.normal(), rng.normal()];
            let latent = 0.8 * row[0] - 0.5 * row[1]
                + Link::Logit.quantile(rng.next_f64().clamp(1e-12, 1.0 - 1e-12));
            let cat = 1 + cuts.iter().filter(|&&c| latent > c).count();
            rows.push(row);
            y.push(cat as f64);
        }
        let d = crate::data::Dataset::new(
            y,
            crate::linalg::Matrix::from_rows(&rows),
            vec!["x1".into(), "x2".into()],
        )
        .unwrap();
        let grid = ordinal_grid(5).unwrap();
        let fit = fit_varying_thresholds(&d, &grid, Link::Logit, &Fitter::Ml).unwrap();
        assert_eq!(fit.models.len(), 4);
        let curves = fit.coefficient_curves().unwrap();
        for (j, truth) in beta_true.iter().enumerate() {
            let dev: f64 = curves.estimates[j + 1]
                .iter()
                .map(|v| math::abs(v - truth))
                .sum::<f64>()
                / 4.0;
            assert!(dev < 0.2, "coef {j} deviation {dev}");
        }
        let cdf = conditional_cdf(&fit, &[0.0, 0.0]).unwrap();
        match &cdf {
            ConditionalCdf::Step { points, cumulative } => {
                assert_eq!(points, &vec![1.0, 2.0, 3.0, 4.0, 5.0]);
                assert_eq!(*cumulative.last().unwrap(), 1.0);
            }
            _ => panic!("ordinal fits produce step distributions"),
        }
        // quantiles return category indices
        let q = cdf.quantile(0.5);
        assert_eq!(q, crate::math::round(q));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn conditional_cdf_is_always_valid(seed in 0u64..200, scale in 0.5f64..50.0) {
            let d = simulate_linear(120, 0.5, &[1.0, -0.8], 1.0, 99).unwrap();
            let grid = build_grid(d.y(), 8, GridStrategy::EqualMass).unwrap();
            let fit = fit_varying_thresholds(&d, &grid, Link::Logit, &Fitter::Ml).unwrap();
            let mut rng = Rng::new(seed);
            // include covariates far outside the training hull
            let x = [rng.normal() * scale, rng.normal() * scale];
            let c = conditional_cdf(&fit, &x).unwrap();
            match &c {
                ConditionalCdf::PiecewiseLinear { thetas, probs } => {
                    prop_assert_eq!(probs[0], 0.0);
                    prop_assert_eq!(*probs.last().unwrap(), 1.0);
                    prop_assert_eq!(thetas.len(), probs.len());
                    for w in probs.windows(2) {
                        prop_assert!(w[1] >= w[0] - 1e-14);
                        prop_assert!((0.0..=1.0).contains(&w[1]));
                    }
                }
                _ => prop_assert!(false, "continuous grid must yield piecewise-linear"),
            }
            // quantile / eval consistency
            for alpha in [0.05, 0.3, 0.5, 0.77, 0.95] {
                let q = c.quantile(alpha);
                prop_assert!(c.eval(q) >= alpha - 1e-9);
            }
        }

        #[test]
        fn rps_is_nonnegative(y in -20.0f64..20.0) {
            let c = toy_cdf();
            prop_assert!(c.rps(y) >= 0.0);
        }
    }
}
