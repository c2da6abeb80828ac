//! Penalized maximum likelihood for the linear-predictor model with
//! B-spline coefficient functions, plus the mapping between a linear
//! intercept function and the implied classical linear model.
//!
//! The model puts P(Y > y | x) = F(eta(y, x)) with
//! eta(y, x) = sum_j x_j beta_j(y), beta_j(y) = Phi(y)' alpha_j, so the
//! conditional density is -f(eta) * d/dy eta. The log-likelihood therefore
//! contains log(-eta') and diverges whenever the predictor stops being
//! decreasing at a training point, which keeps feasible ascent inside the
//! constraint region.

use alloc::vec;
use alloc::vec::Vec;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linalg::{cholesky, cholesky_solve, dot, ols, spd_inverse, Matrix};
use crate::link::Link;
use crate::math;
use crate::rng::Rng;

pub const SPLINE_DEGREE: usize = 3;
/// Default basis size (ten cubic B-splines).
pub const DEFAULT_BASIS: usize = 10;

/// A clamped cubic B-spline basis over the response range.
#[derive(Debug, Clone, PartialEq)]
pub struct SplineSpec {
    m: usize,
    knots: Vec<f64>,
}

impl SplineSpec {
    /// Basis of `m` cubic B-splines with equally spaced interior knots over
    /// [lo, hi] and coincident boundary knots.
    pub fn new(lo: f64, hi: f64, m: usize) -> Result<Self> {
        if m < SPLINE_DEGREE + 1 {
            return Err(Error::BasisTooSmall(m));
        }
        if !lo.is_finite() || !hi.is_finite() || lo >= hi {
            return Err(Error::DegenerateResponse);
        }
        let mut knots = Vec::with_capacity(m + SPLINE_DEGREE + 1);
        for _ in 0..=SPLINE_DEGREE {
            knots.push(lo);
        }
        let segments = (m - SPLINE_DEGREE) as f64;
        for j in 1..m - SPLINE_DEGREE {
            knots.push(lo + (hi - lo) * j as f64 / segments);
        }
        for _ in 0..=SPLINE_DEGREE {
            knots.push(hi);
        }
        Ok(SplineSpec { m, knots })
    }

    /// Basis over the observed response range.
    pub fn from_response(y: &[f64], m: usize) -> Result<Self> {
        let lo = y.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        SplineSpec::new(lo, hi, m)
    }

    pub fn degree(&self) -> usize {
        SPLINE_DEGREE
    }

    pub fn basis_count(&self) -> usize {
        self.m
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn lo(&self) -> f64 {
        self.knots[0]
    }

    pub fn hi(&self) -> f64 {
        *self.knots.last().unwrap()
    }

    fn check_span(&self, y: f64) -> Result<f64> {
        let (lo, hi) = (self.lo(), self.hi());
        let tol = 1e-9 * (hi - lo);
        if y < lo - tol || y > hi + tol {
            return Err(Error::OutsideSpan { y, lo, hi });
        }
        Ok(y.clamp(lo, hi))
    }

    /// Index s of the knot span [knots[s], knots[s+1]) containing y, with
    /// the right boundary folded into the last span.
    fn span_index(&self, y: f64) -> usize {
        let d = SPLINE_DEGREE;
        if y >= self.knots[self.m] {
            return self.m - 1;
        }
        let mut lo = d;
        let mut hi = self.m;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if y < self.knots[mid] {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        lo
    }

    /// The four nonzero basis values of the given degree at y, returned as
    /// (first basis index, values).
    fn local_basis(&self, y: f64, degree: usize) -> (usize, [f64; SPLINE_DEGREE + 1]) {
        let s = self.span_index(y);
        let mut n = [0.0; SPLINE_DEGREE + 1];
        let mut left = [0.0; SPLINE_DEGREE + 1];
        let mut right = [0.0; SPLINE_DEGREE + 1];
        n[0] = 1.0;
        for j in 1..=degree {
            left[j] = y - self.knots[s + 1 - j];
            right[j] = self.knots[s + j] - y;
            let mut saved = 0.0;
            for r in 0..j {
                let denom = right[r + 1] + left[j - r];
                let temp = if denom != 0.0 { n[r] / denom } else { 0.0 };
                n[r] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            n[j] = saved;
        }
        (s - degree, n)
    }

    /// Cox-de Boor evaluation of all m cubic basis functions at y; the
    /// entries are nonnegative and sum to one.
    pub fn basis(&self, y: f64) -> Result<Vec<f64>> {
        let y = self.check_span(y)?;
        let (first, local) = self.local_basis(y, SPLINE_DEGREE);
        let mut out = vec![0.0; self.m];
        for (t, v) in local.iter().enumerate() {
            out[first + t] = *v;
        }
        Ok(out)
    }

    /// First derivatives of all m cubic basis functions at y; the entries
    /// sum to zero.
    pub fn basis_deriv(&self, y: f64) -> Result<Vec<f64>> {
        let y = self.check_span(y)?;
        let d = SPLINE_DEGREE;
        let (first2, local2) = self.local_basis(y, d - 1);
        // nonzero degree-(d-1) values are N_{first2 .. first2+d-1}
        let lower = |l: usize| -> f64 {
            if l >= first2 && l < first2 + d {
                local2[l - first2]
            } else {
                0.0
            }
        };
        let mut out = vec![0.0; self.m];
        let s = self.span_index(y);
        #[allow(clippy::needless_range_loop)]
        for l in s - d..=s {
            let denom1 = self.knots[l + d] - self.knots[l];
            let denom2 = self.knots[l + d + 1] - self.knots[l + 1];
            let t1 = if denom1 > 0.0 { lower(l) / denom1 } else { 0.0 };
            let t2 = if denom2 > 0.0 { lower(l + 1) / denom2 } else { 0.0 };
            out[l] = d as f64 * (t1 - t2);
        }
        Ok(out)
    }

    /// Greville abscissae; interpolating an affine function at these sites
    /// reproduces it exactly.
    pub fn greville(&self) -> Vec<f64> {
        (0..self.m)
            .map(|l| {
                (1..=SPLINE_DEGREE)
                    .map(|t| self.knots[l + t])
                    .sum::<f64>()
                    / SPLINE_DEGREE as f64
            })
            .collect()
    }
}

/// Constrained penalized maximum likelihood fit: B-spline coefficient
/// matrix for all parameter functions (row 0 is the intercept function).
#[derive(Debug, Clone, PartialEq)]
pub struct PmlFit {
    /// (p+1) x m coefficient matrix.
    pub alpha: Matrix,
    pub lambda: f64,
    pub spec: SplineSpec,
    pub link: Link,
    pub loglik: f64,
    pub penalized_loglik: f64,
    pub converged: bool,
    /// Standard errors are flagged approximate when a monotonicity
    /// constraint is active within 1e-4 at some training point.
    pub se_approx: bool,
    cov: Option<Matrix>,
}

struct Precomputed {
    basis: Matrix,  // n x m
    deriv: Matrix,  // n x m
    x: Matrix,      // n x p
    n: usize,
    p: usize,
    m: usize,
}

fn precompute(d: &Dataset, spec: &SplineSpec) -> Result<Precomputed> {
    let n = d.n();
    let m = spec.basis_count();
    let nudge = 1e-9 * (spec.hi() - spec.lo());
    let mut basis = Matrix::zeros(n, m);
    let mut deriv = Matrix::zeros(n, m);
    for i in 0..n {
        let mut y = d.y()[i];
        // boundary observations move a hair inward for basis evaluation
        if y <= spec.lo() {
            y = spec.lo() + nudge;
        } else if y >= spec.hi() {
            y = spec.hi() - nudge;
        }
        let b = spec.basis(y)?;
        let dv = spec.basis_deriv(y)?;
        for l in 0..m {
            basis.set(i, l, b[l]);
            deriv.set(i, l, dv[l]);
        }
    }
    Ok(Precomputed {
        basis,
        deriv,
        x: d.x().clone(),
        n,
        p: d.p(),
        m,
    })
}

fn eta_pair(pre: &Precomputed, alpha: &Matrix, i: usize) -> (f64, f64) {
    let m = pre.m;
    let mut eta = dot(pre.basis.row(i), alpha.row(0));
    let mut etad = dot(pre.deriv.row(i), alpha.row(0));
    for j in 0..pre.p {
        let xij = pre.x.get(i, j);
        eta += xij * dot(pre.basis.row(i), &alpha.row(j + 1)[..m]);
        etad += xij * dot(pre.deriv.row(i), &alpha.row(j + 1)[..m]);
    }
    (eta, etad)
}

fn roughness(alpha: &Matrix) -> f64 {
    let m = alpha.cols();
    let mut pen = 0.0;
    for j in 1..alpha.rows() {
        for l in 0..m - 1 {
            let diff = alpha.get(j, l + 1) - alpha.get(j, l);
            pen += diff * diff;
        }
    }
    pen
}

fn objective(pre: &Precomputed, alpha: &Matrix, link: Link, lambda: f64, mu: f64) -> f64 {
    let mut ll = 0.0;
    for i in 0..pre.n {
        let (eta, etad) = eta_pair(pre, alpha, i);
        if etad >= 0.0 {
            return f64::NEG_INFINITY;
        }
        ll += link.log_pdf(eta) + (1.0 + mu) * math::ln(-etad);
    }
    ll - lambda * roughness(alpha)
}

/// Gradient (and optionally Hessian) of the barrier objective with respect
/// to vec(alpha) in row-major (j, l) layout.
fn grad_hess(
    pre: &Precomputed,
    alpha: &Matrix,
    link: Link,
    lambda: f64,
    mu: f64,
    want_hess: bool,
) -> (Vec<f64>, Option<Matrix>) {
    let q = (pre.p + 1) * pre.m;
    let mut grad = vec![0.0; q];
    let mut hess = want_hess.then(|| Matrix::zeros(q, q));
    let w = 1.0 + mu;
    let nnz = (pre.p + 1) * (SPLINE_DEGREE + 1);
    let mut bi = Vec::with_capacity(nnz);
    let mut di = Vec::with_capacity(nnz);
    for i in 0..pre.n {
        let (eta, etad) = eta_pair(pre, alpha, i);
        bi.clear();
        di.clear();
        for j in 0..=pre.p {
            let xij = if j == 0 { 1.0 } else { pre.x.get(i, j - 1) };
            for l in 0..pre.m {
                let b = pre.basis.get(i, l);
                if b != 0.0 {
                    bi.push((j * pre.m + l, xij * b));
                }
                let dv = pre.deriv.get(i, l);
                if dv != 0.0 {
                    di.push((j * pre.m + l, xij * dv));
                }
            }
        }
        let g_eta = link.log_pdf_deriv(eta);
        let g_etad = w / etad;
        for &(idx, v) in &bi {
            grad[idx] += g_eta * v;
        }
        for &(idx, v) in &di {
            grad[idx] += g_etad * v;
        }
        if let Some(h) = hess.as_mut() {
            let h_eta = link.log_pdf_second_deriv(eta);
            let h_etad = -w / (etad * etad);
            for &(a, va) in &bi {
                for &(b, vb) in &bi {
                    h.add_at(a, b, h_eta * va * vb);
                }
            }
            for &(a, va) in &di {
                for &(b, vb) in &di {
                    h.add_at(a, b, h_etad * va * vb);
                }
            }
        }
    }
    // difference penalty on the covariate rows only
    for j in 1..=pre.p {
        for l in 0..pre.m {
            let a = alpha.get(j, l);
            let mut g = 0.0;
            if l > 0 {
                g += 2.0 * (a - alpha.get(j, l - 1));
            }
            if l + 1 < pre.m {
                g -= 2.0 * (alpha.get(j, l + 1) - a);
            }
            grad[j * pre.m + l] -= lambda * g;
        }
        if let Some(h) = hess.as_mut() {
            for l in 0..pre.m {
                let idx = j * pre.m + l;
                let diag = if l == 0 || l == pre.m - 1 { 1.0 } else { 2.0 };
                h.add_at(idx, idx, -2.0 * lambda * diag);
                if l + 1 < pre.m {
                    h.add_at(idx, idx + 1, 2.0 * lambda);
                    h.add_at(idx + 1, idx, 2.0 * lambda);
                }
            }
        }
    }
    (grad, hess)
}

/// Log-likelihood of the coefficient matrix: sum of log conditional
/// densities. Returns negative infinity when the predictor fails to be
/// decreasing at some observation (non-positive density).
pub fn loglik(alpha: &Matrix, d: &Dataset, spec: &SplineSpec, link: Link) -> Result<f64> {
    if alpha.rows() != d.p() + 1 || alpha.cols() != spec.basis_count() {
        return Err(Error::DimensionMismatch {
            expected: (d.p() + 1) * spec.basis_count(),
            got: alpha.rows() * alpha.cols(),
        });
    }
    let pre = precompute(d, spec)?;
    Ok(objective(&pre, alpha, link, 0.0, 0.0))
}

/// Penalized log-likelihood l - lambda * roughness and its analytic
/// gradient with respect to vec(alpha), row-major.
pub fn penalized_loglik_and_grad(
    alpha: &Matrix,
    d: &Dataset,
    spec: &SplineSpec,
    link: Link,
    lambda: f64,
) -> Result<(f64, Vec<f64>)> {
    if alpha.rows() != d.p() + 1 || alpha.cols() != spec.basis_count() {
        return Err(Error::DimensionMismatch {
            expected: (d.p() + 1) * spec.basis_count(),
            got: alpha.rows() * alpha.cols(),
        });
    }
    let pre = precompute(d, spec)?;
    let obj = objective(&pre, alpha, link, lambda, 0.0);
    let (grad, _) = grad_hess(&pre, alpha, link, lambda, 0.0, false);
    Ok((obj, grad))
}

/// Strictly feasible starting point: the classical linear fit, with its
/// affine intercept function interpolated through the Greville sites and
/// constant covariate rows. The decreasing affine intercept keeps the
/// predictor derivative negative for every x.
pub fn feasible_init(d: &Dataset, spec: &SplineSpec, link: Link) -> Result<Matrix> {
    let n = d.n();
    let p = d.p();
    if n <= p + 1 {
        return Err(Error::TooFewObservations { n, p });
    }
    let (g0, g, rss) = ols(d.x(), d.y())?;
    let sigma = math::sqrt(rss / (n - p - 1) as f64);
    let scale = (sigma / math::sqrt(link.noise_variance()))
        .max(1e-6 * (spec.hi() - spec.lo()));
    let m = spec.basis_count();
    let mut alpha = Matrix::zeros(p + 1, m);
    for (l, site) in spec.greville().iter().enumerate() {
        alpha.set(0, l, (g0 - site) / scale);
    }
    for (j, gj) in g.iter().enumerate() {
        for l in 0..m {
            alpha.set(j + 1, l, gj / scale);
        }
    }
    Ok(alpha)
}

fn newton_at_mu(
    pre: &Precomputed,
    alpha: &mut Matrix,
    link: Link,
    lambda: f64,
    mu: f64,
    max_iter: usize,
    trace: Option<&mut Vec<f64>>,
) -> bool {
    let q = (pre.p + 1) * pre.m;
    let mut obj = objective(pre, alpha, link, lambda, mu);
    debug_assert!(obj.is_finite(), "infeasible starting point");
    let mut converged = false;
    let mut local_trace = trace;
    if let Some(t) = local_trace.as_mut() {
        t.push(obj);
    }
    for _ in 0..max_iter {
        let (grad, hess) = grad_hess(pre, alpha, link, lambda, mu, true);
        let mut a = hess.unwrap();
        // solve (-H) s = g; escalate a ridge when the Hessian is singular
        for i in 0..q {
            for j in 0..q {
                a.set(i, j, -a.get(i, j));
            }
        }
        let mut ridge = 0.0;
        let factor = loop {
            match cholesky(&a) {
                Ok(l) => break l,
                Err(_) => {
                    let bump = if ridge == 0.0 { 1e-8 } else { ridge * 10.0 };
                    for i in 0..q {
                        a.add_at(i, i, bump - ridge);
                    }
                    ridge = bump;
                    if ridge > 1e12 {
                        return false;
                    }
                }
            }
        };
        let step = cholesky_solve(&factor, &grad);
        let descent: f64 = dot(&grad, &step);
        if !descent.is_finite() {
            break;
        }
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let mut cand = alpha.clone();
            for j in 0..=pre.p {
                for l in 0..pre.m {
                    let idx = j * pre.m + l;
                    cand.set(j, l, alpha.get(j, l) + t * step[idx]);
                }
            }
            let cand_obj = objective(pre, &cand, link, lambda, mu);
            if cand_obj.is_finite() && cand_obj >= obj + 1e-4 * t * descent.max(0.0) {
                *alpha = cand;
                let rel = math::abs(cand_obj - obj) / (1.0 + math::abs(obj));
                obj = cand_obj;
                accepted = true;
                if let Some(tr) = local_trace.as_mut() {
                    tr.push(obj);
                }
                if rel < 1e-9 {
                    converged = true;
                }
                break;
            }
            t *= 0.5;
        }
        if !accepted || converged {
            break;
        }
    }
    converged
}

pub(crate) fn fit_penalized_ml_traced(
    d: &Dataset,
    spec: &SplineSpec,
    lambda: f64,
    link: Link,
    trace: Option<&mut Vec<f64>>,
) -> Result<PmlFit> {
    let pre = precompute(d, spec)?;
    let mut alpha = feasible_init(d, spec, link)?;

    // decreasing-barrier outer loop, then a final polish on the exact
    // penalized likelihood (whose own log(-eta') term keeps iterates
    // feasible)
    let mut mu = 1.0;
    for _ in 0..8 {
        newton_at_mu(&pre, &mut alpha, link, lambda, mu, 50, None);
        mu *= 0.2;
    }
    let converged = newton_at_mu(&pre, &mut alpha, link, lambda, 0.0, 200, trace);

    let mut worst_slack = f64::NEG_INFINITY;
    for i in 0..pre.n {
        let (_, etad) = eta_pair(&pre, &alpha, i);
        worst_slack = worst_slack.max(etad);
    }
    let se_approx = worst_slack > -1e-4;

    let penalized_loglik = objective(&pre, &alpha, link, lambda, 0.0);
    let ll = objective(&pre, &alpha, link, 0.0, 0.0);

    let q = (pre.p + 1) * pre.m;
    let (_, hess) = grad_hess(&pre, &alpha, link, lambda, 0.0, true);
    let cov = hess.and_then(|h| {
        let mut neg = Matrix::zeros(q, q);
        for i in 0..q {
            for j in 0..q {
                neg.set(i, j, -h.get(i, j));
            }
        }
        spd_inverse(&neg).ok()
    });

    Ok(PmlFit {
        alpha,
        lambda,
        spec: spec.clone(),
        link,
        loglik: ll,
        penalized_loglik,
        converged,
        se_approx,
        cov,
    })
}

/// Maximizes l - lambda * sum_j sum_l (alpha_{j,l+1} - alpha_{j,l})^2 over
/// the coefficient matrix, subject to a decreasing predictor at every
/// training observation. The intercept row is not penalized.
pub fn fit_penalized_ml(
    d: &Dataset,
    spec: &SplineSpec,
    lambda: f64,
    link: Link,
) -> Result<PmlFit> {
    assert!(lambda >= 0.0, "penalty weight must be nonnegative, got {lambda}");
    fit_penalized_ml_traced(d, spec, lambda, link, None)
}

/// Picks the penalty weight maximizing held-out log-likelihood under
/// seeded k-fold cross validation; ties break toward the larger lambda.
/// Candidates whose fit fails on some fold are skipped; it is an error
/// for every candidate to fail.
pub fn select_lambda_cv(
    d: &Dataset,
    spec: &SplineSpec,
    link: Link,
    lambdas: &[f64],
    folds: usize,
    seed: u64,
) -> Result<f64> {
    let n = d.n();
    if folds < 2 || folds > n {
        return Err(Error::TooFewFolds(folds));
    }
    if lambdas.is_empty() {
        return Err(Error::AllCandidatesFailed);
    }
    let mut idx: Vec<usize> = (0..n).collect();
    Rng::substream(seed, 0x6376).shuffle(&mut idx);
    let mut best: Option<(f64, f64)> = None;
    for &lambda in lambdas {
        let mut score = 0.0;
        let mut ok = true;
        for f in 0..folds {
            let start = f * n / folds;
            let end = (f + 1) * n / folds;
            let hold = &idx[start..end];
            let train_idx: Vec<usize> = idx[..start].iter().chain(&idx[end..]).cloned().collect();
            let train = d.select(&train_idx);
            let fit = match fit_penalized_ml(&train, spec, lambda, link) {
                Ok(f) => f,
                Err(_) => {
                    ok = false;
                    break;
                }
            };
            let held = d.select(hold);
            score += loglik(&fit.alpha, &held, spec, link)?;
        }
        if !ok {
            continue;
        }
        match best {
            Some((s, l)) if score < s || (score == s && lambda <= l) => {}
            _ => best = Some((score, lambda)),
        }
    }
    best.map(|(_, l)| l).ok_or(Error::AllCandidatesFailed)
}

impl PmlFit {
    /// Rebuilds a fit from serialized parts. The covariance of the
    /// coefficients is not serialized, so standard errors are unavailable
    /// on the result.
    pub fn from_parts(
        alpha: Matrix,
        lambda: f64,
        spec: SplineSpec,
        link: Link,
        loglik: f64,
        penalized_loglik: f64,
        converged: bool,
    ) -> Self {
        PmlFit {
            alpha,
            lambda,
            spec,
            link,
            loglik,
            penalized_loglik,
            converged,
            se_approx: false,
            cov: None,
        }
    }

    pub fn p(&self) -> usize {
        self.alpha.rows() - 1
    }

    /// beta_j evaluated on a response grid (j = 0 is the intercept
    /// function).
    pub fn coef_function(&self, j: usize, y_grid: &[f64]) -> Result<Vec<f64>> {
        if j >= self.alpha.rows() {
            return Err(Error::CoefIndexOutOfRange {
                index: j,
                p: self.p(),
            });
        }
        y_grid
            .iter()
            .map(|&y| Ok(dot(&self.spec.basis(y)?, self.alpha.row(j))))
            .collect()
    }

    /// Pointwise standard errors of beta_j on a grid from the inverse
    /// observed information of the penalized likelihood.
    pub fn coef_function_se(&self, j: usize, y_grid: &[f64]) -> Result<Option<Vec<f64>>> {
        if j >= self.alpha.rows() {
            return Err(Error::CoefIndexOutOfRange {
                index: j,
                p: self.p(),
            });
        }
        let Some(cov) = &self.cov else {
            return Ok(None);
        };
        let m = self.spec.basis_count();
        let mut out = Vec::with_capacity(y_grid.len());
        for &y in y_grid {
            let b = self.spec.basis(y)?;
            let mut v = 0.0;
            for a in 0..m {
                for c in 0..m {
                    v += b[a] * cov.get(j * m + a, j * m + c) * b[c];
                }
            }
            out.push(math::sqrt(v.max(0.0)));
        }
        Ok(Some(out))
    }

    /// Linear predictor eta(y, x).
    pub fn eta(&self, x: &[f64], y: f64) -> Result<f64> {
        if x.len() != self.p() {
            return Err(Error::DimensionMismatch {
                expected: self.p(),
                got: x.len(),
            });
        }
        let b = self.spec.basis(y)?;
        let mut eta = dot(&b, self.alpha.row(0));
        for (j, &xj) in x.iter().enumerate() {
            eta += xj * dot(&b, self.alpha.row(j + 1));
        }
        Ok(eta)
    }

    /// Estimated conditional distribution function 1 - F(eta(y, x)).
    pub fn cdf(&self, x: &[f64], y: f64) -> Result<f64> {
        Ok(1.0 - self.link.cdf(self.eta(x, y)?))
    }
}

/// Maps a varying-thresholds model with linear intercept function
/// alpha0 + slope * y and constant covariate effects onto the implied
/// classical linear model (gamma0, gamma, sigma), where
/// sigma^2 = var_F / slope^2.
pub fn implied_linear_model(
    alpha0: f64,
    slope: f64,
    beta: &[f64],
    link: Link,
) -> Result<(f64, Vec<f64>, f64)> {
    if slope.is_nan() || slope >= 0.0 {
        return Err(Error::NonNegativeSlope(slope));
    }
    let gamma0 = -alpha0 / slope;
    let gamma = beta.iter().map(|b| -b / slope).collect();
    let sigma = math::sqrt(link.noise_variance() / (slope * slope));
    Ok((gamma0, gamma, sigma))
}

/// Extracts (alpha0, slope, beta) from a fitted model by an affine
/// regression of the intercept curve on a dense grid and averaging each
/// covariate curve, then applies the implied-linear-model map. Intended
/// for fits in the large-penalty regime where the covariate functions are
/// constant.
pub fn implied_from_fit(fit: &PmlFit) -> Result<(f64, Vec<f64>, f64)> {
    let grid: Vec<f64> = (0..=200)
        .map(|i| fit.spec.lo() + (fit.spec.hi() - fit.spec.lo()) * i as f64 / 200.0)
        .collect();
    let intercept_curve = fit.coef_function(0, &grid)?;
    let x = Matrix::from_rows(&grid.iter().map(|&v| vec![v]).collect::<Vec<_>>());
    let (alpha0, slope, _) = ols(&x, &intercept_curve)?;
    let mut beta = Vec::with_capacity(fit.p());
    for j in 1..=fit.p() {
        let curve = fit.coef_function(j, &grid)?;
        beta.push(curve.iter().sum::<f64>() / curve.len() as f64);
    }
    implied_linear_model(alpha0, slope[0], &beta, fit.link)
}
