//! Binary regression fits P(Y=1|x) = F(beta0 + x'beta): maximum likelihood
//! via iteratively reweighted least squares, and L1-penalized coordinate
//! descent for the logit link.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{dot, solve_spd, spd_inverse, Matrix};
use crate::link::Link;
use crate::math;

const MAX_IRLS_ITER: usize = 100;
const SCORE_TOL: f64 = 1e-8;
const LOGLIK_REL_TOL: f64 = 1e-10;
const WEIGHT_FLOOR: f64 = 1e-10;
/// Coefficients beyond this magnitude on standardized data signal
/// quasi-separation; the fit is capped and flagged rather than failed.
const SEPARATION_CAP: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitWarning {
    QuasiSeparation,
    UnstandardizedColumn { index: usize },
}

/// A fitted binary regression model at one threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryFit {
    pub beta0: f64,
    pub beta: Vec<f64>,
    /// Standard errors for (intercept, beta_1..beta_p); absent for lasso fits.
    pub se: Option<Vec<f64>>,
    pub converged: bool,
    pub iterations: usize,
    /// L1 penalty weight; 0 for maximum likelihood fits.
    pub lambda: f64,
    pub loglik: f64,
    pub warnings: Vec<FitWarning>,
}

impl BinaryFit {
    /// Linear predictor beta0 + x'beta.
    pub fn predict_eta(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.beta.len() {
            return Err(Error::DimensionMismatch {
                expected: self.beta.len(),
                got: x.len(),
            });
        }
        Ok(self.beta0 + dot(&self.beta, x))
    }
}

fn check_binary_input(x: &Matrix, y01: &[u8]) -> Result<()> {
    let n = x.rows();
    if y01.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: y01.len(),
        });
    }
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    let ones = y01.iter().filter(|&&v| v == 1).count();
    if ones == 0 || ones == n {
        return Err(Error::SingleClass);
    }
    if n <= x.cols() + 1 {
        return Err(Error::TooFewObservations { n, p: x.cols() });
    }
    Ok(())
}

/// Bernoulli log-likelihood and its score (gradient) with respect to
/// (beta0, beta) under mean F(beta0 + x'beta).
pub fn loglik_and_score(
    x: &Matrix,
    y01: &[u8],
    link: Link,
    beta0: f64,
    beta: &[f64],
) -> (f64, Vec<f64>) {
    let n = x.rows();
    let p = x.cols();
    let mut ll = 0.0;
    let mut score = vec![0.0; p + 1];
    for (i, &yi) in y01.iter().enumerate().take(n) {
        let row = x.row(i);
        let eta = beta0 + dot(beta, row);
        let mu = link.cdf(eta).clamp(1e-300, 1.0 - 1e-16);
        let y = f64::from(yi);
        ll += y * math::ln(mu) + (1.0 - y) * math::ln(1.0 - mu);
        // d loglik / d eta_i
        let s = (y - mu) * link.pdf(eta) / (mu * (1.0 - mu));
        score[0] += s;
        for j in 0..p {
            score[j + 1] += s * row[j];
        }
    }
    (ll, score)
}

fn bernoulli_loglik(x: &Matrix, y01: &[u8], link: Link, beta0: f64, beta: &[f64]) -> f64 {
    let mut ll = 0.0;
    for (i, &yi) in y01.iter().enumerate() {
        let eta = beta0 + dot(beta, x.row(i));
        let mu = link.cdf(eta).clamp(1e-300, 1.0 - 1e-16);
        let y = f64::from(yi);
        ll += y * math::ln(mu) + (1.0 - y) * math::ln(1.0 - mu);
    }
    ll
}

/// Fisher information matrix Z' W Z for the design with intercept column.
fn fisher_information(x: &Matrix, link: Link, beta0: f64, beta: &[f64]) -> Matrix {
    let n = x.rows();
    let p = x.cols();
    let mut info = Matrix::zeros(p + 1, p + 1);
    for i in 0..n {
        let row = x.row(i);
        let eta = beta0 + dot(beta, row);
        let mu = link.cdf(eta).clamp(1e-12, 1.0 - 1e-12);
        let f = link.pdf(eta);
        let w = (f * f / (mu * (1.0 - mu))).max(WEIGHT_FLOOR);
        info.add_at(0, 0, w);
        for a in 0..p {
            info.add_at(0, a + 1, w * row[a]);
            info.add_at(a + 1, 0, w * row[a]);
            for b in 0..p {
                info.add_at(a + 1, b + 1, w * row[a] * row[b]);
            }
        }
    }
    info
}

pub(crate) fn fit_irls_traced(
    x: &Matrix,
    y01: &[u8],
    link: Link,
) -> Result<(BinaryFit, Vec<f64>)> {
    check_binary_input(x, y01)?;
    let p = x.cols();
    let mut beta0 = 0.0;
    let mut beta = vec![0.0; p];
    let mut warnings = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    let (mut ll, mut score) = loglik_and_score(x, y01, link, beta0, &beta);
    let mut trace = vec![ll];

    for iter in 1..=MAX_IRLS_ITER {
        iterations = iter;
        let mut info = fisher_information(x, link, beta0, &beta);
        let mut direction = loop {
            match solve_spd(&info, &score) {
                Ok(d) => break d,
                Err(_) => {
                    let mut tr = 0.0;
                    for i in 0..=p {
                        tr += info.get(i, i);
                    }
                    let ridge = (tr / (p + 1) as f64).max(1e-12) * 1e-8;
                    for i in 0..=p {
                        info.add_at(i, i, ridge);
                    }
                }
            }
        };

        // step-halving keeps the log-likelihood non-decreasing
        let mut accepted = false;
        for _ in 0..40 {
            let cand0 = beta0 + direction[0];
            let cand: Vec<f64> = beta
                .iter()
                .zip(&direction[1..])
                .map(|(b, d)| b + d)
                .collect();
            let cand_ll = bernoulli_loglik(x, y01, link, cand0, &cand);
            if cand_ll.is_finite() && cand_ll >= ll - 1e-12 * (1.0 + math::abs(ll)) {
                beta0 = cand0;
                beta = cand;
                ll = cand_ll;
                accepted = true;
                break;
            }
            direction.iter_mut().for_each(|d| *d *= 0.5);
        }
        trace.push(ll);
        if !accepted {
            break;
        }

        let max_abs = beta
            .iter()
            .chain(core::iter::once(&beta0))
            .fold(0.0f64, |m, b| m.max(math::abs(*b)));
        if max_abs > SEPARATION_CAP {
            beta0 = beta0.clamp(-SEPARATION_CAP, SEPARATION_CAP);
            beta.iter_mut()
                .for_each(|b| *b = b.clamp(-SEPARATION_CAP, SEPARATION_CAP));
            ll = bernoulli_loglik(x, y01, link, beta0, &beta);
            warnings.push(FitWarning::QuasiSeparation);
            converged = true;
            break;
        }

        let prev_ll = trace[trace.len() - 2];
        let (_, new_score) = loglik_and_score(x, y01, link, beta0, &beta);
        score = new_score;
        let max_score = score.iter().fold(0.0f64, |m, s| m.max(math::abs(*s)));
        let ll_settled = math::abs(ll - prev_ll) < LOGLIK_REL_TOL * (1.0 + math::abs(prev_ll));
        // the likelihood-change rule alone can fire while the score is
        // still above the documented 1e-6 optimum bound
        if max_score < SCORE_TOL || (ll_settled && max_score < 1e-6) {
            converged = true;
            break;
        }
    }

    let se = spd_inverse(&fisher_information(x, link, beta0, &beta))
        .ok()
        .map(|cov| (0..=p).map(|i| math::sqrt(cov.get(i, i))).collect());

    Ok((
        BinaryFit {
            beta0,
            beta,
            se,
            converged,
            iterations,
            lambda: 0.0,
            loglik: ll,
            warnings,
        },
        trace,
    ))
}

/// Maximum likelihood fit by Fisher scoring with step-halving.
pub fn fit_irls(x: &Matrix, y01: &[u8], link: Link) -> Result<BinaryFit> {
    fit_irls_traced(x, y01, link).map(|(fit, _)| fit)
}

fn soft_threshold(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

/// L1-penalized logistic regression: minimizes
/// (-1/n) loglik + lambda * sum_j |beta_j| with the intercept unpenalized,
/// by cyclic coordinate descent on the IRLS quadratic approximation.
pub fn fit_lasso(x: &Matrix, y01: &[u8], link: Link, lambda: f64) -> Result<BinaryFit> {
    assert!(lambda >= 0.0, "penalty weight must be nonnegative, got {lambda}");
    if link != Link::Logit {
        return Err(Error::LassoNeedsLogit);
    }
    check_binary_input(x, y01)?;
    let n = x.rows();
    let p = x.cols();
    let nf = n as f64;

    let mut warnings = Vec::new();
    for j in 0..p {
        let col = x.column(j);
        let mean = col.iter().sum::<f64>() / nf;
        let sd = math::sqrt(
            col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (nf - 1.0),
        );
        if math::abs(sd - 1.0) > 1e-6 {
            warnings.push(FitWarning::UnstandardizedColumn { index: j });
        }
    }

    let mut beta0 = 0.0;
    let mut beta = vec![0.0; p];
    let mut converged = false;
    let mut iterations = 0;

    for outer in 1..=100 {
        iterations = outer;
        // quadratic approximation at the current iterate
        let mut w = vec![0.0; n];
        let mut z = vec![0.0; n];
        for i in 0..n {
            let eta = beta0 + dot(&beta, x.row(i));
            let mu = link.cdf(eta);
            let wi = (mu * (1.0 - mu)).max(WEIGHT_FLOOR);
            w[i] = wi;
            z[i] = eta + (f64::from(y01[i]) - mu) / wi;
        }
        let denom: Vec<f64> = (0..p)
            .map(|j| (0..n).map(|i| w[i] * x.get(i, j) * x.get(i, j)).sum::<f64>() / nf)
            .collect();
        let wsum: f64 = w.iter().sum();

        // residual of the working response against the current fit
        let mut res: Vec<f64> = (0..n)
            .map(|i| z[i] - beta0 - dot(&beta, x.row(i)))
            .collect();

        for _ in 0..1000 {
            let mut max_change = 0.0f64;
            let delta0 = (0..n).map(|i| w[i] * res[i]).sum::<f64>() / wsum;
            if delta0.is_finite() && delta0 != 0.0 {
                beta0 += delta0;
                res.iter_mut().for_each(|r| *r -= delta0);
                max_change = max_change.max(math::abs(delta0));
            }
            for j in 0..p {
                let old = beta[j];
                let rho =
                    (0..n).map(|i| w[i] * x.get(i, j) * (res[i] + x.get(i, j) * old)).sum::<f64>()
                        / nf;
                let new = soft_threshold(rho, lambda) / denom[j].max(1e-12);
                if new != old {
                    let diff = new - old;
                    for (i, r) in res.iter_mut().enumerate() {
                        *r -= diff * x.get(i, j);
                    }
                    beta[j] = new;
                    max_change = max_change.max(math::abs(diff));
                }
            }
            if max_change < 1e-11 {
                break;
            }
        }

        // KKT conditions for the exact objective decide convergence
        let (_, score) = loglik_and_score(x, y01, link, beta0, &beta);
        let mut ok = math::abs(score[0] / nf) <= 1e-7;
        for j in 0..p {
            let g = -score[j + 1] / nf;
            let cond = if beta[j] == 0.0 {
                math::abs(g) <= lambda + 1e-7
            } else {
                math::abs(g + lambda * if beta[j] > 0.0 { 1.0 } else { -1.0 }) <= 1e-7
            };
            ok = ok && cond;
        }
        if ok {
            converged = true;
            break;
        }
    }

    let loglik = bernoulli_loglik(x, y01, link, beta0, &beta);
    Ok(BinaryFit {
        beta0,
        beta,
        se: None,
        converged,
        iterations,
        lambda,
        loglik,
        warnings,
    })
}
