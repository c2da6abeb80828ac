//! Independent oracles for the acceptance suite: a brute-force projection
//! onto the monotone cone, midpoint quadrature for the ranked probability
//! score, a direct simple-regression fit, and a standalone generator for
//! synthetic data. None of these share code with the implementation paths
//! they check.

use vtreg_core::ConditionalCdf;

/// Standalone xorshift-based generator (distinct from the library's).
pub struct Rng {
    state: u64,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng {
            state: seed ^ 0xDEAD_BEEF_CAFE_F00D,
        }
    }

    fn next_u64(&mut self) -> u64 {
        let mut x = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        self.state = x;
        x = (x ^ (x >> 33)).wrapping_mul(0xFF51_AFD7_ED55_8CCD);
        x = (x ^ (x >> 33)).wrapping_mul(0xC4CE_B9FE_1A85_EC53);
        x ^ (x >> 33)
    }

    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn next_index(&mut self, bound: usize) -> usize {
        (self.next_u64() % bound as u64) as usize
    }

    pub fn normal(&mut self) -> f64 {
        let u1 = self.uniform().max(1e-300);
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }
}

/// Least-squares projection onto the non-increasing cone by exhaustive
/// search over block partitions (the optimum is piecewise constant with
/// block means, so the feasible block configuration with minimal squared
/// error is the projection).
pub fn pava_qp_oracle(eta: &[f64]) -> Vec<f64> {
    let n = eta.len();
    assert!((1..=16).contains(&n));
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 0..(1u32 << (n - 1)) {
        let mut fitted = Vec::with_capacity(n);
        let mut start = 0usize;
        let mut prev = f64::INFINITY;
        let mut feasible = true;
        for end in 0..n {
            if end == n - 1 || (mask >> end) & 1 == 1 {
                let mean: f64 =
                    eta[start..=end].iter().sum::<f64>() / (end - start + 1) as f64;
                if mean > prev + 1e-15 {
                    feasible = false;
                    break;
                }
                for _ in start..=end {
                    fitted.push(mean);
                }
                prev = mean;
                start = end + 1;
            }
        }
        if !feasible {
            continue;
        }
        let sse: f64 = fitted
            .iter()
            .zip(eta)
            .map(|(f, e)| (f - e) * (f - e))
            .sum();
        if best.as_ref().map_or(true, |(b, _)| sse < *b) {
            best = Some((sse, fitted));
        }
    }
    best.expect("some partition is feasible").1
}

/// Midpoint-rule integral of (I(y <= t) - F(t))^2 over the knot range,
/// split at the indicator's jump, with step 1e-4.
pub fn rps_quadrature(cdf: &ConditionalCdf, y: f64) -> f64 {
    let (lo, hi) = match cdf {
        ConditionalCdf::PiecewiseLinear { thetas, .. } => (thetas[0], *thetas.last().unwrap()),
        ConditionalCdf::Step { points, .. } => (points[0], *points.last().unwrap()),
    };
    let h = 1e-4;
    let piece = |a: f64, b: f64, indicator: f64| -> f64 {
        if b <= a {
            return 0.0;
        }
        let steps = ((b - a) / h).ceil() as usize;
        let w = (b - a) / steps as f64;
        (0..steps)
            .map(|i| {
                let t = a + (i as f64 + 0.5) * w;
                let d = indicator - cdf.eval(t);
                d * d * w
            })
            .sum()
    };
    let cut = y.clamp(lo, hi);
    piece(lo, cut, 0.0) + piece(cut, hi, 1.0)
}

/// Simple regression of ys on xs: (intercept, slope, R^2), computed from
/// the closed-form normal equations.
pub fn linalg_ols(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let tss: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let rss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - intercept - slope * x;
            r * r
        })
        .sum();
    (intercept, slope, 1.0 - rss / tss)
}
