//! Pool-adjacent-violators projection onto the non-increasing cone.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// A non-increasing sequence together with flags marking which positions
/// were merged into a pooled block (block size > 1).
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneSeq {
    pub values: Vec<f64>,
    pub pooled: Vec<bool>,
}

/// Weighted least-squares projection of `eta` onto the non-increasing cone.
///
/// `weights` defaults to unit weights. The projection is unique and equals
/// the input whenever it is already non-increasing.
pub fn pava_nonincreasing(eta: &[f64], weights: Option<&[f64]>) -> Result<MonotoneSeq> {
    let n = eta.len();
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    if eta.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { place: "eta" });
    }
    let unit = vec![1.0; n];
    let w = match weights {
        Some(w) => {
            if w.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: w.len(),
                });
            }
            if w.iter().any(|&v| v <= 0.0 || !v.is_finite()) {
                return Err(Error::NonPositiveWeight);
            }
            w
        }
        None => &unit,
    };

    // blocks of (weighted sum, weight, count)
    let mut sums: Vec<f64> = Vec::with_capacity(n);
    let mut wts: Vec<f64> = Vec::with_capacity(n);
    let mut counts: Vec<usize> = Vec::with_capacity(n);
    for i in 0..n {
        sums.push(eta[i] * w[i]);
        wts.push(w[i]);
        counts.push(1);
        // merge while the new block mean exceeds the one before it
        while sums.len() > 1 {
            let m = sums.len();
            if sums[m - 1] / wts[m - 1] > sums[m - 2] / wts[m - 2] {
                let (s, ww, c) = (sums.pop().unwrap(), wts.pop().unwrap(), counts.pop().unwrap());
                sums[m - 2] += s;
                wts[m - 2] += ww;
                counts[m - 2] += c;
            } else {
                break;
            }
        }
    }

    let mut values = Vec::with_capacity(n);
    let mut pooled = Vec::with_capacity(n);
    for ((s, ww), c) in sums.iter().zip(&wts).zip(&counts) {
        let mean = s / ww;
        for _ in 0..*c {
            values.push(mean);
            pooled.push(*c > 1);
        }
    }
    Ok(MonotoneSeq { values, pooled })
}

/// Exhaustive oracle for the same projection: enumerates every partition
/// of the index range into consecutive blocks, keeps the feasible
/// block-mean configurations, and returns the one with minimal weighted
/// squared error. Only usable for short inputs; kept for tests and
/// cross-checks of the stack-based implementation.
pub fn pava_oracle(eta: &[f64], weights: Option<&[f64]>) -> Result<Vec<f64>> {
    let n = eta.len();
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    assert!(n <= 16, "oracle is exponential in the input length");
    let unit = vec![1.0; n];
    let w = weights.unwrap_or(&unit);
    let mut best: Option<(f64, Vec<f64>)> = None;
    // bit b of mask set => a block boundary after position b
    for mask in 0..(1u32 << (n - 1)) {
        let mut fitted = Vec::with_capacity(n);
        let mut start = 0;
        let mut prev_mean = f64::INFINITY;
        let mut feasible = true;
        for end in 0..n {
            let boundary = end == n - 1 || (mask >> end) & 1 == 1;
            if boundary {
                let ws: f64 = (start..=end).map(|i| w[i]).sum();
                let mean: f64 = (start..=end).map(|i| w[i] * eta[i]).sum::<f64>() / ws;
                if mean > prev_mean + 1e-15 {
                    feasible = false;
                    break;
                }
                for _ in start..=end {
                    fitted.push(mean);
                }
                prev_mean = mean;
                start = end + 1;
            }
        }
        if !feasible {
            continue;
        }
        let sse: f64 = fitted
            .iter()
            .zip(eta)
            .zip(w)
            .map(|((f, e), wi)| wi * (f - e) * (f - e))
            .sum();
        match &best {
            Some((b, _)) if *b <= sse => {}
            _ => best = Some((sse, fitted)),
        }
    }
    Ok(best.expect("at least one feasible partition exists").1)
}
