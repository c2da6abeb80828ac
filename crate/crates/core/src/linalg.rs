//! Dense row-major matrices and the symmetric positive-definite solves
//! needed by the fitting routines.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length mismatch");
        Matrix { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Matrix { rows: r, cols: c, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn add_at(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] += v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    /// Rows selected (with repetition allowed) into a new matrix.
    pub fn select_rows(&self, idx: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Matrix {
            rows: idx.len(),
            cols: self.cols,
            data,
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        self.data
            .chunks_exact(self.cols)
            .map(|row| dot(row, x))
            .collect()
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Cholesky factor L (lower triangular, A = L L^T) of a symmetric matrix.
/// Fails when A is not (numerically) positive definite.
pub fn cholesky(a: &Matrix) -> Result<Matrix> {
    let n = a.rows();
    assert_eq!(n, a.cols());
    let mut l = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut s = a.get(i, j);
            for k in 0..j {
                s -= l.get(i, k) * l.get(j, k);
            }
            if i == j {
                if s <= 0.0 || !s.is_finite() {
                    return Err(Error::RankDeficient);
                }
                l.set(i, i, math::sqrt(s));
            } else {
                l.set(i, j, s / l.get(j, j));
            }
        }
    }
    Ok(l)
}

/// Solves A x = b given the Cholesky factor of A.
pub fn cholesky_solve(l: &Matrix, b: &[f64]) -> Vec<f64> {
    let n = l.rows();
    debug_assert_eq!(b.len(), n);
    let mut y = b.to_vec();
    for i in 0..n {
        for k in 0..i {
            y[i] -= l.get(i, k) * y[k];
        }
        y[i] /= l.get(i, i);
    }
    for i in (0..n).rev() {
        for k in i + 1..n {
            y[i] -= l.get(k, i) * y[k];
        }
        y[i] /= l.get(i, i);
    }
    y
}

/// Solves the SPD system A x = b.
pub fn solve_spd(a: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    let l = cholesky(a)?;
    Ok(cholesky_solve(&l, b))
}

/// Inverse of an SPD matrix via its Cholesky factor.
pub fn spd_inverse(a: &Matrix) -> Result<Matrix> {
    let n = a.rows();
    let l = cholesky(a)?;
    let mut inv = Matrix::zeros(n, n);
    let mut e = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        let col = cholesky_solve(&l, &e);
        for (i, v) in col.iter().enumerate() {
            inv.set(i, j, *v);
        }
        e[j] = 0.0;
    }
    Ok(inv)
}

/// Ordinary least squares for y ~ [1 | X]; returns (intercept, coefs, rss).
pub fn ols(x: &Matrix, y: &[f64]) -> Result<(f64, Vec<f64>, f64)> {
    let n = x.rows();
    let p = x.cols();
    assert_eq!(y.len(), n);
    let dim = p + 1;
    let mut xtx = Matrix::zeros(dim, dim);
    let mut xty = vec![0.0; dim];
    for (i, &yi) in y.iter().enumerate().take(n) {
        let row = x.row(i);
        xtx.add_at(0, 0, 1.0);
        xty[0] += yi;
        for a in 0..p {
            xtx.add_at(0, a + 1, row[a]);
            xtx.add_at(a + 1, 0, row[a]);
            xty[a + 1] += row[a] * yi;
            for b in 0..p {
                xtx.add_at(a + 1, b + 1, row[a] * row[b]);
            }
        }
    }
    let coef = solve_spd(&xtx, &xty)?;
    let mut rss = 0.0;
    for (i, &yi) in y.iter().enumerate().take(n) {
        let fitted = coef[0] + dot(&coef[1..], x.row(i));
        let r = yi - fitted;
        rss += r * r;
    }
    Ok((coef[0], coef[1..].to_vec(), rss))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cholesky_solves_small_system() {
        let a = Matrix::from_vec(2, 2, vec![4.0, 2.0, 2.0, 3.0]);
        let x = solve_spd(&a, &[8.0, 7.0]).unwrap();
        assert!((x[0] - 1.25).abs() < 1e-12);
        assert!((x[1] - 1.5).abs() < 1e-12);
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = Matrix::from_vec(2, 2, vec![1.0, 2.0, 2.0, 1.0]);
        assert!(cholesky(&a).is_err());
    }

    #[test]
    fn spd_inverse_roundtrip() {
        let a = Matrix::from_vec(3, 3, vec![5.0, 1.0, 0.5, 1.0, 4.0, 0.2, 0.5, 0.2, 3.0]);
        let inv = spd_inverse(&a).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let mut s = 0.0;
                for k in 0..3 {
                    s += a.get(i, k) * inv.get(k, j);
                }
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((s - expect).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn ols_recovers_exact_coefficients() {
        // y = 2 + 3 x1 - x2, no noise
        let rows: alloc::vec::Vec<alloc::vec::Vec<f64>> = (0..20)
            .map(|i| {
                let a = i as f64 * 0.3 - 2.0;
                let b = (i as f64 * 7.0) % 5.0;
                alloc::vec![a, b]
            })
            .collect();
        let x = Matrix::from_rows(&rows);
        let y: alloc::vec::Vec<f64> = rows.iter().map(|r| 2.0 + 3.0 * r[0] - r[1]).collect();
        let (b0, b, rss) = ols(&x, &y).unwrap();
        assert!((b0 - 2.0).abs() < 1e-9);
        assert!((b[0] - 3.0).abs() < 1e-9);
        assert!((b[1] + 1.0).abs() < 1e-9);
        assert!(rss < 1e-16);
    }

    #[test]
    fn ols_reports_rank_deficiency() {
        // second column is a multiple of the first
        let rows: alloc::vec::Vec<alloc::vec::Vec<f64>> =
            (0..10).map(|i| alloc::vec![i as f64, 2.0 * i as f64]).collect();
        let x = Matrix::from_rows(&rows);
        let y: alloc::vec::Vec<f64> = (0..10).map(|i| i as f64).collect();
        assert_eq!(ols(&x, &y).unwrap_err(), Error::RankDeficient);
    }
}
