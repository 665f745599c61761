//! Direct solvers for the two sparse systems the crate needs.

use crate::error::{Error, Result};

/// Solves a tridiagonal system with the Thomas algorithm.
///
/// `lower[i]` multiplies `x[i - 1]` in row `i` (so `lower[0]` is unused), and
/// `upper[i]` multiplies `x[i + 1]` (so the last entry is unused).
pub fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if lower.len() != n || upper.len() != n || rhs.len() != n {
        return Err(Error::Contract("tridiagonal bands must all have the system size".into()));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let scale = diag.iter().map(|d| d.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut pivot = diag[0];
    for i in 0..n {
        if i > 0 {
            pivot = diag[i] - lower[i] * c[i - 1];
        }
        if pivot.abs() <= 1e-14 * scale || !pivot.is_finite() {
            return Err(Error::Conditioning(format!("vanishing pivot {pivot:e} in row {i}")));
        }
        c[i] = upper[i] / pivot;
        d[i] = if i == 0 { rhs[0] / pivot } else { (rhs[i] - lower[i] * d[i - 1]) / pivot };
    }
    let mut x = d;
    for i in (0..n - 1).rev() {
        x[i] -= c[i] * x[i + 1];
    }
    Ok(x)
}

/// Symmetric positive definite banded matrix, lower band stored row by row.
#[derive(Clone, Debug)]
pub struct BandMatrix {
    size: usize,
    bandwidth: usize,
    // entry (i, j) with i - bandwidth <= j <= i lives at i * (bandwidth + 1) + (j + bandwidth - i)
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(size: usize, bandwidth: usize) -> Self {
        Self { size, bandwidth, data: vec![0.0; size * (bandwidth + 1)] }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    fn index(&self, i: usize, j: usize) -> usize {
        debug_assert!(j <= i && i - j <= self.bandwidth);
        i * (self.bandwidth + 1) + (j + self.bandwidth - i)
    }

    /// Adds `value` to entry `(i, j)` of the symmetric matrix.
    #[inline]
    pub fn add(&mut self, i: usize, j: usize, value: f64) {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        let k = self.index(r, c);
        self.data[k] += value;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        if r - c > self.bandwidth {
            0.0
        } else {
            self.data[self.index(r, c)]
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.size).map(|i| self.data[self.index(i, i)]).collect()
    }

    /// Solves `A x = b` by banded Cholesky factorization.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.size;
        let w = self.bandwidth;
        let mut l = self.data.clone();
        for i in 0..n {
            let j0 = i.saturating_sub(w);
            for j in j0..=i {
                let mut sum = l[self.index(i, j)];
                let k0 = j0.max(j.saturating_sub(w));
                for k in k0..j {
                    sum -= l[self.index(i, k)] * l[self.index(j, k)];
                }
                if i == j {
                    if !(sum > 0.0) {
                        return Err(Error::Conditioning(format!(
                            "matrix not positive definite at row {i} (pivot {sum:e})"
                        )));
                    }
                    l[self.index(i, i)] = sum.sqrt();
                } else {
                    l[self.index(i, j)] = sum / l[self.index(j, j)];
                }
            }
        }
        let mut y = b.to_vec();
        for i in 0..n {
            let mut sum = y[i];
            for k in i.saturating_sub(w)..i {
                sum -= l[self.index(i, k)] * y[k];
            }
            y[i] = sum / l[self.index(i, i)];
        }
        for i in (0..n).rev() {
            let mut sum = y[i];
            for k in i + 1..(i + w + 1).min(n) {
                sum -= l[self.index(k, i)] * y[k];
            }
            y[i] = sum / l[self.index(i, i)];
        }
        Ok(y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tridiagonal_matches_dense_elimination() {
        // -x'' = 1 on five interior nodes of [0, 1]
        let n = 5;
        let h = 1.0 / (n + 1) as f64;
        let lower = vec![-1.0 / (h * h); n];
        let upper = vec![-1.0 / (h * h); n];
        let diag = vec![2.0 / (h * h); n];
        let x = solve_tridiagonal(&lower, &diag, &upper, &vec![1.0; n]).unwrap();
        for (i, xi) in x.iter().enumerate() {
            let t = (i + 1) as f64 * h;
            assert!((xi - 0.5 * t * (1.0 - t)).abs() < 1e-12);
        }
    }

    #[test]
    fn tridiagonal_reports_zero_pivot() {
        let r = solve_tridiagonal(&[0.0, 1.0], &[0.0, 1.0], &[1.0, 0.0], &[1.0, 1.0]);
        assert!(matches!(r, Err(Error::Conditioning(_))));
    }

    #[test]
    #[allow(clippy::needless_range_loop)]
    fn banded_cholesky_solves_spd_system() {
        let n = 12;
        let w = 3;
        let mut a = BandMatrix::zeros(n, w);
        let mut dense = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i.saturating_sub(w)..=i {
                let v = if i == j { 10.0 + i as f64 } else { 1.0 / (1.0 + (i + 2 * j) as f64) };
                a.add(i, j, v);
                dense[i][j] = v;
                dense[j][i] = v;
            }
        }
        let x_true: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let b: Vec<f64> = (0..n).map(|i| (0..n).map(|j| dense[i][j] * x_true[j]).sum()).collect();
        let x = a.solve(&b).unwrap();
        for (u, v) in x.iter().zip(&x_true) {
            assert!((u - v).abs() < 1e-12);
        }
        assert_eq!(a.get(0, 5), 0.0);
    }

    #[test]
    fn banded_cholesky_rejects_indefinite() {
        let mut a = BandMatrix::zeros(2, 1);
        a.add(0, 0, 1.0);
        a.add(1, 0, 2.0);
        a.add(1, 1, 1.0);
        assert!(matches!(a.solve(&[1.0, 1.0]), Err(Error::Conditioning(_))));
    }
}
