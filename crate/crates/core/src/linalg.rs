//! Dense LU factorization with partial pivoting, sized for the Nystrom and
//! Newton systems in this crate (a few hundred unknowns).

use crate::error::{Error, Result};

/// Row-major dense matrix.
#[derive(Debug, Clone)]
pub struct Matrix {
    pub n: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Matrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|i| self.data[i * self.n..(i + 1) * self.n].iter().map(|x| x.abs()).sum())
            .fold(0.0, f64::max)
    }
}

/// LU factors of a matrix, plus the pivot permutation.
pub struct Lu {
    n: usize,
    lu: Vec<f64>,
    piv: Vec<usize>,
    norm_a: f64,
}

impl Lu {
    pub fn factor(a: &Matrix) -> Result<Lu> {
        let n = a.n;
        let norm_a = a.norm_inf();
        let mut lu = a.data.clone();
        let mut piv: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let mut p = k;
            let mut max = lu[k * n + k].abs();
            for i in k + 1..n {
                let v = lu[i * n + k].abs();
                if v > max {
                    max = v;
                    p = i;
                }
            }
            if max == 0.0 {
                return Err(Error::NearSingular { cond: f64::INFINITY });
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                piv.swap(k, p);
            }
            let pivot = lu[k * n + k];
            for i in k + 1..n {
                let f = lu[i * n + k] / pivot;
                lu[i * n + k] = f;
                for j in k + 1..n {
                    lu[i * n + j] -= f * lu[k * n + j];
                }
            }
        }
        Ok(Lu { n, lu, piv, norm_a })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x: Vec<f64> = self.piv.iter().map(|&p| b[p]).collect();
        for i in 1..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s / self.lu[i * n + i];
        }
        x
    }

    fn solve_transpose(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x = b.to_vec();
        // U^T y = b (forward)
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[j * n + i] * x[j];
            }
            x[i] = s / self.lu[i * n + i];
        }
        // L^T z = y (backward)
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.lu[j * n + i] * x[j];
            }
            x[i] = s;
        }
        let mut out = vec![0.0; n];
        for (k, &p) in self.piv.iter().enumerate() {
            out[p] = x[k];
        }
        out
    }

    /// Hager-style estimate of the infinity-norm condition number.
    pub fn cond_estimate(&self) -> f64 {
        let n = self.n;
        // One-step power estimate of ||A^-1||_1 via A^T solves.
        let mut v = self.solve(&vec![1.0 / n as f64; n]);
        let mut est = v.iter().map(|x| x.abs()).sum::<f64>();
        for _ in 0..3 {
            let xi: Vec<f64> = v.iter().map(|x| x.signum()).collect();
            let z = self.solve_transpose(&xi);
            let (jmax, zmax) = z
                .iter()
                .enumerate()
                .fold((0, 0.0), |(jm, zm), (j, &zj)| {
                    if zj.abs() > zm { (j, zj.abs()) } else { (jm, zm) }
                });
            if zmax <= z.iter().zip(&v).map(|(zj, vj)| zj * vj.signum()).sum::<f64>() {
                break;
            }
            let mut e = vec![0.0; n];
            e[jmax] = 1.0;
            v = self.solve(&e);
            let new_est = v.iter().map(|x| x.abs()).sum::<f64>();
            if new_est <= est {
                break;
            }
            est = new_est;
        }
        est * self.norm_a
    }
}

/// Solve A x = b, rejecting near-singular systems.
pub fn solve_checked(a: &Matrix, b: &[f64], cond_limit: f64) -> Result<Vec<f64>> {
    let lu = Lu::factor(a)?;
    let cond = lu.cond_estimate();
    if !cond.is_finite() || cond > cond_limit {
        return Err(Error::NearSingular { cond });
    }
    Ok(lu.solve(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn solves_small_system() {
        let mut a = Matrix::zeros(3);
        let rows = [[2.0, 1.0, 0.0], [1.0, 3.0, 1.0], [0.0, 1.0, 4.0]];
        for (i, r) in rows.iter().enumerate() {
            for (j, &v) in r.iter().enumerate() {
                a.set(i, j, v);
            }
        }
        let x = solve_checked(&a, &[3.0, 5.0, 5.0], 1e12).unwrap();
        // residual check
        for i in 0..3 {
            let r: f64 = (0..3).map(|j| rows[i][j] * x[j]).sum();
            assert_relative_eq!(r, [3.0, 5.0, 5.0][i], epsilon = 1e-12);
        }
    }

    #[test]
    fn rejects_singular() {
        let mut a = Matrix::zeros(2);
        a.set(0, 0, 1.0);
        a.set(0, 1, 2.0);
        a.set(1, 0, 2.0);
        a.set(1, 1, 4.0);
        assert!(solve_checked(&a, &[1.0, 2.0], 1e12).is_err());
    }

    #[test]
    fn cond_estimate_identity() {
        let mut a = Matrix::zeros(4);
        for i in 0..4 {
            a.set(i, i, 1.0);
        }
        let lu = Lu::factor(&a).unwrap();
        assert_relative_eq!(lu.cond_estimate(), 1.0, max_relative = 1e-12);
    }
}
