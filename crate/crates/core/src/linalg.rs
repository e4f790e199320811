//! Dense LU factorization with partial pivoting and a 1-norm condition
//! estimate (Hager's method).

use crate::error::{Error, Result};

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Matrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        let mut m = Matrix::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), n, "matrix must be square");
            m.data[i * n..(i + 1) * n].copy_from_slice(row);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] += v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    /// Maximum absolute column sum.
    pub fn norm1(&self) -> f64 {
        (0..self.n)
            .map(|j| (0..self.n).map(|i| self.get(i, j).abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `b - A x` with error-free products and compensated sums, so the result
    /// is accurate even when it is far below the rounding level of `A x`.
    pub fn residual(&self, x: &[f64], b: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let mut acc = Neumaier::new(b[i]);
                for (a, x) in self.row(i).iter().zip(x) {
                    let p = a * x;
                    acc.add(-p);
                    acc.add(-a.mul_add(*x, -p));
                }
                acc.value()
            })
            .collect()
    }
}

struct Neumaier {
    sum: f64,
    carry: f64,
}

impl Neumaier {
    fn new(start: f64) -> Self {
        Neumaier {
            sum: start,
            carry: 0.0,
        }
    }

    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.carry += (self.sum - t) + v;
        } else {
            self.carry += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// `P A = L U` with unit-diagonal `L` stored below the diagonal of `lu`.
#[derive(Debug, Clone)]
pub struct Lu {
    lu: Matrix,
    perm: Vec<usize>,
    norm1: f64,
}

impl Lu {
    pub fn factor(mut a: Matrix) -> Result<Self> {
        let n = a.n;
        let norm1 = a.norm1();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pivot) = (k..n)
                .map(|i| (i, a.get(i, k).abs()))
                .fold(
                    (k, -1.0),
                    |best, cur| if cur.1 > best.1 { cur } else { best },
                );
            if pivot == 0.0 || !pivot.is_finite() {
                return Err(Error::SingularSystem);
            }
            if p != k {
                for j in 0..n {
                    a.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let d = a.get(k, k);
            for i in k + 1..n {
                let f = a.get(i, k) / d;
                if f == 0.0 {
                    continue;
                }
                a.set(i, k, f);
                for j in k + 1..n {
                    let v = a.get(k, j);
                    a.add(i, j, -f * v);
                }
            }
        }
        Ok(Lu { lu: a, perm, norm1 })
    }

    pub fn dim(&self) -> usize {
        self.lu.n
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let row = self.lu.row(i);
            let s: f64 = (0..i).map(|j| row[j] * x[j]).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let row = self.lu.row(i);
            let s: f64 = (i + 1..n).map(|j| row[j] * x[j]).sum();
            x[i] = (x[i] - s) / row[i];
        }
        x
    }

    /// Solves `A^T x = b`.
    pub fn solve_transpose(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        // U^T w = b
        let mut w = b.to_vec();
        for i in 0..n {
            let s: f64 = (0..i).map(|j| self.lu.get(j, i) * w[j]).sum();
            w[i] = (w[i] - s) / self.lu.get(i, i);
        }
        // L^T y = w
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|j| self.lu.get(j, i) * w[j]).sum();
            w[i] -= s;
        }
        let mut x = vec![0.0; n];
        for (k, &p) in self.perm.iter().enumerate() {
            x[p] = w[k];
        }
        x
    }

    /// Estimate of `‖A‖₁ ‖A⁻¹‖₁`. Never overestimates `‖A⁻¹‖₁`, usually exact
    /// or within a small factor.
    pub fn condition_estimate(&self) -> f64 {
        let n = self.dim();
        if n == 0 {
            return 1.0;
        }
        let mut x = vec![1.0 / n as f64; n];
        let mut estimate = 0.0;
        let mut last_j = usize::MAX;
        for _ in 0..5 {
            let y = self.solve(&x);
            estimate = y.iter().map(|v| v.abs()).sum::<f64>();
            let sign: Vec<f64> = y
                .iter()
                .map(|&v| if v >= 0.0 { 1.0 } else { -1.0 })
                .collect();
            let z = self.solve_transpose(&sign);
            let (j, zmax) = z
                .iter()
                .enumerate()
                .map(|(j, v)| (j, v.abs()))
                .fold((0, -1.0), |b, c| if c.1 > b.1 { c } else { b });
            let ztx: f64 = z.iter().zip(&x).map(|(a, b)| a * b).sum();
            if zmax <= ztx || j == last_j {
                break;
            }
            last_j = j;
            x.iter_mut().for_each(|v| *v = 0.0);
            x[j] = 1.0;
        }
        self.norm1 * estimate
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn sample() -> Matrix {
        Matrix::from_rows(&[
            vec![0.0, 2.0, 1.0],
            vec![1.0, -1.0, 4.0],
            vec![3.0, 0.5, -2.0],
        ])
    }

    #[test]
    fn solve_needs_pivoting() {
        let a = sample();
        let lu = Lu::factor(a.clone()).unwrap();
        let x_true = [1.0, -2.0, 0.5];
        let b = a.mul_vec(&x_true);
        let x = lu.solve(&b);
        for (u, v) in x.iter().zip(x_true) {
            assert_relative_eq!(*u, v, epsilon = 1e-14);
        }
    }

    #[test]
    fn transpose_solve() {
        let a = sample();
        let lu = Lu::factor(a.clone()).unwrap();
        let x_true = [0.25, 3.0, -1.0];
        let mut at = Matrix::zeros(3);
        for i in 0..3 {
            for j in 0..3 {
                at.set(i, j, a.get(j, i));
            }
        }
        let x = lu.solve_transpose(&at.mul_vec(&x_true));
        for (u, v) in x.iter().zip(x_true) {
            assert_relative_eq!(*u, v, epsilon = 1e-14);
        }
    }

    #[test]
    fn singular_is_reported() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]);
        assert_eq!(Lu::factor(a).unwrap_err(), Error::SingularSystem);
    }

    #[test]
    fn condition_of_diagonal_is_exact() {
        let a = Matrix::from_rows(&[vec![1e-6, 0.0], vec![0.0, 2.0]]);
        let lu = Lu::factor(a).unwrap();
        assert_relative_eq!(lu.condition_estimate(), 2.0 * 1e6, max_relative = 1e-12);
    }

    #[test]
    fn condition_matches_explicit_inverse() {
        let a = sample();
        let lu = Lu::factor(a.clone()).unwrap();
        let mut inv_norm: f64 = 0.0;
        for j in 0..3 {
            let mut e = vec![0.0; 3];
            e[j] = 1.0;
            inv_norm = inv_norm.max(lu.solve(&e).iter().map(|v| v.abs()).sum());
        }
        let exact = a.norm1() * inv_norm;
        let est = lu.condition_estimate();
        assert!(est <= exact * (1.0 + 1e-12));
        assert!(est >= exact / 3.0);
    }

    #[test]
    fn residual_sees_below_rounding() {
        let a = Matrix::from_rows(&[vec![3.0, -1.0], vec![-1.0, 1.0]]);
        let x = [1.0 + f64::EPSILON, 1.0];
        let r = a.residual(&x, &[2.0, 0.0]);
        assert_eq!(r, vec![-3.0 * f64::EPSILON, f64::EPSILON]);
        assert_eq!(a.residual(&[1.0, 1.0], &[2.0, 0.0]), vec![0.0, 0.0]);
    }
}
