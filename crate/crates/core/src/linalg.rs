//! Small dense linear algebra over any [`Scalar`].
//!
//! Matrices here are at most a handful of rows, so everything is plain
//! row-major storage with Gauss-Jordan inversion. Spectral checks that only
//! ever run on `f64` go through nalgebra.

use std::ops::{Index, IndexMut};

use nalgebra::DMatrix;

use crate::dual::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct Mat<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Scalar> Mat<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![S::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = S::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Mat { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<S>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        Self::from_fn(r, c, |i, j| rows[i][j])
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn mul(&self, other: &Mat<S>) -> Mat<S> {
        assert_eq!(self.cols, other.rows, "matrix shape mismatch");
        Mat::from_fn(self.rows, other.cols, |i, j| {
            let mut acc = S::zero();
            for k in 0..self.cols {
                acc += self[(i, k)] * other[(k, j)];
            }
            acc
        })
    }

    pub fn mul_vec(&self, v: &[S]) -> Vec<S> {
        assert_eq!(self.cols, v.len(), "matrix/vector shape mismatch");
        (0..self.rows)
            .map(|i| {
                let mut acc = S::zero();
                for k in 0..self.cols {
                    acc += self[(i, k)] * v[k];
                }
                acc
            })
            .collect()
    }

    pub fn sub(&self, other: &Mat<S>) -> Mat<S> {
        Mat::from_fn(self.rows, self.cols, |i, j| self[(i, j)] - other[(i, j)])
    }

    /// `u^T M v`.
    pub fn bilinear(&self, u: &[S], v: &[S]) -> S {
        let mut acc = S::zero();
        for i in 0..self.rows {
            for j in 0..self.cols {
                acc += u[i] * self[(i, j)] * v[j];
            }
        }
        acc
    }

    /// Gauss-Jordan inverse with partial pivoting on the real part.
    /// Returns `None` when a pivot falls below `1e-300` in magnitude.
    pub fn inverse(&self) -> Option<Mat<S>> {
        assert_eq!(self.rows, self.cols, "inverse of non-square matrix");
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Mat::identity(n);
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&p, &q| {
                    a[(p, col)]
                        .value()
                        .abs()
                        .total_cmp(&a[(q, col)].value().abs())
                })
                .unwrap_or(col);
            if a[(pivot, col)].value().abs() < 1e-300 {
                return None;
            }
            if pivot != col {
                a.swap_rows(pivot, col);
                inv.swap_rows(pivot, col);
            }
            let p = S::one() / a[(col, col)];
            for j in 0..n {
                a[(col, j)] *= p;
                inv[(col, j)] *= p;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a[(r, col)];
                for j in 0..n {
                    let ac = a[(col, j)];
                    let ic = inv[(col, j)];
                    a[(r, j)] -= f * ac;
                    inv[(r, j)] -= f * ic;
                }
            }
        }
        Some(inv)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    /// Real parts only.
    pub fn values(&self) -> Mat<f64> {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(Scalar::value).collect(),
        }
    }
}

impl<S> Index<(usize, usize)> for Mat<S> {
    type Output = S;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &S {
        &self.data[i * self.cols + j]
    }
}

impl<S> IndexMut<(usize, usize)> for Mat<S> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut S {
        &mut self.data[i * self.cols + j]
    }
}

impl Mat<f64> {
    pub fn to_nalgebra(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)])
    }

    /// Eigenvalues of the symmetric part, ascending.
    pub fn symmetric_eigenvalues(&self) -> Vec<f64> {
        let m = self.to_nalgebra();
        let sym = (&m + m.transpose()) * 0.5;
        let mut ev: Vec<f64> = sym.symmetric_eigen().eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// Numerical rank: singular values above `rel_tol` times the largest.
    pub fn rank(&self, rel_tol: f64) -> usize {
        if self.rows == 0 || self.cols == 0 {
            return 0;
        }
        let sv = self.to_nalgebra().singular_values();
        let max = sv.iter().copied().fold(0.0, f64::max);
        if max == 0.0 {
            return 0;
        }
        sv.iter().filter(|&&s| s > rel_tol * max).count()
    }

    pub fn max_abs_diff(&self, other: &Mat<f64>) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl serde::Serialize for Mat<f64> {
    fn serialize<Z: serde::Serializer>(&self, s: Z) -> Result<Z::Ok, Z::Error> {
        let rows: Vec<Vec<f64>> = (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)]).collect())
            .collect();
        rows.serialize(s)
    }
}

pub fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    let mut acc = S::zero();
    for (x, y) in a.iter().zip(b) {
        acc += *x * *y;
    }
    acc
}

pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn scaled(alpha: f64, a: &[f64]) -> Vec<f64> {
    a.iter().map(|x| alpha * x).collect()
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dual::Dual;

    #[test]
    fn inverse_roundtrip() {
        let m = Mat::from_rows(&[
            vec![0.0, 2.0, 1.0],
            vec![1.0, 0.5, -1.0],
            vec![3.0, 0.0, 2.0],
        ]);
        let inv = m.inverse().unwrap();
        let id = m.mul(&inv);
        assert!(id.max_abs_diff(&Mat::identity(3)) < 1e-14);
    }

    #[test]
    fn singular_matrix_has_no_inverse() {
        let m = Mat::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]);
        assert!(m.inverse().is_none());
    }

    #[test]
    fn inverse_derivative_matches_identity() {
        // d(M^-1) = -M^-1 dM M^-1
        let m = Mat::from_fn(2, 2, |i, j| {
            let base = [[2.0, 0.3], [0.3, 1.0]][i][j];
            let tangent = [[1.0, -0.5], [-0.5, 0.25]][i][j];
            Dual::new(base, tangent)
        });
        let inv = m.inverse().unwrap();
        let re = Mat::from_fn(2, 2, |i, j| m[(i, j)].re).inverse().unwrap();
        let dm = Mat::from_fn(2, 2, |i, j| m[(i, j)].eps);
        let expected = re.mul(&dm).mul(&re);
        for i in 0..2 {
            for j in 0..2 {
                assert!((inv[(i, j)].eps + expected[(i, j)]).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn rank_and_eigenvalues() {
        let m = Mat::from_rows(&[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]);
        assert_eq!(m.rank(1e-10), 2);
        assert_eq!(Mat::<f64>::zeros(2, 3).rank(1e-10), 0);
        let s = Mat::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]);
        let ev = s.symmetric_eigenvalues();
        assert!((ev[0] - 1.0).abs() < 1e-14 && (ev[1] - 3.0).abs() < 1e-14);
    }
}
