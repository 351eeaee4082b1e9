//! Small dense matrices and rank-3 arrays over any [`Scalar`].
//!
//! Dimensions here are chart dimensions (at most a handful), so everything
//! is row-major `Vec` storage with straightforward loops.

use std::ops::{Index, IndexMut};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{Real, Scalar};

#[derive(Debug, Clone, PartialEq, Serialize)]
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

    /// Builds from row-major data; panics if the length does not match.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<S>) -> Self {
        assert_eq!(data.len(), rows * cols, "row-major data length");
        Mat { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<S>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        Self::from_fn(r, c, |i, j| rows[i][j])
    }

    pub fn diagonal(d: &[S]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, &v) in d.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[S] {
        &self.data
    }

    pub fn row(&self, i: usize) -> Vec<S> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn col(&self, j: usize) -> Vec<S> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn map<R: Scalar>(&self, f: impl Fn(S) -> R) -> Mat<R> {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &Mat<S>) -> Self {
        assert_eq!(self.cols, other.rows, "matmul inner dimensions");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                for j in 0..other.cols {
                    out[(i, j)] = out[(i, j)] + a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[S]) -> Vec<S> {
        assert_eq!(self.cols, v.len(), "matvec dimensions");
        (0..self.rows)
            .map(|i| (0..self.cols).fold(S::zero(), |acc, j| acc + self[(i, j)] * v[j]))
            .collect()
    }

    pub fn add(&self, other: &Mat<S>) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Mat<S>) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| a - b).collect(),
        }
    }

    pub fn scale(&self, s: S) -> Self {
        self.map(|v| v * s)
    }

    pub fn trace(&self) -> S {
        (0..self.rows.min(self.cols)).fold(S::zero(), |acc, i| acc + self[(i, i)])
    }

    /// `self^k` for a square matrix, `k >= 0`.
    pub fn pow(&self, k: u32) -> Self {
        assert!(self.is_square());
        let mut out = Self::identity(self.rows);
        for _ in 0..k {
            out = out.matmul(self);
        }
        out
    }

    /// Inverse by Gauss-Jordan elimination, pivoting on the primal values.
    pub fn inverse(&self) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::arg("inverse of a non-square matrix"));
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        let tiny = S::Real::EPSILON * S::Real::lit(16.0);
        let scale = self.data.iter().fold(S::Real::lit(0.0), |m, v| m.max_of(v.re().abs()));
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&i, &j| {
                    a[(i, col)]
                        .re()
                        .abs()
                        .partial_cmp(&a[(j, col)].re().abs())
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
                .unwrap_or(col);
            if !(a[(pivot, col)].re().abs() > tiny * scale) {
                return Err(Error::Singular("matrix inverse".into()));
            }
            if pivot != col {
                a.swap_rows(pivot, col);
                inv.swap_rows(pivot, col);
            }
            let p = a[(col, col)];
            for j in 0..n {
                a[(col, j)] = a[(col, j)] / p;
                inv[(col, j)] = inv[(col, j)] / p;
            }
            for i in 0..n {
                if i == col {
                    continue;
                }
                let f = a[(i, col)];
                for j in 0..n {
                    a[(i, j)] = a[(i, j)] - f * a[(col, j)];
                    inv[(i, j)] = inv[(i, j)] - f * inv[(col, j)];
                }
            }
        }
        Ok(inv)
    }

    /// Lower-triangular `L` with `self = L Lᵀ`; `None` unless positive definite.
    pub fn cholesky(&self) -> Option<Self> {
        if !self.is_square() {
            return None;
        }
        let n = self.rows;
        let mut l = Self::zeros(n, n);
        for j in 0..n {
            let mut d = self[(j, j)];
            for k in 0..j {
                d = d - l[(j, k)] * l[(j, k)];
            }
            if !(d.re() > S::Real::lit(0.0)) {
                return None;
            }
            let djj = d.sqrt();
            l[(j, j)] = djj;
            for i in j + 1..n {
                let mut s = self[(i, j)];
                for k in 0..j {
                    s = s - l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / djj;
            }
        }
        Some(l)
    }

    /// Inverse of a lower-triangular matrix by forward substitution.
    pub fn lower_triangular_inverse(&self) -> Result<Self> {
        let n = self.rows;
        let mut inv = Self::zeros(n, n);
        for j in 0..n {
            for i in j..n {
                let mut s = if i == j { S::one() } else { S::zero() };
                for k in j..i {
                    s = s - self[(i, k)] * inv[(k, j)];
                }
                let d = self[(i, i)];
                if d.re() == S::Real::lit(0.0) {
                    return Err(Error::Singular("triangular inverse".into()));
                }
                inv[(i, j)] = s / d;
            }
        }
        Ok(inv)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }
}

impl<T: Real> Mat<T> {
    /// Largest absolute entry.
    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::lit(0.0), |m, v| m.max_of(v.abs()))
    }

    /// Largest absolute entrywise difference.
    pub fn max_abs_diff(&self, other: &Mat<T>) -> T {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .fold(T::lit(0.0), |m, (&a, &b)| m.max_of((a - b).abs()))
    }

    pub fn to_f64(&self) -> Mat<f64> {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v.to_f64_lossy()).collect(),
        }
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i)).collect()
    }
}

impl<S> Index<(usize, usize)> for Mat<S> {
    type Output = S;
    fn index(&self, (i, j): (usize, usize)) -> &S {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<S> IndexMut<(usize, usize)> for Mat<S> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut S {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

/// Dense rank-3 array, row-major in `(i, j, k)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tensor3<S> {
    dims: [usize; 3],
    data: Vec<S>,
}

impl<S: Scalar> Tensor3<S> {
    pub fn zeros(d0: usize, d1: usize, d2: usize) -> Self {
        Tensor3 {
            dims: [d0, d1, d2],
            data: vec![S::zero(); d0 * d1 * d2],
        }
    }

    pub fn from_fn(d0: usize, d1: usize, d2: usize, mut f: impl FnMut(usize, usize, usize) -> S) -> Self {
        let mut data = Vec::with_capacity(d0 * d1 * d2);
        for i in 0..d0 {
            for j in 0..d1 {
                for k in 0..d2 {
                    data.push(f(i, j, k));
                }
            }
        }
        Tensor3 {
            dims: [d0, d1, d2],
            data,
        }
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn as_slice(&self) -> &[S] {
        &self.data
    }

    /// The matrix obtained by fixing the first index.
    pub fn slice0(&self, i: usize) -> Mat<S> {
        let [_, d1, d2] = self.dims;
        Mat::from_fn(d1, d2, |j, k| self[(i, j, k)])
    }
}

impl<T: Real> Tensor3<T> {
    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::lit(0.0), |m, v| m.max_of(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &Tensor3<T>) -> T {
        assert_eq!(self.dims, other.dims);
        self.data
            .iter()
            .zip(&other.data)
            .fold(T::lit(0.0), |m, (&a, &b)| m.max_of((a - b).abs()))
    }
}

impl<S> Index<(usize, usize, usize)> for Tensor3<S> {
    type Output = S;
    fn index(&self, (i, j, k): (usize, usize, usize)) -> &S {
        let [_, d1, d2] = self.dims;
        &self.data[(i * d1 + j) * d2 + k]
    }
}

impl<S> IndexMut<(usize, usize, usize)> for Tensor3<S> {
    fn index_mut(&mut self, (i, j, k): (usize, usize, usize)) -> &mut S {
        let [_, d1, d2] = self.dims;
        &mut self.data[(i * d1 + j) * d2 + k]
    }
}

pub fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter().zip(b).fold(S::zero(), |acc, (&x, &y)| acc + x * y)
}

/// Inner product `aᵀ M b`.
pub fn inner<S: Scalar>(m: &Mat<S>, a: &[S], b: &[S]) -> S {
    dot(a, &m.matvec(b))
}

pub fn norm2<T: Real>(v: &[T]) -> T {
    dot(v, v).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_round_trip() {
        let a = Mat::from_rows(&[vec![4.0, 1.0, 0.5], vec![1.0, 3.0, 0.2], vec![0.5, 0.2, 2.0]]);
        let inv = a.inverse().unwrap();
        assert!(a.matmul(&inv).max_abs_diff(&Mat::identity(3)) < 1e-14);
    }

    #[test]
    fn singular_inverse_is_an_error() {
        let a = Mat::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]);
        assert!(matches!(a.inverse(), Err(Error::Singular(_))));
    }

    #[test]
    fn cholesky_reconstructs() {
        let a = Mat::from_rows(&[vec![4.0, 2.0], vec![2.0, 5.0]]);
        let l = a.cholesky().unwrap();
        assert!(l.matmul(&l.transpose()).max_abs_diff(&a) < 1e-14);
        let li = l.lower_triangular_inverse().unwrap();
        assert!(li.matmul(&l).max_abs_diff(&Mat::identity(2)) < 1e-14);
        let indefinite = Mat::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]);
        assert!(indefinite.cholesky().is_none());
    }

    #[test]
    fn power_and_trace() {
        let a = Mat::diagonal(&[2.0, 3.0]);
        assert_eq!(a.pow(3), Mat::diagonal(&[8.0, 27.0]));
        assert_eq!(a.pow(0), Mat::identity(2));
        assert_eq!(a.trace(), 5.0);
    }

    #[test]
    fn tensor3_indexing() {
        let t = Tensor3::from_fn(2, 3, 4, |i, j, k| (100 * i + 10 * j + k) as f64);
        assert_eq!(t[(1, 2, 3)], 123.0);
        assert_eq!(t.slice0(1)[(2, 3)], 123.0);
    }
}
