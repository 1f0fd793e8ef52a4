//! Small dense row-major matrices and the handful of operations the
//! equilibrium analysis needs.

use std::ops::{Index, IndexMut};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::{Error, Result, Scalar};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(Error::DimensionMismatch { expected: c, found: row.len() });
            }
            data.extend_from_slice(row);
        }
        Ok(Self { rows: r, cols: c, data })
    }

    pub fn diag(d: &[T]) -> Self {
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

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn mul_vec(&self, v: &[T]) -> Result<Vec<T>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch { expected: self.cols, found: v.len() });
        }
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(&a, &b)| a * b).sum())
            .collect())
    }

    fn zip_with(&self, other: &Self, f: impl Fn(T, T) -> T) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                expected: self.rows * self.cols,
                found: other.rows * other.cols,
            });
        }
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect();
        Ok(Self { rows: self.rows, cols: self.cols, data })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    /// `Diag(d) * self`.
    pub fn scale_rows(&self, d: &[T]) -> Result<Self> {
        if d.len() != self.rows {
            return Err(Error::DimensionMismatch { expected: self.rows, found: d.len() });
        }
        let mut out = self.clone();
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(i, j)] = out[(i, j)] * d[i];
            }
        }
        Ok(out)
    }

    pub fn abs(&self) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|v| v.abs()).collect() }
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// Solves `self * x = b` by Gaussian elimination with partial pivoting
    /// followed by one step of iterative refinement.
    pub fn solve(&self, b: &[T]) -> Result<Vec<T>> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch { expected: self.rows, found: self.cols });
        }
        if b.len() != self.rows {
            return Err(Error::DimensionMismatch { expected: self.rows, found: b.len() });
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = self.max_abs().max(T::min_positive_value());
        let tiny = scale * T::epsilon() * T::lit(n.max(1) as f64);
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&i, &j| a[(i, col)].abs().partial_cmp(&a[(j, col)].abs()).unwrap())
                .unwrap();
            if !(a[(pivot, col)].abs() > tiny) {
                return Err(Error::Singular);
            }
            if pivot != col {
                for j in 0..n {
                    a.data.swap(pivot * n + j, col * n + j);
                }
                perm.swap(pivot, col);
            }
            for i in col + 1..n {
                let factor = a[(i, col)] / a[(col, col)];
                a[(i, col)] = factor;
                for j in col + 1..n {
                    let v = a[(col, j)];
                    a[(i, j)] = a[(i, j)] - factor * v;
                }
            }
        }
        let lu_solve = |rhs: &[T]| -> Vec<T> {
            let mut y: Vec<T> = perm.iter().map(|&p| rhs[p]).collect();
            for i in 0..n {
                for j in 0..i {
                    y[i] = y[i] - a[(i, j)] * y[j];
                }
            }
            for i in (0..n).rev() {
                for j in i + 1..n {
                    y[i] = y[i] - a[(i, j)] * y[j];
                }
                y[i] = y[i] / a[(i, i)];
            }
            y
        };
        let mut x = lu_solve(b);
        let ax = self.mul_vec(&x)?;
        let residual: Vec<T> = b.iter().zip(&ax).map(|(&bi, &ai)| bi - ai).collect();
        let dx = lu_solve(&residual);
        for (xi, d) in x.iter_mut().zip(dx) {
            *xi = *xi + d;
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Singular);
        }
        Ok(x)
    }

    /// Largest eigenvalue modulus, from the real Schur form computed in
    /// double precision.
    pub fn spectral_radius(&self) -> Result<T> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch { expected: self.rows, found: self.cols });
        }
        if self.rows == 0 {
            return Ok(T::zero());
        }
        let m = DMatrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)].as_f64());
        let schur = nalgebra::linalg::Schur::try_new(m, 1e-14, 100_000)
            .ok_or(Error::EigenNoConvergence)?;
        let rho = schur.complex_eigenvalues().iter().fold(0.0f64, |acc, z| acc.max(z.norm()));
        Ok(T::lit(rho))
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;

    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

pub fn inf_norm<T: Scalar>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |m, x| m.max(x.abs()))
}

pub fn inf_dist<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |m, (&x, &y)| m.max((x - y).abs()))
}
