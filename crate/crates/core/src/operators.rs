//! Dense vectors and linear maps over the reals with the Euclidean inner
//! product. Everything in the solver is built on these two types.

use std::fmt;
use std::ops::{Index, IndexMut};

use crate::error::{check_dim, Error, Result};

/// A finite-dimensional real vector with finite components.
#[derive(Clone, PartialEq, Default)]
pub struct Vector {
    data: Vec<f64>,
}

impl Vector {
    /// Builds a vector, rejecting NaN and infinite components.
    pub fn new(data: Vec<f64>) -> Result<Self> {
        if data.iter().all(|v| v.is_finite()) {
            Ok(Self { data })
        } else {
            Err(Error::NonFinite("vector"))
        }
    }

    pub fn from_slice(data: &[f64]) -> Result<Self> {
        Self::new(data.to_vec())
    }

    pub fn zeros(dim: usize) -> Self {
        Self { data: vec![0.0; dim] }
    }

    /// The `i`-th standard basis vector.
    pub fn unit(dim: usize, i: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.data[i] = 1.0;
        v
    }

    pub(crate) fn from_vec_unchecked(data: Vec<f64>) -> Self {
        debug_assert!(data.iter().all(|v| v.is_finite()), "non-finite vector");
        Self { data }
    }

    pub fn dim(&self) -> usize {
        self.data.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.data.iter()
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn norm_inf(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scale(&self, t: f64) -> Vector {
        Vector::from_vec_unchecked(self.data.iter().map(|v| v * t).collect())
    }

    pub fn add(&self, other: &Vector) -> Vector {
        self.axpy(1.0, other)
    }

    pub fn sub(&self, other: &Vector) -> Vector {
        self.axpy(-1.0, other)
    }

    /// `self + t * other`.
    pub fn axpy(&self, t: f64, other: &Vector) -> Vector {
        debug_assert_eq!(self.dim(), other.dim());
        Vector::from_vec_unchecked(self.data.iter().zip(&other.data).map(|(a, b)| a + t * b).collect())
    }

    pub fn distance(&self, other: &Vector) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// Unit vector in the same direction, or `None` for the zero vector.
    pub fn normalized(&self) -> Option<Vector> {
        let n = self.norm();
        (n > 0.0).then(|| self.scale(1.0 / n))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| *v == 0.0)
    }

    pub(crate) fn slice(&self, start: usize, len: usize) -> Vector {
        Vector::from_vec_unchecked(self.data[start..start + len].to_vec())
    }
}

impl Index<usize> for Vector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.data[i]
    }
}

impl IndexMut<usize> for Vector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.data[i]
    }
}

impl fmt::Debug for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.data).finish()
    }
}

impl TryFrom<Vec<f64>> for Vector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Vector::new(v)
    }
}

/// Euclidean inner product with dimension checking.
pub fn inner(x: &Vector, y: &Vector) -> Result<f64> {
    check_dim("inner", x.dim(), y.dim())?;
    Ok(x.dot(y))
}

pub fn norm(x: &Vector) -> f64 {
    x.norm()
}

/// Dense row-major matrix acting as a linear map `R^cols -> R^rows`.
#[derive(Clone, PartialEq)]
pub struct LinearMap {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

impl LinearMap {
    /// Builds a map from row vectors. All rows must have the same length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let m = rows.len();
        if m == 0 {
            return Err(Error::InvalidInput("linear map needs at least one row".into()));
        }
        let n = rows[0].len();
        if n == 0 {
            return Err(Error::InvalidInput("linear map needs at least one column".into()));
        }
        let mut entries = Vec::with_capacity(m * n);
        for row in rows {
            check_dim("linear map row", n, row.len())?;
            entries.extend_from_slice(row);
        }
        Self::from_row_major(m, n, entries)
    }

    pub fn from_row_major(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self> {
        check_dim("linear map storage", rows * cols, entries.len())?;
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidInput("linear map dimensions must be positive".into()));
        }
        if !entries.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("linear map"));
        }
        Ok(Self { rows, cols, entries })
    }

    pub fn identity(n: usize) -> Self {
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            entries[i * n + i] = 1.0;
        }
        Self {
            rows: n,
            cols: n,
            entries,
        }
    }

    pub fn diagonal(d: &[f64]) -> Result<Self> {
        let n = d.len();
        let mut entries = vec![0.0; n * n];
        for (i, v) in d.iter().enumerate() {
            entries[i * n + i] = *v;
        }
        Self::from_row_major(n, n, entries)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_major(&self) -> &[f64] {
        &self.entries
    }

    /// Returns `Ax`.
    pub fn apply(&self, x: &Vector) -> Result<Vector> {
        check_dim("apply", self.cols, x.dim())?;
        Ok(self.apply_unchecked(x))
    }

    /// Returns `A*y`, the adjoint (transpose) applied to `y`.
    pub fn adjoint_apply(&self, y: &Vector) -> Result<Vector> {
        check_dim("adjoint_apply", self.rows, y.dim())?;
        Ok(self.adjoint_apply_unchecked(y))
    }

    pub(crate) fn apply_unchecked(&self, x: &Vector) -> Vector {
        let xs = x.as_slice();
        Vector::from_vec_unchecked(
            self.entries
                .chunks_exact(self.cols)
                .map(|row| row.iter().zip(xs).map(|(a, b)| a * b).sum())
                .collect(),
        )
    }

    pub(crate) fn adjoint_apply_unchecked(&self, y: &Vector) -> Vector {
        let mut out = vec![0.0; self.cols];
        for (row, yi) in self.entries.chunks_exact(self.cols).zip(y.iter()) {
            if *yi == 0.0 {
                continue;
            }
            for (o, a) in out.iter_mut().zip(row) {
                *o += a * yi;
            }
        }
        Vector::from_vec_unchecked(out)
    }

    pub fn transpose(&self) -> LinearMap {
        let mut entries = vec![0.0; self.entries.len()];
        for i in 0..self.rows {
            for j in 0..self.cols {
                entries[j * self.rows + i] = self.get(i, j);
            }
        }
        LinearMap {
            rows: self.cols,
            cols: self.rows,
            entries,
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

impl fmt::Debug for LinearMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<&[f64]> = (0..self.rows).map(|i| self.row(i)).collect();
        f.debug_struct("LinearMap")
            .field("rows", &self.rows)
            .field("cols", &self.cols)
            .field("entries", &rows)
            .finish()
    }
}
