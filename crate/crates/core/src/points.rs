//! Row-major point sets.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// `n` points of dimension `d`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Points<T> {
    data: Vec<T>,
    dim: usize,
}

impl<T: Scalar> Points<T> {
    pub fn new(dim: usize) -> Self {
        Self {
            data: Vec::new(),
            dim,
        }
    }

    pub fn from_flat(dim: usize, data: Vec<T>) -> Result<Self> {
        if dim == 0 && !data.is_empty() {
            return Err(Error::InvalidDesign("zero-dimensional points".into()));
        }
        if dim > 0 && data.len() % dim != 0 {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: data.len() % dim,
            });
        }
        Ok(Self { data, dim })
    }

    pub fn from_rows<R: AsRef<[T]>>(dim: usize, rows: &[R]) -> Result<Self> {
        let mut points = Self::new(dim);
        for row in rows {
            points.push(row.as_ref())?;
        }
        Ok(points)
    }

    pub fn push(&mut self, row: &[T]) -> Result<()> {
        if row.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: row.len(),
            });
        }
        self.data.extend_from_slice(row);
        Ok(())
    }

    pub fn len(&self) -> usize {
        if self.dim == 0 {
            0
        } else {
            self.data.len() / self.dim
        }
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn get(&self, i: usize, k: usize) -> T {
        self.data[i * self.dim + k]
    }

    pub fn set(&mut self, i: usize, k: usize, v: T) {
        self.data[i * self.dim + k] = v;
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[T]> + '_ {
        // chunks_exact rejects a zero chunk size.
        self.data.chunks_exact(self.dim.max(1))
    }

    pub fn as_flat(&self) -> &[T] {
        &self.data
    }

    pub fn column(&self, k: usize) -> Vec<T> {
        self.rows().map(|r| r[k]).collect()
    }

    pub fn cast<U: Scalar>(&self) -> Points<U> {
        Points {
            data: self
                .data
                .iter()
                .map(|&v| U::from_f64(v.as_f64()).unwrap_or_else(U::nan))
                .collect(),
            dim: self.dim,
        }
    }

    /// Index of the first row within `tol` (infinity norm) of `x`.
    pub fn find_within(&self, x: &[T], tol: T) -> Option<usize> {
        self.rows().position(|r| {
            r.iter()
                .zip(x)
                .all(|(&a, &b)| (a - b).abs() <= tol)
        })
    }
}
