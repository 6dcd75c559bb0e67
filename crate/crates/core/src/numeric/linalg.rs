//! Dense symmetric positive-definite factorization and solves.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Cap on the diagonal inflation applied while retrying a factorization.
pub const MAX_JITTER: f64 = 1e-2;

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    data: Vec<T>,
    rows: usize,
    cols: usize,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            data: vec![T::zero(); rows * cols],
            rows,
            cols,
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let n = rows.len();
        let cols = rows.first().map_or(0, Vec::len);
        let mut m = Self::zeros(n, cols);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    got: row.len(),
                });
            }
            m.data[i * cols..(i + 1) * cols].copy_from_slice(row);
        }
        Ok(m)
    }

    pub fn n_rows(&self) -> usize {
        self.rows
    }

    pub fn n_cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mul_vec(&self, v: &[T]) -> Result<Vec<T>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                got: v.len(),
            });
        }
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(&a, &b)| a * b).sum())
            .collect())
    }

    pub fn is_symmetric(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
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

/// Lower Cholesky factor `L` with `L L^T = R + (jitter_used - nugget) I`.
#[derive(Debug, Clone, PartialEq)]
pub struct CholeskyFactor<T> {
    lower: Matrix<T>,
    log_det: T,
    jitter_used: T,
}

impl<T: Scalar> CholeskyFactor<T> {
    pub fn lower(&self) -> &Matrix<T> {
        &self.lower
    }

    pub fn dim(&self) -> usize {
        self.lower.rows
    }

    /// `log det` of the factored (jittered) matrix.
    pub fn log_det(&self) -> T {
        self.log_det
    }

    pub fn jitter_used(&self) -> T {
        self.jitter_used
    }

    fn check(&self, len: usize) -> Result<()> {
        if len != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: len,
            });
        }
        Ok(())
    }

    /// Forward substitution: `L^{-1} b`.
    pub fn solve_lower(&self, b: &[T]) -> Result<Vec<T>> {
        self.check(b.len())?;
        let n = self.dim();
        let mut z = b.to_vec();
        for i in 0..n {
            let row = self.lower.row(i);
            let mut s = z[i];
            for j in 0..i {
                s = s - row[j] * z[j];
            }
            z[i] = s / row[i];
        }
        Ok(z)
    }

    /// Back substitution: `L^{-T} z`.
    pub fn solve_upper(&self, z: &[T]) -> Result<Vec<T>> {
        self.check(z.len())?;
        let n = self.dim();
        let mut x = z.to_vec();
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s = s - self.lower[(j, i)] * x[j];
            }
            x[i] = s / self.lower[(i, i)];
        }
        Ok(x)
    }

    /// `R^{-1} b`.
    pub fn solve(&self, b: &[T]) -> Result<Vec<T>> {
        let z = self.solve_lower(b)?;
        self.solve_upper(&z)
    }

    /// `b^T R^{-1} b`, as the squared norm of `L^{-1} b`.
    pub fn quad_form(&self, b: &[T]) -> Result<T> {
        Ok(self.solve_lower(b)?.iter().map(|&v| v * v).sum())
    }
}

/// Factors `r` (whose diagonal already carries `nugget`), inflating the
/// diagonal tenfold per retry up to [`MAX_JITTER`] when the plain factorization
/// fails. A zero nugget disables the retries.
pub fn cholesky<T: Scalar>(r: &Matrix<T>, nugget: T) -> Result<CholeskyFactor<T>> {
    if r.rows != r.cols {
        return Err(Error::DimensionMismatch {
            expected: r.rows,
            got: r.cols,
        });
    }
    let cap = T::lit(MAX_JITTER);
    let ten = T::lit(10.0);
    let mut jitter = nugget;
    loop {
        if let Some(lower) = try_factor(r, jitter - nugget) {
            let log_det = lower.data.iter().step_by(r.rows + 1).map(|&v| v.ln()).sum::<T>() * T::lit(2.0);
            return Ok(CholeskyFactor {
                lower,
                log_det,
                jitter_used: jitter,
            });
        }
        if jitter <= T::zero() || jitter >= cap {
            return Err(Error::NotPositiveDefinite {
                jitter: jitter.as_f64(),
            });
        }
        jitter = (jitter * ten).min(cap);
    }
}

fn try_factor<T: Scalar>(r: &Matrix<T>, extra: T) -> Option<Matrix<T>> {
    let n = r.rows;
    let mut l = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut s = r[(i, j)];
            if i == j {
                s = s + extra;
            }
            let (li, lj) = (i * n, j * n);
            for k in 0..j {
                s = s - l.data[li + k] * l.data[lj + k];
            }
            if i == j {
                if !(s > T::zero()) || !s.is_finite() {
                    return None;
                }
                l.data[li + i] = s.sqrt();
            } else {
                l.data[li + j] = s / l.data[lj + j];
            }
        }
    }
    Some(l)
}

pub fn solve_spd<T: Scalar>(factor: &CholeskyFactor<T>, b: &[T]) -> Result<Vec<T>> {
    factor.solve(b)
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
pub fn symmetric_eigenvalues<T: Scalar>(m: &Matrix<T>) -> Result<Vec<T>> {
    if !m.is_symmetric() {
        return Err(Error::InvalidArgument("matrix is not symmetric".into()));
    }
    let n = m.rows;
    let mut a = m.clone();
    let eps = T::epsilon();
    for _sweep in 0..100 {
        let off: T = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum();
        let diag: T = (0..n).map(|i| a[(i, i)] * a[(i, i)]).sum();
        if off <= eps * eps * diag || off == T::zero() {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == T::zero() {
                    continue;
                }
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                let tau = (aqq - app) / (T::lit(2.0) * apq);
                let t = tau.signum() / (tau.abs() + (T::one() + tau * tau).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eig: Vec<T> = (0..n).map(|i| a[(i, i)]).collect();
    eig.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
    Ok(eig)
}
