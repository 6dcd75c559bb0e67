//! Ordinary kriging: constant mean `mu`, covariance `sigma2 * R`.
//!
//! Posterior at `x` given data `(X, y)`:
//!
//! ```text
//! y_hat(x) = mu + r(x)' R^{-1} (y - mu 1)
//! s2(x)    = sigma2 * (1 - r(x)' R^{-1} r(x))
//! ```
//!
//! Hyperparameters are estimated from the concentrated likelihood, see
//! [`concentrated_nll`] and [`GpModel::fit`].

mod fit;
mod io;

pub use fit::{concentrated_nll, FitOptions, Profile};

use crate::error::{Error, Result};
use crate::kernels::{correlation_matrix, correlation_vector, KernelFamily, KernelSpec};
use crate::numeric::{cholesky, CholeskyFactor};
use crate::points::Points;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction<T> {
    pub mean: T,
    pub variance: T,
}

/// Fitted, immutable kriging surrogate.
#[derive(Debug, Clone)]
pub struct GpModel<T> {
    design: Points<T>,
    y: Vec<T>,
    spec: KernelSpec<T>,
    mu: T,
    sigma2: T,
    chol: CholeskyFactor<T>,
    alpha_vec: Vec<T>,
    nll: Option<T>,
    degenerate: bool,
}

impl<T: Scalar> GpModel<T> {
    /// Maximum-likelihood fit; see [`FitOptions`].
    pub fn fit(design: &Points<T>, y: &[T], family: KernelFamily, options: &FitOptions) -> Result<Self> {
        fit::fit(design, y, family, options)
    }

    /// Fixed kernel hyperparameters; `mu` and `sigma2` take their profile
    /// likelihood estimates. Accepts a single observation.
    pub fn fit_fixed(design: &Points<T>, y: &[T], spec: KernelSpec<T>) -> Result<Self> {
        check_data(design, y, 1)?;
        let r = correlation_matrix(&spec, design)?;
        let chol = cholesky(&r, spec.nugget)?;
        let profile = fit::profile_from_factor(&chol, y)?;
        let mut model = Self::assemble(design.clone(), y.to_vec(), spec, profile.mu, profile.sigma2, chol)?;
        model.nll = Some(profile.nll);
        Ok(model)
    }

    /// Every parameter supplied by the caller.
    pub fn with_parameters(design: &Points<T>, y: &[T], spec: KernelSpec<T>, mu: T, sigma2: T) -> Result<Self> {
        check_data(design, y, 1)?;
        if !(sigma2 >= T::zero()) {
            return Err(Error::InvalidArgument(format!("sigma2 must be nonnegative, got {sigma2}")));
        }
        let r = correlation_matrix(&spec, design)?;
        let chol = cholesky(&r, spec.nugget)?;
        Self::assemble(design.clone(), y.to_vec(), spec, mu, sigma2, chol)
    }

    fn assemble(
        design: Points<T>,
        y: Vec<T>,
        spec: KernelSpec<T>,
        mu: T,
        sigma2: T,
        chol: CholeskyFactor<T>,
    ) -> Result<Self> {
        let resid: Vec<T> = y.iter().map(|&v| v - mu).collect();
        let alpha_vec = chol.solve(&resid)?;
        let degenerate = sigma2 == T::zero();
        Ok(Self {
            design,
            y,
            spec,
            mu,
            sigma2,
            chol,
            alpha_vec,
            nll: None,
            degenerate,
        })
    }

    pub fn design(&self) -> &Points<T> {
        &self.design
    }

    pub fn y(&self) -> &[T] {
        &self.y
    }

    pub fn spec(&self) -> &KernelSpec<T> {
        &self.spec
    }

    pub fn mu(&self) -> T {
        self.mu
    }

    pub fn sigma2(&self) -> T {
        self.sigma2
    }

    pub fn cholesky(&self) -> &CholeskyFactor<T> {
        &self.chol
    }

    pub fn alpha_vec(&self) -> &[T] {
        &self.alpha_vec
    }

    /// Concentrated negative log-likelihood at the fitted parameters, when the
    /// model was estimated rather than given.
    pub fn nll(&self) -> Option<T> {
        self.nll
    }

    /// Constant response: the model predicts `mu` with zero variance.
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    pub fn dim(&self) -> usize {
        self.design.dim()
    }

    pub fn len(&self) -> usize {
        self.design.len()
    }

    pub fn is_empty(&self) -> bool {
        self.design.is_empty()
    }

    pub fn best_y(&self) -> T {
        self.y.iter().copied().fold(T::infinity(), T::min)
    }

    /// `r(x)' R^{-1} r(x)`, via one triangular solve.
    pub fn correlation_quad_form(&self, x: &[T]) -> Result<T> {
        let r = correlation_vector(&self.spec, &self.design, x)?;
        self.chol.quad_form(&r)
    }

    pub fn predict(&self, x: &[T]) -> Result<Prediction<T>> {
        let r = correlation_vector(&self.spec, &self.design, x)?;
        let mean = self.mu + r.iter().zip(&self.alpha_vec).map(|(&a, &b)| a * b).sum::<T>();
        let q = self.chol.quad_form(&r)?;
        let variance = self.sigma2 * (T::one() - q).max(T::zero());
        Ok(Prediction { mean, variance })
    }

    pub fn batch_predict(&self, xs: &Points<T>) -> Result<(Vec<T>, Vec<T>)> {
        if !xs.is_empty() && xs.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: xs.dim(),
            });
        }
        let mut mean = Vec::with_capacity(xs.len());
        let mut var = Vec::with_capacity(xs.len());
        for x in xs.rows() {
            let p = self.predict(x)?;
            mean.push(p.mean);
            var.push(p.variance);
        }
        Ok((mean, var))
    }
}

fn check_data<T: Scalar>(design: &Points<T>, y: &[T], min_points: usize) -> Result<()> {
    if design.len() < min_points {
        return Err(Error::TooFewPoints {
            required: min_points,
            got: design.len(),
        });
    }
    if design.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: design.len(),
            got: y.len(),
        });
    }
    if let Some(v) = y.iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(format!("non-finite response value {v}")));
    }
    Ok(())
}
