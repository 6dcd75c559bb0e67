//! Correlation kernels on the unit hypercube.
//!
//! All kernels are stationary correlation functions evaluated in unit-cube
//! coordinates. With `delta_k = x_ik - x_jk`:
//!
//! | family       | value                                              |
//! |--------------|----------------------------------------------------|
//! | `Gaussian`   | `exp(-sum_k delta_k^2 / theta_k^2)`                |
//! | `Im`         | `(1 + sum_k delta_k^2 / theta_k^2)^(-alpha)`       |
//! | `Mim`        | `prod_k (1 + delta_k^2 / theta_k^2)^(-alpha)`      |
//! | `ExpProduct` | `prod_k exp(-abs(delta_k) / theta_k)`              |
//!
//! The nugget is only applied on the diagonal of [`correlation_matrix`].

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::numeric::Matrix;
use crate::points::Points;
use crate::scalar::Scalar;

pub const THETA_MIN: f64 = 1e-3;
pub const THETA_MAX: f64 = 1e3;
pub const ALPHA_MIN: f64 = 0.01;
pub const ALPHA_MAX: f64 = 3.0;
pub const NUGGET_MAX: f64 = 1e-2;
/// Default nugget used by every fitted model.
pub const DEFAULT_NUGGET: f64 = 1e-6;

// Accept bound values that went through an exp/ln round trip.
const BOUND_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelFamily {
    Gaussian,
    Im,
    Mim,
    ExpProduct,
}

impl KernelFamily {
    pub const ALL: [KernelFamily; 4] = [
        KernelFamily::Gaussian,
        KernelFamily::Im,
        KernelFamily::Mim,
        KernelFamily::ExpProduct,
    ];

    pub fn name(self) -> &'static str {
        match self {
            KernelFamily::Gaussian => "gaussian",
            KernelFamily::Im => "im",
            KernelFamily::Mim => "mim",
            KernelFamily::ExpProduct => "exp",
        }
    }

    /// Whether the shape exponent alpha enters the kernel.
    pub fn uses_alpha(self) -> bool {
        matches!(self, KernelFamily::Im | KernelFamily::Mim)
    }
}

impl fmt::Display for KernelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for KernelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" | "gauss" => Ok(KernelFamily::Gaussian),
            "im" => Ok(KernelFamily::Im),
            "mim" => Ok(KernelFamily::Mim),
            "exp" | "expproduct" | "exp_product" | "matern12" => Ok(KernelFamily::ExpProduct),
            other => Err(Error::InvalidKernel(format!("unknown kernel family `{other}`"))),
        }
    }
}

/// Kernel family plus its hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec<T> {
    pub family: KernelFamily,
    pub theta: Vec<T>,
    pub alpha: T,
    pub nugget: T,
}

impl<T: Scalar> KernelSpec<T> {
    pub fn new(family: KernelFamily, theta: Vec<T>, alpha: T, nugget: T) -> Result<Self> {
        let spec = Self {
            family,
            theta,
            alpha,
            nugget,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Same length scale in every one of `dim` coordinates.
    pub fn isotropic(family: KernelFamily, dim: usize, theta: T, alpha: T, nugget: T) -> Result<Self> {
        Self::new(family, vec![theta; dim], alpha, nugget)
    }

    pub fn dim(&self) -> usize {
        self.theta.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.theta.is_empty() {
            return Err(Error::InvalidKernel("theta must have at least one entry".into()));
        }
        let lo = THETA_MIN * (1.0 - BOUND_SLACK);
        let hi = THETA_MAX * (1.0 + BOUND_SLACK);
        for (k, &t) in self.theta.iter().enumerate() {
            let t = t.as_f64();
            if !(lo..=hi).contains(&t) {
                return Err(Error::InvalidKernel(format!(
                    "theta[{k}] = {t} outside [{THETA_MIN:e}, {THETA_MAX:e}]"
                )));
            }
        }
        if self.family.uses_alpha() {
            let a = self.alpha.as_f64();
            if !(ALPHA_MIN * (1.0 - BOUND_SLACK)..=ALPHA_MAX * (1.0 + BOUND_SLACK)).contains(&a) {
                return Err(Error::InvalidKernel(format!(
                    "alpha = {a} outside [{ALPHA_MIN}, {ALPHA_MAX}]"
                )));
            }
        }
        let eta = self.nugget.as_f64();
        if !(0.0..=NUGGET_MAX).contains(&eta) {
            return Err(Error::InvalidKernel(format!(
                "nugget = {eta} outside [0, {NUGGET_MAX:e}]"
            )));
        }
        Ok(())
    }

    /// Kernel value between two points. The nugget is not included.
    pub fn eval(&self, a: &[T], b: &[T]) -> Result<T> {
        self.check_dim(a.len())?;
        self.check_dim(b.len())?;
        Ok(self.eval_unchecked(a, b))
    }

    /// Natural log of the kernel value; stays finite where the value itself
    /// underflows.
    pub fn ln_eval(&self, a: &[T], b: &[T]) -> Result<T> {
        self.check_dim(a.len())?;
        self.check_dim(b.len())?;
        let mut acc = T::zero();
        match self.family {
            KernelFamily::Gaussian => {
                for ((&x, &y), &t) in a.iter().zip(b).zip(&self.theta) {
                    let z = (x - y) / t;
                    acc = acc - z * z;
                }
            }
            KernelFamily::Im => {
                let mut s = T::zero();
                for ((&x, &y), &t) in a.iter().zip(b).zip(&self.theta) {
                    let z = (x - y) / t;
                    s = s + z * z;
                }
                acc = -self.alpha * s.ln_1p();
            }
            KernelFamily::Mim => {
                for ((&x, &y), &t) in a.iter().zip(b).zip(&self.theta) {
                    let z = (x - y) / t;
                    acc = acc + (z * z).ln_1p();
                }
                acc = -self.alpha * acc;
            }
            KernelFamily::ExpProduct => {
                for ((&x, &y), &t) in a.iter().zip(b).zip(&self.theta) {
                    acc = acc - (x - y).abs() / t;
                }
            }
        }
        Ok(acc)
    }

    pub(crate) fn eval_unchecked(&self, a: &[T], b: &[T]) -> T {
        match self.family {
            KernelFamily::Gaussian => {
                let mut s = T::zero();
                for ((&x, &y), &t) in a.iter().zip(b).zip(&self.theta) {
                    let z = (x - y) / t;
                    s = s + z * z;
                }
                (-s).exp()
            }
            KernelFamily::Im => {
                let mut s = T::zero();
                for ((&x, &y), &t) in a.iter().zip(b).zip(&self.theta) {
                    let z = (x - y) / t;
                    s = s + z * z;
                }
                (T::one() + s).powf(-self.alpha)
            }
            KernelFamily::Mim => {
                let mut p = T::one();
                for ((&x, &y), &t) in a.iter().zip(b).zip(&self.theta) {
                    let z = (x - y) / t;
                    p = p * (T::one() + z * z);
                }
                if p.is_finite() {
                    p.powf(-self.alpha)
                } else {
                    // Product overflowed; fall back to the log form.
                    let mut s = T::zero();
                    for ((&x, &y), &t) in a.iter().zip(b).zip(&self.theta) {
                        let z = (x - y) / t;
                        s = s + (z * z).ln_1p();
                    }
                    (-self.alpha * s).exp()
                }
            }
            KernelFamily::ExpProduct => {
                let mut s = T::zero();
                for ((&x, &y), &t) in a.iter().zip(b).zip(&self.theta) {
                    s = s + (x - y).abs() / t;
                }
                (-s).exp()
            }
        }
    }

    fn check_dim(&self, got: usize) -> Result<()> {
        if got != self.theta.len() {
            return Err(Error::DimensionMismatch {
                expected: self.theta.len(),
                got,
            });
        }
        Ok(())
    }
}

pub fn eval_kernel<T: Scalar>(spec: &KernelSpec<T>, xi: &[T], xj: &[T]) -> Result<T> {
    spec.eval(xi, xj)
}

/// `R[i][j] = k(x_i, x_j)` off the diagonal and `1 + nugget` on it.
pub fn correlation_matrix<T: Scalar>(spec: &KernelSpec<T>, design: &Points<T>) -> Result<Matrix<T>> {
    if design.dim() != spec.dim() {
        return Err(Error::DimensionMismatch {
            expected: spec.dim(),
            got: design.dim(),
        });
    }
    let n = design.len();
    let mut r = Matrix::zeros(n, n);
    let diag = T::one() + spec.nugget;
    for i in 0..n {
        r[(i, i)] = diag;
        let xi = design.row(i);
        for j in 0..i {
            let v = spec.eval_unchecked(xi, design.row(j));
            r[(i, j)] = v;
            r[(j, i)] = v;
        }
    }
    Ok(r)
}

/// `r[i] = k(x, x_i)` for every design row.
pub fn correlation_vector<T: Scalar>(spec: &KernelSpec<T>, design: &Points<T>, x: &[T]) -> Result<Vec<T>> {
    if x.len() != spec.dim() {
        return Err(Error::DimensionMismatch {
            expected: spec.dim(),
            got: x.len(),
        });
    }
    if !design.is_empty() && design.dim() != spec.dim() {
        return Err(Error::DimensionMismatch {
            expected: spec.dim(),
            got: design.dim(),
        });
    }
    Ok(design.rows().map(|row| spec.eval_unchecked(x, row)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn spec(family: KernelFamily, theta: Vec<f64>, alpha: f64) -> KernelSpec<f64> {
        KernelSpec::new(family, theta, alpha, 0.0).unwrap()
    }

    #[test]
    fn zero_distance_is_one() {
        for family in KernelFamily::ALL {
            let s = spec(family, vec![0.3, 0.7], 1.5);
            assert_eq!(s.eval(&[0.2, 0.9], &[0.2, 0.9]).unwrap(), 1.0);
        }
    }

    #[test]
    fn mim_one_dimensional_value() {
        let s = spec(KernelFamily::Mim, vec![1.0], 1.0);
        assert_relative_eq!(s.eval(&[0.0], &[1.0]).unwrap(), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn gaussian_anisotropic_value() {
        let s = spec(KernelFamily::Gaussian, vec![1.0, 2.0], 1.0);
        let v = s.eval(&[0.0, 0.0], &[1.0, 2.0]).unwrap();
        assert_relative_eq!(v, (-2.0f64).exp(), epsilon = 1e-15);
        assert_relative_eq!(v, 0.135335283236612, epsilon = 1e-12);
    }

    #[test]
    fn im_and_mim_agree_in_one_dimension() {
        for &(t, a) in &[(0.01, 0.01), (0.3, 1.0), (5.0, 3.0), (1e3, 0.5)] {
            let im = spec(KernelFamily::Im, vec![t], a);
            let mim = spec(KernelFamily::Mim, vec![t], a);
            for &(x, y) in &[(0.0, 1.0), (0.25, 0.3), (0.9, 0.1)] {
                assert_eq!(im.eval(&[x], &[y]).unwrap(), mim.eval(&[x], &[y]).unwrap());
            }
        }
    }

    #[test]
    fn exp_product_depends_on_manhattan_distance() {
        let s = spec(KernelFamily::ExpProduct, vec![0.5, 0.5], 1.0);
        let a = s.eval(&[0.0, 0.0], &[0.3, 0.4]).unwrap();
        let b = s.eval(&[0.0, 0.0], &[0.7, 0.0]).unwrap();
        assert_relative_eq!(a, b, epsilon = 1e-14);
        assert_relative_eq!(a, (-1.4f64).exp(), epsilon = 1e-14);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let s = spec(KernelFamily::Mim, vec![0.3, 0.3], 1.0);
        assert!(matches!(
            s.eval(&[0.1], &[0.2, 0.3]),
            Err(Error::DimensionMismatch { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn invalid_hyperparameters_rejected() {
        assert!(KernelSpec::new(KernelFamily::Mim, vec![1e-4], 1.0, 0.0).is_err());
        assert!(KernelSpec::new(KernelFamily::Mim, vec![0.1], 3.5, 0.0).is_err());
        assert!(KernelSpec::new(KernelFamily::Gaussian, vec![0.1], 3.5, 0.0).is_ok());
        assert!(KernelSpec::new(KernelFamily::Im, vec![0.1], 1.0, 0.02).is_err());
        assert!(KernelSpec::<f64>::new(KernelFamily::Im, vec![], 1.0, 0.0).is_err());
        assert!("bogus".parse::<KernelFamily>().is_err());
    }

    #[test]
    fn single_point_matrix() {
        let s = KernelSpec::new(KernelFamily::Mim, vec![0.2], 1.0, 1e-6).unwrap();
        let d = Points::from_rows(1, &[[0.4]]).unwrap();
        let r = correlation_matrix(&s, &d).unwrap();
        assert_eq!(r.n_rows(), 1);
        assert_eq!(r[(0, 0)], 1.0 + 1e-6);
    }

    #[test]
    fn duplicate_rows_matrix() {
        let s = KernelSpec::new(KernelFamily::Gaussian, vec![0.2, 0.2], 1.0, 1e-6).unwrap();
        let d = Points::from_rows(2, &[[0.4, 0.1], [0.4, 0.1]]).unwrap();
        let r = correlation_matrix(&s, &d).unwrap();
        assert_eq!(r[(0, 0)], 1.0 + 1e-6);
        assert_eq!(r[(1, 1)], 1.0 + 1e-6);
        assert_eq!(r[(0, 1)], 1.0);
        assert_eq!(r[(1, 0)], 1.0);
    }

    #[test]
    fn correlation_vector_cases() {
        let s = KernelSpec::new(KernelFamily::Mim, vec![1e-3; 3], 1.0, 1e-6).unwrap();
        let d = Points::from_rows(3, &[[0.0, 0.0, 0.0], [1.0, 1.0, 0.0], [0.2, 0.9, 1.0]]).unwrap();
        let r = correlation_vector(&s, &d, &[0.2, 0.9, 1.0]).unwrap();
        assert_eq!(r[2], 1.0);

        // Every design point is at least 0.5 away in some coordinate, so at
        // least one factor is below (1 + 0.5^2 / 1e-6)^(-1) = 4e-6 and the
        // other factors are at most 1. The bound below is tighter because here
        // every coordinate is far.
        let far = d.rows().fold(f64::INFINITY, |m, row| {
            let ln = s.ln_eval(&[0.5, 0.5, 0.5], row).unwrap();
            m.min(-ln)
        });
        assert!(far > (1e6f64).ln());
        let r = correlation_vector(&s, &d, &[0.5, 0.5, 0.5]).unwrap();
        assert!(r.iter().all(|&v| v < 1e-6), "{r:?}");

        let empty = Points::<f64>::new(3);
        assert!(correlation_vector(&s, &empty, &[0.1, 0.2, 0.3]).unwrap().is_empty());
        assert!(correlation_vector(&s, &d, &[0.1, 0.2]).is_err());
    }

    #[test]
    fn correlation_matrix_positive_definite_on_random_points() {
        use nalgebra::DMatrix;
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for family in KernelFamily::ALL {
            for _ in 0..10 {
                let pts: Vec<[f64; 3]> = (0..5).map(|_| [rng.random(), rng.random(), rng.random()]).collect();
                let theta = vec![rng.random_range(0.05..2.0); 3];
                let s = KernelSpec::new(family, theta, rng.random_range(0.1..3.0), 1e-6).unwrap();
                let d = Points::from_rows(3, &pts).unwrap();
                let r = correlation_matrix(&s, &d).unwrap();
                let m = DMatrix::from_fn(5, 5, |i, j| r[(i, j)]);
                let eig = m.symmetric_eigen();
                assert!(eig.eigenvalues.iter().all(|&l| l > 0.0), "{family}: {:?}", eig.eigenvalues);
            }
        }
    }

    fn family_strategy() -> impl Strategy<Value = KernelFamily> {
        prop_oneof![
            Just(KernelFamily::Gaussian),
            Just(KernelFamily::Im),
            Just(KernelFamily::Mim),
            Just(KernelFamily::ExpProduct),
        ]
    }

    proptest! {
        #[test]
        fn symmetric_and_bounded(
            family in family_strategy(),
            a in prop::collection::vec(0.0f64..=1.0, 3),
            b in prop::collection::vec(0.0f64..=1.0, 3),
            theta in prop::collection::vec(0.05f64..5.0, 3),
            alpha in 0.01f64..3.0,
        ) {
            let s = KernelSpec::new(family, theta, alpha, 0.0).unwrap();
            let ab = s.eval(&a, &b).unwrap();
            let ba = s.eval(&b, &a).unwrap();
            prop_assert_eq!(ab, ba);
            prop_assert!(ab > 0.0 && ab <= 1.0);
            if a != b {
                prop_assert!(ab < 1.0);
            }
        }

        #[test]
        fn mim_is_a_product_of_one_dimensional_factors(
            a in prop::collection::vec(0.0f64..=1.0, 4),
            b in prop::collection::vec(0.0f64..=1.0, 4),
            theta in prop::collection::vec(1e-3f64..10.0, 4),
            alpha in 0.01f64..3.0,
        ) {
            let s = KernelSpec::new(KernelFamily::Mim, theta.clone(), alpha, 0.0).unwrap();
            let full = s.eval(&a, &b).unwrap();
            let prod: f64 = (0..4)
                .map(|k| {
                    KernelSpec::new(KernelFamily::Mim, vec![theta[k]], alpha, 0.0)
                        .unwrap()
                        .eval(&[a[k]], &[b[k]])
                        .unwrap()
                })
                .product();
            prop_assert!((full - prod).abs() <= 1e-12 * prod.max(1e-300));
        }

        #[test]
        fn mim_strictly_decreasing_per_coordinate(
            base in prop::collection::vec(0.0f64..=1.0, 3),
            k in 0usize..3,
            d1 in 0.0f64..0.5,
            extra in 0.01f64..0.5,
            theta in prop::collection::vec(0.05f64..5.0, 3),
            alpha in 0.01f64..3.0,
        ) {
            let s = KernelSpec::new(KernelFamily::Mim, theta, alpha, 0.0).unwrap();
            let mut near = base.clone();
            let mut far = base.clone();
            near[k] = base[k] + d1;
            far[k] = base[k] + d1 + extra;
            prop_assert!(s.eval(&base, &far).unwrap() < s.eval(&base, &near).unwrap());
        }
    }
}
