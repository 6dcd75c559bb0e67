use rand::Rng;

use super::{check_data, GpModel};
use crate::error::{Error, Result};
use crate::kernels::{correlation_matrix, KernelFamily, KernelSpec, ALPHA_MAX, ALPHA_MIN, DEFAULT_NUGGET, THETA_MAX, THETA_MIN};
use crate::numeric::{cholesky, polish_starts, seeded_rng, CholeskyFactor};
use crate::points::Points;
use crate::scalar::Scalar;

// Keeps n * ln(sigma2) finite for interpolated constant residuals.
const SIGMA2_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions {
    pub theta_init: f64,
    pub alpha_init: f64,
    pub alpha_bounds: (f64, f64),
    pub theta_bounds: (f64, f64),
    /// Starts of the local search: the initial values, then `restarts - 1`
    /// random points in the log-length-scale box.
    pub restarts: usize,
    pub seed: u64,
    pub nugget: f64,
    /// Extra start, usually the previous optimum of a sequential run.
    pub warm_start: Option<(Vec<f64>, f64)>,
    /// Likelihood evaluations per start. The pattern search usually stops on
    /// its step size well before this in ten dimensions.
    pub max_evals_per_start: usize,
    pub tol: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            theta_init: 0.1,
            alpha_init: 1.0,
            alpha_bounds: (ALPHA_MIN, ALPHA_MAX),
            theta_bounds: (THETA_MIN, THETA_MAX),
            restarts: 5,
            seed: 0,
            nugget: DEFAULT_NUGGET,
            warm_start: None,
            max_evals_per_start: 2000,
            tol: 1e-6,
        }
    }
}

impl FitOptions {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let (tl, th) = self.theta_bounds;
        let (al, ah) = self.alpha_bounds;
        if !(tl > 0.0 && tl <= th && th <= THETA_MAX && tl >= THETA_MIN) {
            return Err(Error::InvalidArgument(format!("theta bounds ({tl}, {th}) invalid")));
        }
        if !(al > 0.0 && al <= ah && al >= ALPHA_MIN && ah <= ALPHA_MAX) {
            return Err(Error::InvalidArgument(format!("alpha bounds ({al}, {ah}) invalid")));
        }
        if self.restarts == 0 {
            return Err(Error::InvalidArgument("restarts must be at least 1".into()));
        }
        if self.max_evals_per_start == 0 || !(self.tol > 0.0) {
            return Err(Error::InvalidArgument("optimizer budget and tol must be positive".into()));
        }
        Ok(())
    }
}

/// Profile-likelihood summary for fixed kernel hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Profile<T> {
    /// `n ln(sigma2_hat) + ln det R`, constants dropped.
    pub nll: T,
    pub mu: T,
    pub sigma2: T,
}

/// `mu_hat = 1'R^{-1}y / 1'R^{-1}1`, `sigma2_hat = (y - mu)'R^{-1}(y - mu) / n`.
pub fn concentrated_nll<T: Scalar>(spec: &KernelSpec<T>, design: &Points<T>, y: &[T]) -> Result<Profile<T>> {
    check_data(design, y, 1)?;
    let r = correlation_matrix(spec, design)?;
    let chol = cholesky(&r, spec.nugget)?;
    profile_from_factor(&chol, y)
}

pub(crate) fn profile_from_factor<T: Scalar>(chol: &CholeskyFactor<T>, y: &[T]) -> Result<Profile<T>> {
    let n = y.len();
    let ones = vec![T::one(); n];
    // Work in the whitened space: z = L^{-1} v.
    let zy = chol.solve_lower(y)?;
    let z1 = chol.solve_lower(&ones)?;
    let num: T = z1.iter().zip(&zy).map(|(&a, &b)| a * b).sum();
    let den: T = z1.iter().map(|&a| a * a).sum();
    let mu = num / den;
    let resid: Vec<T> = y.iter().map(|&v| v - mu).collect();
    let quad = chol.quad_form(&resid)?;
    let sigma2 = (quad / T::lit(n as f64)).max(T::zero());
    let nll = T::lit(n as f64) * sigma2.max(T::lit(SIGMA2_FLOOR)).ln() + chol.log_det();
    Ok(Profile { nll, mu, sigma2 })
}

/// Maps points of the unit search cube to kernel hyperparameters: log-linear
/// in each length scale, linear in alpha.
struct ParamMap {
    dim: usize,
    family: KernelFamily,
    ln_theta: (f64, f64),
    alpha: (f64, f64),
    nugget: f64,
}

impl ParamMap {
    fn n_params(&self) -> usize {
        self.dim + usize::from(self.family.uses_alpha())
    }

    fn spec<T: Scalar>(&self, u: &[f64]) -> Result<KernelSpec<T>> {
        let (lo, hi) = self.ln_theta;
        let theta = u[..self.dim]
            .iter()
            .map(|&v| T::lit((lo + v * (hi - lo)).exp().clamp(lo.exp(), hi.exp())))
            .collect();
        let alpha = if self.family.uses_alpha() {
            let (a, b) = self.alpha;
            (a + u[self.dim] * (b - a)).clamp(a, b)
        } else {
            1.0
        };
        KernelSpec::new(self.family, theta, T::lit(alpha), T::lit(self.nugget))
    }

    fn to_unit(&self, theta: &[f64], alpha: f64) -> Vec<f64> {
        let (lo, hi) = self.ln_theta;
        let mut u: Vec<f64> = theta
            .iter()
            .map(|&t| ((t.ln() - lo) / (hi - lo)).clamp(0.0, 1.0))
            .collect();
        if self.family.uses_alpha() {
            let (a, b) = self.alpha;
            u.push(((alpha - a) / (b - a)).clamp(0.0, 1.0));
        }
        u
    }
}

pub(super) fn fit<T: Scalar>(design: &Points<T>, y: &[T], family: KernelFamily, options: &FitOptions) -> Result<GpModel<T>> {
    options.validate()?;
    check_data(design, y, 2)?;
    let d = design.dim();
    let map = ParamMap {
        dim: d,
        family,
        ln_theta: (options.theta_bounds.0.ln(), options.theta_bounds.1.ln()),
        alpha: options.alpha_bounds,
        nugget: options.nugget,
    };

    let (ymin, ymax) = y.iter().fold((T::infinity(), T::neg_infinity()), |(a, b), &v| (a.min(v), b.max(v)));
    if ymin == ymax {
        let start = map.to_unit(&vec![options.theta_init; d], options.alpha_init);
        let spec = map.spec(&start)?;
        return GpModel::with_parameters(design, y, spec, ymin, T::zero());
    }

    // Standardized responses make the search invariant to shifts and positive
    // rescaling of y.
    let n = y.len() as f64;
    let yf: Vec<f64> = y.iter().map(|v| v.as_f64()).collect();
    let mean = yf.iter().sum::<f64>() / n;
    let sd = (yf.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt();
    let ys: Vec<T> = yf.iter().map(|v| T::lit((v - mean) / sd)).collect();

    let mut starts = vec![map.to_unit(&vec![options.theta_init; d], options.alpha_init)];
    if let Some((theta, alpha)) = &options.warm_start {
        if theta.len() == d {
            starts.push(map.to_unit(theta, *alpha));
        }
    }
    let mut rng = seeded_rng(options.seed);
    for _ in 1..options.restarts {
        starts.push((0..map.n_params()).map(|_| rng.random::<f64>()).collect());
    }

    let objective = |u: &[f64]| -> f64 {
        let Ok(spec) = map.spec::<T>(u) else {
            return f64::NEG_INFINITY;
        };
        match concentrated_nll(&spec, design, &ys) {
            Ok(p) => -p.nll.as_f64(),
            Err(_) => f64::NEG_INFINITY,
        }
    };
    let results = polish_starts(objective, &starts, options.max_evals_per_start, options.tol);
    let best = results
        .iter()
        .fold(None::<&crate::numeric::BoxOptimum>, |acc, r| match acc {
            Some(b) if b.value >= r.value => Some(b),
            _ => Some(r),
        })
        .expect("at least one start");
    if best.value == f64::NEG_INFINITY {
        return Err(Error::NotPositiveDefinite {
            jitter: crate::numeric::MAX_JITTER,
        });
    }
    let spec = map.spec(&best.x)?;
    GpModel::fit_fixed(design, y, spec)
}
