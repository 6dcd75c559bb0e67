//! Seeded multistart pattern search on the unit box.

use rand::Rng;

use super::rng::seeded_rng;

const INITIAL_STEP: f64 = 0.25;
const MIN_STEP: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct BoxOptimizerConfig {
    pub n_candidates: usize,
    pub n_polish_starts: usize,
    /// Objective evaluations allowed per polished start.
    pub max_polish_evals: usize,
    /// Smallest relative objective improvement a pattern move must achieve.
    pub tol: f64,
    pub seed: u64,
}

impl Default for BoxOptimizerConfig {
    fn default() -> Self {
        Self {
            n_candidates: 1000,
            n_polish_starts: 20,
            max_polish_evals: 200,
            tol: 1e-6,
            seed: 0,
        }
    }
}

impl BoxOptimizerConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> crate::Result<()> {
        if self.n_candidates == 0 || self.n_polish_starts == 0 || self.max_polish_evals == 0 {
            return Err(crate::Error::InvalidArgument(
                "optimizer counts must be at least 1".into(),
            ));
        }
        if !(self.tol > 0.0) {
            return Err(crate::Error::InvalidArgument("optimizer tol must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoxOptimum {
    pub x: Vec<f64>,
    pub value: f64,
}

fn sanitize(v: f64) -> f64 {
    if v.is_nan() {
        f64::NEG_INFINITY
    } else {
        v
    }
}

/// Maximizes `f` over `[0,1]^d`. Deterministic given `config.seed`.
pub fn maximize_box<F>(f: F, d: usize, config: &BoxOptimizerConfig) -> BoxOptimum
where
    F: Fn(&[f64]) -> f64,
{
    search_box(f, d, config)
        .into_iter()
        .next()
        .expect("search evaluates at least one candidate")
}

/// Every evaluated candidate, polished ones replaced by their local optimum,
/// ranked by objective (descending) with ties resolved by candidate order.
pub fn search_box<F>(f: F, d: usize, config: &BoxOptimizerConfig) -> Vec<BoxOptimum>
where
    F: Fn(&[f64]) -> f64,
{
    let mut rng = seeded_rng(config.seed);
    let n = config.n_candidates.max(1);
    let mut candidates: Vec<BoxOptimum> = (0..n)
        .map(|_| {
            let x: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
            let value = sanitize(f(&x));
            BoxOptimum { x, value }
        })
        .collect();
    rank(&mut candidates);

    let n_polish = config.n_polish_starts.min(candidates.len());
    for c in candidates.iter_mut().take(n_polish) {
        *c = pattern_search(&f, std::mem::take(&mut c.x), c.value, config.max_polish_evals, config.tol);
    }
    rank(&mut candidates);
    candidates
}

/// Polishes each start in turn; results come back in start order.
pub fn polish_starts<F>(f: F, starts: &[Vec<f64>], max_evals: usize, tol: f64) -> Vec<BoxOptimum>
where
    F: Fn(&[f64]) -> f64,
{
    starts
        .iter()
        .map(|x0| {
            let x0: Vec<f64> = x0.iter().map(|v| v.clamp(0.0, 1.0)).collect();
            let v0 = sanitize(f(&x0));
            pattern_search(&f, x0, v0, max_evals.saturating_sub(1).max(1), tol)
        })
        .collect()
}

fn rank(items: &mut [BoxOptimum]) {
    // Stable sort keeps the lowest candidate index first among ties.
    items.sort_by(|a, b| b.value.partial_cmp(&a.value).unwrap_or(std::cmp::Ordering::Equal));
}

/// Coordinate-wise compass search: try `+step` then `-step` along each axis,
/// halve the step after a sweep without progress, stop below `1e-4` or when
/// the evaluation budget runs out.
pub fn pattern_search<F>(f: &F, mut x: Vec<f64>, mut fx: f64, max_evals: usize, tol: f64) -> BoxOptimum
where
    F: Fn(&[f64]) -> f64,
{
    let mut step = INITIAL_STEP;
    let mut evals = 0usize;
    let mut trial = x.clone();
    'outer: while step >= MIN_STEP {
        let mut improved = false;
        for k in 0..x.len() {
            for dir in [1.0, -1.0] {
                let moved = (x[k] + dir * step).clamp(0.0, 1.0);
                if moved == x[k] {
                    continue;
                }
                if evals >= max_evals {
                    break 'outer;
                }
                trial.copy_from_slice(&x);
                trial[k] = moved;
                let ft = sanitize(f(&trial));
                evals += 1;
                if ft > fx && (fx == f64::NEG_INFINITY || ft - fx > tol * fx.abs()) {
                    x[k] = moved;
                    fx = ft;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    BoxOptimum { x, value: fx }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{KernelFamily, KernelSpec};

    fn dist_inf(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
    }

    #[test]
    fn concave_quadratic() {
        let f = |x: &[f64]| -x.iter().map(|v| (v - 0.5) * (v - 0.5)).sum::<f64>();
        let best = maximize_box(f, 2, &BoxOptimizerConfig::default().with_seed(3));
        assert!(dist_inf(&best.x, &[0.5, 0.5]) <= 1e-3, "{:?}", best.x);
    }

    #[test]
    fn constant_objective() {
        let best = maximize_box(|_| 4.25, 3, &BoxOptimizerConfig::default());
        assert_eq!(best.value, 4.25);
        assert!(best.x.iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn kernel_peak_at_anchor() {
        let spec = KernelSpec::new(KernelFamily::Mim, vec![0.2, 0.4, 0.1], 1.3, 0.0).unwrap();
        let anchor = [0.31, 0.77, 0.05];
        let f = |x: &[f64]| spec.eval(x, &anchor).unwrap();
        let best = maximize_box(f, 3, &BoxOptimizerConfig::default().with_seed(1));
        assert!(dist_inf(&best.x, &anchor) <= 1e-3, "{:?}", best.x);
    }

    #[test]
    fn deterministic_and_in_box() {
        let f = |x: &[f64]| (7.0 * x[0]).sin() * (3.0 * x[1]).cos() + x[2];
        let cfg = BoxOptimizerConfig::default().with_seed(42);
        let a = maximize_box(f, 3, &cfg);
        let b = maximize_box(f, 3, &cfg);
        assert_eq!(a, b);
        assert!(a.x.iter().all(|v| (0.0..=1.0).contains(v)));
        // Boundary maximum: x[2] pinned at 1.
        assert_eq!(a.x[2], 1.0);
    }

    #[test]
    fn nan_objective_is_treated_as_worst() {
        let f = |x: &[f64]| if x[0] < 0.5 { f64::NAN } else { x[0] };
        let best = maximize_box(f, 1, &BoxOptimizerConfig::default());
        assert!((best.x[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ranking_contains_every_candidate() {
        let cfg = BoxOptimizerConfig {
            n_candidates: 50,
            n_polish_starts: 5,
            ..Default::default()
        };
        let ranked = search_box(|x| -x[0], 1, &cfg);
        assert_eq!(ranked.len(), 50);
        assert!(ranked.windows(2).all(|w| w[0].value >= w[1].value));
    }

    #[test]
    fn polish_keeps_start_order() {
        let f = |x: &[f64]| -(x[0] - 0.2).powi(2);
        let out = polish_starts(f, &[vec![0.9], vec![0.1]], 200, 1e-12);
        assert_eq!(out.len(), 2);
        for o in out {
            assert!((o.x[0] - 0.2).abs() < 1e-3);
        }
    }
}
