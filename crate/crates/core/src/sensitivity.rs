//! Global sensitivity on a surrogate: total Sobol' indices by the Jansen
//! pick-freeze estimator, and elementary effects from OFAT blocks.

use rand::Rng;

use crate::designs::{DesignMatrix, SobolSequence, SOBOL_MAX_DIM};
use crate::error::{Error, Result};
use crate::numeric::{pairwise_sum, seeded_rng};

pub const DEFAULT_SOBOL_SAMPLES: usize = 8192;
pub const ESTIMATOR: &str = "jansen-pick-freeze";

#[derive(Debug, Clone, PartialEq)]
pub struct SobolReport {
    pub total_indices: Vec<f64>,
    pub n_samples: usize,
    pub seed: u64,
    pub estimator: &'static str,
}

/// Total indices `T_k = mean((f(A) - f(A_B^k))^2) / (2 Var f)`.
///
/// `A` and `B` are the first and last `d` coordinates of a `2d`-dimensional
/// Sobol' sequence with a seeded digital shift (XOR of a random 32-bit word per
/// coordinate); `A_B^k` is `A` with column `k` taken from `B`. The variance is
/// pooled over the `2N` evaluations at `A` and `B`.
pub fn total_sobol<F>(predictor: F, d: usize, n: usize, seed: u64) -> Result<SobolReport>
where
    F: Fn(&[f64]) -> f64,
{
    if d == 0 || n < 2 {
        return Err(Error::InvalidArgument("total_sobol needs d >= 1 and N >= 2".into()));
    }
    if 2 * d > SOBOL_MAX_DIM {
        return Err(Error::SobolDimension {
            requested: 2 * d,
            max: SOBOL_MAX_DIM,
        });
    }
    let seq = SobolSequence::new(2 * d)?;
    let mut rng = seeded_rng(seed);
    let shift: Vec<u32> = (0..2 * d).map(|_| rng.random::<u32>()).collect();
    let scale = 1.0 / (1u64 << 32) as f64;

    let mut fa = Vec::with_capacity(n);
    let mut fb = Vec::with_capacity(n);
    let mut sq = vec![Vec::with_capacity(n); d];
    let mut ab = vec![0.0; d];
    for j in 0..n {
        let bits = seq.point_bits(j as u32);
        let u: Vec<f64> = bits.iter().zip(&shift).map(|(&b, &s)| (b ^ s) as f64 * scale).collect();
        let (a, b) = u.split_at(d);
        let ya = predictor(a);
        fa.push(ya);
        fb.push(predictor(b));
        for k in 0..d {
            ab.copy_from_slice(a);
            ab[k] = b[k];
            let diff = ya - predictor(&ab);
            sq[k].push(diff * diff);
        }
    }

    let all: Vec<f64> = fa.iter().chain(&fb).copied().collect();
    let m = pairwise_sum(&all) / all.len() as f64;
    let dev: Vec<f64> = all.iter().map(|v| (v - m) * (v - m)).collect();
    let var = pairwise_sum(&dev) / (all.len() - 1) as f64;
    if !(var >= 1e-30) {
        return Err(Error::ZeroVariance);
    }
    let total_indices = sq.iter().map(|s| pairwise_sum(s) / (2.0 * n as f64) / var).collect();
    Ok(SobolReport {
        total_indices,
        n_samples: n,
        seed,
        estimator: ESTIMATOR,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElementaryEffects {
    pub mu_star: Vec<f64>,
    /// Sample standard deviation over blocks; 0 for a single block.
    pub sigma: Vec<f64>,
}

/// Per-block finite differences `(y_k - y_base) / (x_k - x_base)` along each
/// factor, summarized by mean absolute value and standard deviation.
pub fn elementary_effects(design: &DesignMatrix, y: &[f64]) -> Result<ElementaryEffects> {
    design.validate_ofat()?;
    if y.len() != design.len() {
        return Err(Error::DimensionMismatch {
            expected: design.len(),
            got: y.len(),
        });
    }
    let d = design.dim();
    let blocks = design.blocks();
    let l = blocks.len() as f64;
    let mut mu_star = vec![0.0; d];
    let mut sigma = vec![0.0; d];
    for k in 0..d {
        let effects: Vec<f64> = blocks
            .iter()
            .map(|b| {
                let p = b.perturbed[k];
                (y[p] - y[b.base]) / (design.row(p)[k] - design.row(b.base)[k])
            })
            .collect();
        mu_star[k] = effects.iter().map(|e| e.abs()).sum::<f64>() / l;
        if blocks.len() > 1 {
            let mean = effects.iter().sum::<f64>() / l;
            sigma[k] = (effects.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>() / (l - 1.0)).sqrt();
        }
    }
    Ok(ElementaryEffects { mu_star, sigma })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::designs::{ofat_design, OfatBlock};
    use crate::testfns::levy;

    #[test]
    fn additive_model_indices() {
        let r = total_sobol(|x| x[0] + 2.0 * x[1], 3, DEFAULT_SOBOL_SAMPLES, 1).unwrap();
        let expect = [0.2, 0.8, 0.0];
        for (t, e) in r.total_indices.iter().zip(expect) {
            assert!((t - e).abs() <= 0.02, "{:?}", r.total_indices);
        }
        assert!(r.total_indices[2] <= 1e-3);
        assert_eq!(r.estimator, "jansen-pick-freeze");
    }

    #[test]
    fn affine_output_transform() {
        let f = |x: &[f64]| (3.0 * x[0]).sin() + x[1] * x[2];
        let a = total_sobol(f, 3, 1024, 4).unwrap();
        let b = total_sobol(|x| -2.5 * f(x) + 7.0, 3, 1024, 4).unwrap();
        for (p, q) in a.total_indices.iter().zip(&b.total_indices) {
            assert!((p - q).abs() <= 1e-12);
        }
    }

    // Double-loop oracle: T_k = E_{x~k}[Var_{x_k}(f | x~k)] / Var f with plain
    // Monte Carlo.
    #[test]
    fn product_matches_double_loop() {
        let f = |x: &[f64]| x[0] * x[1];
        let r = total_sobol(f, 2, DEFAULT_SOBOL_SAMPLES, 9).unwrap();
        let mut rng = seeded_rng(77);
        let (outer, inner) = (1000, 100);
        let mut t = [0.0; 2];
        let mut all = Vec::new();
        for k in 0..2 {
            for _ in 0..outer {
                let fixed: f64 = rng.random();
                let vals: Vec<f64> = (0..inner)
                    .map(|_| {
                        let free: f64 = rng.random();
                        let x = if k == 0 { [free, fixed] } else { [fixed, free] };
                        f(&x)
                    })
                    .collect();
                let m = vals.iter().sum::<f64>() / inner as f64;
                t[k] += vals.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (inner - 1) as f64;
                all.extend(vals);
            }
            t[k] /= outer as f64;
        }
        let m = all.iter().sum::<f64>() / all.len() as f64;
        let var = all.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (all.len() - 1) as f64;
        for k in 0..2 {
            assert!((r.total_indices[k] - t[k] / var).abs() <= 0.02, "{k}: {} vs {}", r.total_indices[k], t[k] / var);
        }
    }

    #[test]
    fn constant_predictor() {
        assert!(matches!(total_sobol(|_| 4.0, 2, 64, 0), Err(Error::ZeroVariance)));
    }

    #[test]
    fn deterministic_given_seed() {
        let f = |x: &[f64]| x[0].exp() * x[1];
        assert_eq!(total_sobol(f, 2, 256, 3).unwrap(), total_sobol(f, 2, 256, 3).unwrap());
        assert_ne!(total_sobol(f, 2, 256, 3).unwrap(), total_sobol(f, 2, 256, 4).unwrap());
    }

    fn blocks() -> Vec<OfatBlock> {
        vec![
            OfatBlock { base: vec![0.1, 0.2], partner: vec![0.7, 0.9] },
            OfatBlock { base: vec![0.5, 0.6], partner: vec![0.3, 0.1] },
            OfatBlock { base: vec![0.9, 0.4], partner: vec![0.2, 0.8] },
        ]
    }

    #[test]
    fn linear_function_effects() {
        let design = ofat_design(&blocks()).unwrap();
        let y: Vec<f64> = design.points().rows().map(|x| 3.0 * x[0]).collect();
        let ee = elementary_effects(&design, &y).unwrap();
        assert!((ee.mu_star[0] - 3.0).abs() < 1e-12 && ee.mu_star[1] == 0.0);
        assert!(ee.sigma[0] < 1e-12 && ee.sigma[1] == 0.0);
    }

    #[test]
    fn levy_effects_by_hand() {
        let b = blocks();
        let design = ofat_design(&b).unwrap();
        let native = |x: &[f64]| levy(&x.iter().map(|v| -10.0 + 20.0 * v).collect::<Vec<_>>());
        let y: Vec<f64> = design.points().rows().map(native).collect();
        let ee = elementary_effects(&design, &y).unwrap();
        for k in 0..2 {
            let mut sum = 0.0;
            for blk in &b {
                let mut moved = blk.base.clone();
                moved[k] = blk.partner[k];
                sum += ((native(&moved) - native(&blk.base)) / (blk.partner[k] - blk.base[k])).abs();
            }
            assert!((ee.mu_star[k] - sum / 3.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn single_block_has_zero_spread() {
        let design = ofat_design(&blocks()[..1]).unwrap();
        let y: Vec<f64> = design.points().rows().map(|x| x[0] * x[1]).collect();
        assert_eq!(elementary_effects(&design, &y).unwrap().sigma, vec![0.0, 0.0]);
    }

    #[test]
    fn needs_blocks() {
        let design = DesignMatrix::imported(crate::Points::from_rows(1, &[[0.1], [0.4]]).unwrap()).unwrap();
        assert!(matches!(elementary_effects(&design, &[1.0, 2.0]), Err(Error::MissingBlocks)));
    }
}
