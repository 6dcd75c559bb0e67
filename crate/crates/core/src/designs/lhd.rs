//! Latin hypercube designs improved by simulated annealing.
//!
//! Every column is a permutation of the cell midpoints `(2i - 1) / (2n)`.
//! Proposals swap two rows within one column, so the Latin structure is never
//! broken. The temperature starts at a tenth of the initial criterion and is
//! multiplied by 0.95 every 100 proposals; the best design seen is returned.

use rand::seq::SliceRandom;
use rand::Rng;

use super::{DesignMatrix, Generator};
use crate::error::{Error, Result};
use crate::numeric::{seeded_rng, Rng as DesignRng};
use crate::points::Points;

pub const DEFAULT_ANNEAL_ITERS: usize = 10_000;
const COOLING: f64 = 0.95;
const COOLING_PERIOD: usize = 100;

fn check_size(n: usize, d: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidArgument("Latin hypercube needs n >= 2".into()));
    }
    if d == 0 {
        return Err(Error::InvalidArgument("d must be at least 1".into()));
    }
    Ok(())
}

fn midpoint_lhd(n: usize, d: usize, rng: &mut DesignRng) -> Points<f64> {
    let mut data = vec![0.0; n * d];
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..d {
        perm.shuffle(rng);
        for (i, &p) in perm.iter().enumerate() {
            data[i * d + k] = (2 * p + 1) as f64 / (2 * n) as f64;
        }
    }
    Points::from_flat(d, data).expect("consistent shape")
}

/// Seeded random midpoint Latin hypercube.
pub fn random_lhd(n: usize, d: usize, seed: u64) -> Result<DesignMatrix> {
    check_size(n, d)?;
    let mut rng = seeded_rng(seed);
    DesignMatrix::new(midpoint_lhd(n, d, &mut rng), Generator::Random, Some(seed))
}

/// Independent uniform points.
pub fn random_design(n: usize, d: usize, seed: u64) -> Result<DesignMatrix> {
    if n == 0 || d == 0 {
        return Err(Error::InvalidArgument("n and d must be at least 1".into()));
    }
    let mut rng = seeded_rng(seed);
    let data = (0..n * d).map(|_| rng.random::<f64>()).collect();
    DesignMatrix::new(Points::from_flat(d, data)?, Generator::Random, Some(seed))
}

pub fn min_distance(points: &Points<f64>) -> f64 {
    let mut m = f64::INFINITY;
    for i in 0..points.len() {
        for j in 0..i {
            m = m.min(dist2(points.row(i), points.row(j)));
        }
    }
    m.sqrt()
}

/// `sum_{i<j} 1 / prod_k (x_ik - x_jk)^2`.
pub fn maxpro_criterion(points: &Points<f64>) -> f64 {
    let mut s = 0.0;
    for i in 0..points.len() {
        for j in 0..i {
            s += 1.0 / prod2(points.row(i), points.row(j));
        }
    }
    s
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn prod2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).product()
}

/// Criterion to be minimized, kept as a strict lower triangle of pair values.
trait PairCriterion {
    fn pair(&self, a: &[f64], b: &[f64]) -> f64;
    fn total(&self, pairs: &[f64], n: usize, d: usize) -> f64;
}

struct Maximin;

impl PairCriterion for Maximin {
    fn pair(&self, a: &[f64], b: &[f64]) -> f64 {
        dist2(a, b)
    }

    fn total(&self, pairs: &[f64], _n: usize, _d: usize) -> f64 {
        -pairs.iter().copied().fold(f64::INFINITY, f64::min).sqrt()
    }
}

struct MaxPro;

impl PairCriterion for MaxPro {
    fn pair(&self, a: &[f64], b: &[f64]) -> f64 {
        1.0 / prod2(a, b)
    }

    // (psi / C(n, 2))^(1/d): monotone in psi with a tamer dynamic range.
    fn total(&self, pairs: &[f64], n: usize, d: usize) -> f64 {
        let npairs = (n * (n - 1) / 2) as f64;
        (pairs.iter().sum::<f64>() / npairs).powf(1.0 / d as f64)
    }
}

fn tri(i: usize, j: usize) -> usize {
    let (i, j) = if i > j { (i, j) } else { (j, i) };
    i * (i - 1) / 2 + j
}

fn anneal(points: Points<f64>, iters: usize, crit: &impl PairCriterion, rng: &mut DesignRng) -> Points<f64> {
    let n = points.len();
    let d = points.dim();
    let mut cur = points;
    let mut pairs = vec![0.0; n * (n - 1) / 2];
    for i in 1..n {
        for j in 0..i {
            pairs[tri(i, j)] = crit.pair(cur.row(i), cur.row(j));
        }
    }
    let mut cur_val = crit.total(&pairs, n, d);
    let mut best = cur.clone();
    let mut best_val = cur_val;
    let mut temp = 0.1 * cur_val.abs();
    let mut saved = Vec::with_capacity(2 * n);

    for it in 0..iters {
        if it > 0 && it % COOLING_PERIOD == 0 {
            temp *= COOLING;
        }
        let k = rng.random_range(0..d);
        let a = rng.random_range(0..n);
        let mut b = rng.random_range(0..n - 1);
        if b >= a {
            b += 1;
        }
        let (va, vb) = (cur.get(a, k), cur.get(b, k));
        cur.set(a, k, vb);
        cur.set(b, k, va);
        saved.clear();
        for &r in &[a, b] {
            for j in 0..n {
                if j == r || (r == b && j == a) {
                    continue;
                }
                let idx = tri(r, j);
                saved.push((idx, pairs[idx]));
                pairs[idx] = crit.pair(cur.row(r), cur.row(j));
            }
        }
        let val = crit.total(&pairs, n, d);
        let delta = val - cur_val;
        let accept = delta <= 0.0 || (temp > 0.0 && rng.random::<f64>() < (-delta / temp).exp());
        if accept {
            cur_val = val;
            if val < best_val {
                best_val = val;
                best = cur.clone();
            }
        } else {
            cur.set(a, k, va);
            cur.set(b, k, vb);
            for &(idx, v) in saved.iter().rev() {
                pairs[idx] = v;
            }
        }
    }
    best
}

/// Maximin Latin hypercube: maximizes the minimum pairwise distance.
pub fn maximin_lhd(n: usize, d: usize, seed: u64, iters: usize) -> Result<DesignMatrix> {
    check_size(n, d)?;
    let mut rng = seeded_rng(seed);
    let start = midpoint_lhd(n, d, &mut rng);
    let points = anneal(start, iters, &Maximin, &mut rng);
    DesignMatrix::new(points, Generator::MaximinLhd, Some(seed))
}

/// MaxPro Latin hypercube: minimizes [`maxpro_criterion`].
pub fn maxpro_design(n: usize, d: usize, seed: u64, iters: usize) -> Result<DesignMatrix> {
    check_size(n, d)?;
    let mut rng = seeded_rng(seed);
    let start = midpoint_lhd(n, d, &mut rng);
    let points = anneal(start, iters, &MaxPro, &mut rng);
    DesignMatrix::new(points, Generator::MaxPro, Some(seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn is_midpoint_lhd(p: &Points<f64>) -> bool {
        let n = p.len();
        (0..p.dim()).all(|k| {
            let mut cells: Vec<usize> = p
                .column(k)
                .iter()
                .map(|v| (v * (2 * n) as f64 - 1.0).round() as usize / 2)
                .collect();
            cells.sort_unstable();
            let exact = p
                .column(k)
                .iter()
                .all(|&v| (v * (2 * n) as f64).round() == v * (2 * n) as f64);
            exact && cells == (0..n).collect::<Vec<_>>()
        })
    }

    #[test]
    fn columns_are_permutations() {
        for seed in 0..5 {
            assert!(is_midpoint_lhd(maximin_lhd(12, 4, seed, 2000).unwrap().points()));
            assert!(is_midpoint_lhd(maxpro_design(9, 3, seed, 2000).unwrap().points()));
        }
    }

    #[test]
    fn two_point_one_dimension() {
        let d = maximin_lhd(2, 1, 3, 100).unwrap();
        let mut col = d.points().column(0);
        col.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(col, vec![0.25, 0.75]);
    }

    #[test]
    fn annealing_never_worsens_the_start() {
        for seed in 0..5 {
            let start = random_lhd(15, 3, seed).unwrap();
            let opt = maximin_lhd(15, 3, seed, 3000).unwrap();
            assert!(min_distance(opt.points()) >= min_distance(start.points()));
            let opt = maxpro_design(15, 3, seed, 3000).unwrap();
            assert!(maxpro_criterion(opt.points()) <= maxpro_criterion(start.points()));
        }
    }

    #[test]
    fn maxpro_projects_better_than_maximin() {
        let (mut a, mut b) = (0.0, 0.0);
        for seed in 0..20 {
            a += maxpro_criterion(maxpro_design(10, 3, seed, DEFAULT_ANNEAL_ITERS).unwrap().points());
            b += maxpro_criterion(maximin_lhd(10, 3, seed, DEFAULT_ANNEAL_ITERS).unwrap().points());
        }
        assert!(a <= b, "maxpro {a} vs maximin {b}");
    }

    #[test]
    fn deterministic() {
        assert_eq!(maxpro_design(8, 2, 5, 500).unwrap(), maxpro_design(8, 2, 5, 500).unwrap());
        assert_eq!(random_design(5, 2, 1).unwrap(), random_design(5, 2, 1).unwrap());
    }

    #[test]
    fn size_checks() {
        assert!(maximin_lhd(1, 2, 0, 10).is_err());
        assert!(maxpro_design(3, 0, 0, 10).is_err());
    }
}
