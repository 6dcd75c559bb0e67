//! One-factor-at-a-time designs.
//!
//! A block is a base run `b` followed by `d` runs where run `k` equals `b`
//! except that coordinate `k` takes the partner level `b'_k`. A design of `l`
//! blocks has `l (d + 1)` runs, ordered block-major.

use rand::Rng;

use super::{BlockIndex, DesignMatrix, Generator};
use crate::error::{Error, Result};
use crate::numeric::seeded_rng;
use crate::points::Points;

pub const DEFAULT_MOFAT_ITERS: usize = 5000;
const MOFAT_RESTARTS: usize = 4;
// Exponent of the distance-sum tie-breaker between equal minimum distances.
const PHI_POWER: i32 = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct OfatBlock {
    pub base: Vec<f64>,
    pub partner: Vec<f64>,
}

pub fn ofat_design(blocks: &[OfatBlock]) -> Result<DesignMatrix> {
    assemble(blocks, Generator::Ofat, None)
}

fn assemble(blocks: &[OfatBlock], generator: Generator, seed: Option<u64>) -> Result<DesignMatrix> {
    let first = blocks
        .first()
        .ok_or_else(|| Error::InvalidDesign("at least one block is required".into()))?;
    let d = first.base.len();
    if d == 0 {
        return Err(Error::InvalidDesign("blocks must have at least one factor".into()));
    }
    let mut points = Points::new(d);
    let mut index = Vec::with_capacity(blocks.len());
    for (b, block) in blocks.iter().enumerate() {
        if block.base.len() != d || block.partner.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: block.base.len().min(block.partner.len()),
            });
        }
        if let Some(k) = (0..d).find(|&k| block.base[k] == block.partner[k]) {
            return Err(Error::InvalidDesign(format!(
                "block {b}: base and partner coincide in coordinate {}",
                k + 1
            )));
        }
        let base_row = points.len();
        points.push(&block.base)?;
        let mut perturbed = Vec::with_capacity(d);
        for k in 0..d {
            let mut row = block.base.clone();
            row[k] = block.partner[k];
            perturbed.push(points.len());
            points.push(&row)?;
        }
        index.push(BlockIndex {
            base: base_row,
            perturbed,
        });
    }
    DesignMatrix::new(points, generator, seed)?.with_blocks(index)
}

/// Mid-cell levels `(2i - 1) / (2g)`, `i = 1..g`.
fn levels(g: usize) -> Vec<f64> {
    (1..=g).map(|i| (2 * i - 1) as f64 / (2 * g) as f64).collect()
}

/// Block levels as indices into the level grid.
#[derive(Clone)]
struct LevelBlocks {
    base: Vec<Vec<usize>>,
    partner: Vec<Vec<usize>>,
}

impl LevelBlocks {
    fn random(d: usize, l: usize, g: usize, rng: &mut impl Rng) -> Self {
        let mut base = Vec::with_capacity(l);
        let mut partner = Vec::with_capacity(l);
        for _ in 0..l {
            let b: Vec<usize> = (0..d).map(|_| rng.random_range(0..g)).collect();
            let p: Vec<usize> = b
                .iter()
                .map(|&bk| {
                    let v = rng.random_range(0..g - 1);
                    if v >= bk {
                        v + 1
                    } else {
                        v
                    }
                })
                .collect();
            base.push(b);
            partner.push(p);
        }
        Self { base, partner }
    }

    fn to_blocks(&self, grid: &[f64]) -> Vec<OfatBlock> {
        self.base
            .iter()
            .zip(&self.partner)
            .map(|(b, p)| OfatBlock {
                base: b.iter().map(|&i| grid[i]).collect(),
                partner: p.iter().map(|&i| grid[i]).collect(),
            })
            .collect()
    }

    fn rows(&self, grid: &[f64]) -> Vec<Vec<f64>> {
        let mut rows = Vec::new();
        for (b, p) in self.base.iter().zip(&self.partner) {
            let base: Vec<f64> = b.iter().map(|&i| grid[i]).collect();
            for k in 0..b.len() {
                let mut r = base.clone();
                r[k] = grid[p[k]];
                rows.push(r);
            }
            rows.push(base);
        }
        rows
    }
}

/// (minimum squared distance, sum of inverse distance powers); larger first
/// component is better, smaller second breaks ties.
fn score(rows: &[Vec<f64>]) -> (f64, f64) {
    let mut min_d2 = f64::INFINITY;
    let mut phi = 0.0;
    for i in 0..rows.len() {
        for j in 0..i {
            let d2: f64 = rows[i].iter().zip(&rows[j]).map(|(a, b)| (a - b) * (a - b)).sum();
            min_d2 = min_d2.min(d2);
            phi += d2.powi(-PHI_POWER / 2);
        }
    }
    (min_d2, phi)
}

fn better(a: (f64, f64), b: (f64, f64)) -> bool {
    a.0 > b.0 || (a.0 == b.0 && a.1 <= b.1)
}

/// `l` OFAT blocks on the `2l`-level grid, placed to maximize the minimum
/// pairwise distance over all `l (d + 1)` runs by random restarts and
/// single-level exchanges.
pub fn mofat_heuristic(d: usize, l: usize, seed: u64, iters: usize) -> Result<DesignMatrix> {
    if d == 0 {
        return Err(Error::InvalidArgument("d must be at least 1".into()));
    }
    if l < 2 {
        return Err(Error::InvalidArgument("MOFAT needs at least l = 2 blocks".into()));
    }
    let g = 2 * l;
    let grid = levels(g);
    let mut rng = seeded_rng(seed);
    let per_restart = (iters / MOFAT_RESTARTS).max(1);

    let mut best: Option<(LevelBlocks, (f64, f64))> = None;
    for _ in 0..MOFAT_RESTARTS {
        let mut cur = LevelBlocks::random(d, l, g, &mut rng);
        let mut cur_score = score(&cur.rows(&grid));
        for _ in 0..per_restart {
            let b = rng.random_range(0..l);
            let k = rng.random_range(0..d);
            let move_base = rng.random_bool(0.5);
            let mut cand = cur.clone();
            let (target, other) = if move_base {
                (&mut cand.base[b][k], cur.partner[b][k])
            } else {
                (&mut cand.partner[b][k], cur.base[b][k])
            };
            let level = rng.random_range(0..g);
            if level == other || level == *target {
                continue;
            }
            *target = level;
            let s = score(&cand.rows(&grid));
            if better(s, cur_score) {
                cur = cand;
                cur_score = s;
            }
        }
        if best.as_ref().map_or(true, |(_, s)| better(cur_score, *s) && cur_score != *s) {
            best = Some((cur, cur_score));
        }
    }
    let (blocks, _) = best.expect("at least one restart");
    assemble(&blocks.to_blocks(&grid), Generator::Mofat, Some(seed))
}

/// Unoptimized OFAT design with uniformly drawn grid levels.
pub fn random_ofat(d: usize, l: usize, seed: u64) -> Result<DesignMatrix> {
    if d == 0 || l == 0 {
        return Err(Error::InvalidArgument("d and l must be at least 1".into()));
    }
    let g = (2 * l).max(2);
    let grid = levels(g);
    let mut rng = seeded_rng(seed);
    let blocks = LevelBlocks::random(d, l, g, &mut rng);
    assemble(&blocks.to_blocks(&grid), Generator::Ofat, Some(seed))
}
