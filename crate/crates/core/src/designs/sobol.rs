//! Unscrambled Sobol' points in Gray-code order, with Joe–Kuo direction
//! numbers for up to 50 dimensions (`data/joe_kuo_d50.txt`).

use std::sync::OnceLock;

use super::{DesignMatrix, Generator};
use crate::error::{Error, Result};
use crate::points::Points;

pub const SOBOL_MAX_DIM: usize = 50;
const BITS: usize = 32;
const DIRECTION_DATA: &str = include_str!("../../data/joe_kuo_d50.txt");

fn direction_table() -> &'static Vec<[u32; BITS]> {
    static TABLE: OnceLock<Vec<[u32; BITS]>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut table = Vec::with_capacity(SOBOL_MAX_DIM);
        // First coordinate: van der Corput in base 2.
        let mut first = [0u32; BITS];
        for (j, v) in first.iter_mut().enumerate() {
            *v = 1 << (BITS - 1 - j);
        }
        table.push(first);
        for line in DIRECTION_DATA.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty()) {
            let nums: Vec<u32> = line
                .split_whitespace()
                .map(|t| t.parse().expect("bundled direction numbers are integers"))
                .collect();
            let (s, a, m) = (nums[1] as usize, nums[2], &nums[3..]);
            let mut v = [0u32; BITS];
            for j in 0..s.min(BITS) {
                v[j] = m[j] << (BITS - 1 - j);
            }
            for j in s..BITS {
                let mut x = v[j - s] ^ (v[j - s] >> s);
                for k in 1..s {
                    if (a >> (s - 1 - k)) & 1 == 1 {
                        x ^= v[j - k];
                    }
                }
                v[j] = x;
            }
            table.push(v);
        }
        table
    })
}

#[derive(Debug, Clone)]
pub struct SobolSequence {
    dim: usize,
}

impl SobolSequence {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("Sobol' dimension must be at least 1".into()));
        }
        if dim > direction_table().len() {
            return Err(Error::SobolDimension {
                requested: dim,
                max: direction_table().len(),
            });
        }
        Ok(Self { dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The 32-bit integer coordinates of point `index`.
    pub fn point_bits(&self, index: u32) -> Vec<u32> {
        let gray = index ^ (index >> 1);
        direction_table()[..self.dim]
            .iter()
            .map(|v| {
                let mut x = 0u32;
                let mut g = gray;
                let mut j = 0;
                while g != 0 {
                    if g & 1 == 1 {
                        x ^= v[j];
                    }
                    g >>= 1;
                    j += 1;
                }
                x
            })
            .collect()
    }

    pub fn point(&self, index: u32) -> Vec<f64> {
        self.point_bits(index)
            .into_iter()
            .map(|x| x as f64 / (1u64 << BITS) as f64)
            .collect()
    }
}

/// Points `skip .. skip + n - 1` of the sequence.
pub fn sobol_points(n: usize, d: usize, skip: usize) -> Result<DesignMatrix> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let seq = SobolSequence::new(d)?;
    let end = skip
        .checked_add(n)
        .filter(|&e| e <= u32::MAX as usize)
        .ok_or_else(|| Error::InvalidArgument("Sobol' index range exceeds 2^32".into()))?;
    let mut points = Points::new(d);
    for i in skip..end {
        points.push(&seq.point(i as u32))?;
    }
    DesignMatrix::new(points, Generator::Sobol, None)
}
