//! Initial designs on `[0,1]^d`.

mod csv_io;
mod lhd;
mod ofat;
mod sobol;

use std::fmt;
use std::str::FromStr;

pub use csv_io::{parse_design_csv, read_design_csv, write_design_csv, write_design_meta};
pub use lhd::{maximin_lhd, maxpro_criterion, maxpro_design, min_distance, random_design, random_lhd, DEFAULT_ANNEAL_ITERS};
pub use ofat::{mofat_heuristic, ofat_design, random_ofat, OfatBlock, DEFAULT_MOFAT_ITERS};
pub use sobol::{sobol_points, SobolSequence, SOBOL_MAX_DIM};

use crate::error::{Error, Result};
use crate::points::Points;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Generator {
    Mofat,
    Ofat,
    MaximinLhd,
    MaxPro,
    Sobol,
    Random,
    Imported,
}

impl Generator {
    pub fn name(self) -> &'static str {
        match self {
            Generator::Mofat => "mofat",
            Generator::Ofat => "ofat",
            Generator::MaximinLhd => "maximin",
            Generator::MaxPro => "maxpro",
            Generator::Sobol => "sobol",
            Generator::Random => "random",
            Generator::Imported => "imported",
        }
    }

    pub fn is_ofat_family(self) -> bool {
        matches!(self, Generator::Mofat | Generator::Ofat)
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Generator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mofat" => Ok(Generator::Mofat),
            "ofat" => Ok(Generator::Ofat),
            "maximin" | "maximinlhd" | "maximin_lhd" | "mmlhd" => Ok(Generator::MaximinLhd),
            "maxpro" => Ok(Generator::MaxPro),
            "sobol" => Ok(Generator::Sobol),
            "random" | "uniform" => Ok(Generator::Random),
            "imported" => Ok(Generator::Imported),
            other => Err(Error::InvalidArgument(format!("unknown design generator `{other}`"))),
        }
    }
}

/// Row indices of one one-factor-at-a-time block: the base run and, for each
/// factor `k`, the run that changes only coordinate `k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockIndex {
    pub base: usize,
    pub perturbed: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    points: Points<f64>,
    generator: Generator,
    seed: Option<u64>,
    blocks: Vec<BlockIndex>,
}

impl DesignMatrix {
    pub fn new(points: Points<f64>, generator: Generator, seed: Option<u64>) -> Result<Self> {
        check_unit_cube(&points)?;
        Ok(Self {
            points,
            generator,
            seed,
            blocks: Vec::new(),
        })
    }

    pub fn imported(points: Points<f64>) -> Result<Self> {
        Self::new(points, Generator::Imported, None)
    }

    /// Attaches block metadata after checking the one-factor-change structure.
    pub fn with_blocks(mut self, blocks: Vec<BlockIndex>) -> Result<Self> {
        validate_blocks(&self.points, &blocks)?;
        self.blocks = blocks;
        Ok(self)
    }

    /// Interprets the rows as consecutive blocks of `d + 1` runs (base row
    /// first) and attaches that metadata if the structure holds.
    pub fn with_inferred_blocks(self) -> Result<Self> {
        let d = self.dim();
        let n = self.len();
        if d == 0 || n % (d + 1) != 0 {
            return Err(Error::InvalidDesign(format!(
                "{n} rows are not a multiple of d + 1 = {}",
                d + 1
            )));
        }
        let blocks = (0..n / (d + 1))
            .map(|b| {
                let base = b * (d + 1);
                BlockIndex {
                    base,
                    perturbed: (1..=d).map(|k| base + k).collect(),
                }
            })
            .collect();
        self.with_blocks(blocks)
    }

    pub fn points(&self) -> &Points<f64> {
        &self.points
    }

    pub fn into_points(self) -> Points<f64> {
        self.points
    }

    pub fn generator(&self) -> Generator {
        self.generator
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn blocks(&self) -> &[BlockIndex] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points.dim()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.points.row(i)
    }

    /// Checks the one-factor-change invariant of the attached blocks.
    pub fn validate_ofat(&self) -> Result<()> {
        if self.blocks.is_empty() {
            return Err(Error::MissingBlocks);
        }
        validate_blocks(&self.points, &self.blocks)
    }

    /// Number of distinct values in each column.
    pub fn distinct_per_column(&self) -> Vec<usize> {
        (0..self.dim())
            .map(|k| {
                let mut col = self.points.column(k);
                col.sort_by(|a, b| a.partial_cmp(b).unwrap());
                col.dedup();
                col.len()
            })
            .collect()
    }
}

fn check_unit_cube(points: &Points<f64>) -> Result<()> {
    for (i, row) in points.rows().enumerate() {
        for (k, &v) in row.iter().enumerate() {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::OutOfRange {
                    row: i + 1,
                    col: k + 1,
                    value: v,
                });
            }
        }
    }
    Ok(())
}

fn validate_blocks(points: &Points<f64>, blocks: &[BlockIndex]) -> Result<()> {
    let d = points.dim();
    for (b, block) in blocks.iter().enumerate() {
        if block.perturbed.len() != d {
            return Err(Error::InvalidDesign(format!(
                "block {b} lists {} perturbed rows for d = {d}",
                block.perturbed.len()
            )));
        }
        let n = points.len();
        if block.base >= n || block.perturbed.iter().any(|&r| r >= n) {
            return Err(Error::InvalidDesign(format!("block {b} references a missing row")));
        }
        let base = points.row(block.base);
        for (k, &r) in block.perturbed.iter().enumerate() {
            let row = points.row(r);
            for j in 0..d {
                let same = row[j] == base[j];
                if (j == k) == same {
                    return Err(Error::InvalidDesign(format!(
                        "block {b}: row {r} must differ from its base in coordinate {} only",
                        k + 1
                    )));
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn out_of_range_points_rejected() {
        let p = Points::from_rows(2, &[[0.1, 0.2], [0.3, 1.2]]).unwrap();
        assert!(matches!(
            DesignMatrix::imported(p),
            Err(Error::OutOfRange { row: 2, col: 2, .. })
        ));
    }

    #[test]
    fn inferred_blocks() {
        let p = Points::from_rows(2, &[[0.2, 0.3], [0.8, 0.3], [0.2, 0.9]]).unwrap();
        let d = DesignMatrix::imported(p).unwrap().with_inferred_blocks().unwrap();
        assert_eq!(d.blocks().len(), 1);
        d.validate_ofat().unwrap();

        let p = Points::from_rows(2, &[[0.2, 0.3], [0.8, 0.4], [0.2, 0.9]]).unwrap();
        assert!(DesignMatrix::imported(p).unwrap().with_inferred_blocks().is_err());
    }

    #[test]
    fn generator_names_round_trip() {
        for g in [
            Generator::Mofat,
            Generator::Ofat,
            Generator::MaximinLhd,
            Generator::MaxPro,
            Generator::Sobol,
            Generator::Random,
            Generator::Imported,
        ] {
            assert_eq!(g.name().parse::<Generator>().unwrap(), g);
        }
    }
}
