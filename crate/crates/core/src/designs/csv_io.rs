//! Design CSV files: header `x1,...,xd`, one row per point, `#` comment lines
//! allowed. Generator metadata goes to a sibling `.meta` file of `key=value`
//! lines.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use super::{DesignMatrix, Generator};
use crate::error::{Error, Result};
use crate::points::Points;

fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn meta_path(path: &Path) -> PathBuf {
    path.with_extension("meta")
}

/// Parses design CSV text. Rows are numbered from 1 after the header in error
/// messages.
pub fn parse_design_csv(text: &str) -> Result<DesignMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader.headers()?.clone();
    let d = headers.len();
    for (k, h) in headers.iter().enumerate() {
        if h != format!("x{}", k + 1) {
            return Err(Error::Parse(format!(
                "expected header column `x{}`, found `{h}`",
                k + 1
            )));
        }
    }
    let mut points = Points::new(d);
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let row = i + 1;
        let mut vals = Vec::with_capacity(d);
        for (k, cell) in record.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| {
                Error::Parse(format!("row {row}, column x{}: `{cell}` is not a number", k + 1))
            })?;
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::OutOfRange { row, col: k + 1, value: v });
            }
            vals.push(v);
        }
        points.push(&vals)?;
    }
    if points.is_empty() {
        return Err(Error::EmptyDesign);
    }
    DesignMatrix::imported(points)
}

/// Reads a design and, when a sibling `.meta` file exists, restores its
/// generator, seed and block structure.
pub fn read_design_csv(path: impl AsRef<Path>) -> Result<DesignMatrix> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut design = parse_design_csv(&text)?;
    let meta = meta_path(path);
    if let Ok(meta_text) = fs::read_to_string(&meta) {
        let mut generator = None;
        let mut seed = None;
        for line in meta_text.lines().filter(|l| !l.starts_with('#')) {
            match line.split_once('=') {
                Some(("generator", v)) => generator = v.trim().parse::<Generator>().ok(),
                Some(("seed", v)) => seed = v.trim().parse::<u64>().ok(),
                _ => {}
            }
        }
        if let Some(g) = generator {
            design.generator = g;
            design.seed = seed;
            if g.is_ofat_family() {
                design = design.with_inferred_blocks()?;
            }
        }
    }
    Ok(design)
}

pub fn write_design_csv(design: &DesignMatrix, path: impl AsRef<Path>, comments: &[String]) -> Result<()> {
    let path = path.as_ref();
    let mut buf = Vec::new();
    for c in comments {
        writeln!(buf, "# {c}").expect("write to memory");
    }
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record((1..=design.dim()).map(|k| format!("x{k}")))?;
        for row in design.points().rows() {
            w.write_record(row.iter().map(|&v| fmt17(v)))?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
    }
    fs::write(path, buf).map_err(|e| Error::io(path, e))?;
    write_design_meta(design, &meta_path(path), comments)
}

pub fn write_design_meta(design: &DesignMatrix, path: &Path, comments: &[String]) -> Result<()> {
    let mut s = String::new();
    for c in comments {
        s.push_str(&format!("# {c}\n"));
    }
    s.push_str(&format!("generator={}\n", design.generator()));
    if let Some(seed) = design.seed() {
        s.push_str(&format!("seed={seed}\n"));
    }
    s.push_str(&format!("n={}\nd={}\n", design.len(), design.dim()));
    if !design.blocks().is_empty() {
        s.push_str(&format!("l={}\n", design.blocks().len()));
    }
    fs::write(path, s).map_err(|e| Error::io(path, e))
}
