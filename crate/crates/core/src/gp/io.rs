//! Flat text serialization of fitted models.
//!
//! ```text
//! gpmodel v1 family=<name> d=<d> n=<n>
//! theta=<t1>,...,<td>
//! alpha=<a>
//! nugget=<eta>
//! mu=<mu>
//! sigma2=<s2>
//! x1,...,xd,y
//! <n csv rows>
//! ```
//!
//! Lines starting with `#` are ignored. Numbers use 17 significant digits.

use std::fmt::Write as _;
use std::path::Path;

use super::GpModel;
use crate::error::{Error, Result};
use crate::kernels::{KernelFamily, KernelSpec};
use crate::points::Points;
use crate::scalar::Scalar;

pub(crate) fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

impl<T: Scalar> GpModel<T> {
    pub fn to_text(&self) -> String {
        self.to_text_with_comments(&[])
    }

    /// Serialized model with `# ` comment lines after the header line.
    pub fn to_text_with_comments(&self, comments: &[String]) -> String {
        let d = self.dim();
        let mut s = String::new();
        let _ = writeln!(s, "gpmodel v1 family={} d={} n={}", self.spec.family, d, self.len());
        for c in comments {
            let _ = writeln!(s, "# {c}");
        }
        let theta: Vec<String> = self.spec.theta.iter().map(|t| fmt17(t.as_f64())).collect();
        let _ = writeln!(s, "theta={}", theta.join(","));
        let _ = writeln!(s, "alpha={}", fmt17(self.spec.alpha.as_f64()));
        let _ = writeln!(s, "nugget={}", fmt17(self.spec.nugget.as_f64()));
        let _ = writeln!(s, "mu={}", fmt17(self.mu.as_f64()));
        let _ = writeln!(s, "sigma2={}", fmt17(self.sigma2.as_f64()));
        let header: Vec<String> = (1..=d).map(|k| format!("x{k}")).chain(["y".to_string()]).collect();
        let _ = writeln!(s, "{}", header.join(","));
        for (row, y) in self.design.rows().zip(&self.y) {
            let cells: Vec<String> = row.iter().chain(std::iter::once(y)).map(|v| fmt17(v.as_f64())).collect();
            let _ = writeln!(s, "{}", cells.join(","));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or_else(|| Error::Parse("empty model file".into()))?;
        let mut parts = header.split_whitespace();
        if parts.next() != Some("gpmodel") || parts.next() != Some("v1") {
            return Err(Error::Parse(format!("unsupported model header `{header}`")));
        }
        let mut family = None;
        let mut d = None;
        let mut n = None;
        for kv in parts {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("bad header field `{kv}`")))?;
            match k {
                "family" => family = Some(v.parse::<KernelFamily>()?),
                "d" => d = Some(parse_usize(v)?),
                "n" => n = Some(parse_usize(v)?),
                _ => return Err(Error::Parse(format!("unknown header field `{k}`"))),
            }
        }
        let family = family.ok_or_else(|| Error::Parse("header lacks family".into()))?;
        let d = d.ok_or_else(|| Error::Parse("header lacks d".into()))?;
        let n = n.ok_or_else(|| Error::Parse("header lacks n".into()))?;

        let mut field = |name: &str| -> Result<String> {
            let line = lines.next().ok_or_else(|| Error::Parse(format!("missing `{name}` line")))?;
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected `{name}=...`, got `{line}`")))?;
            if k.trim() != name {
                return Err(Error::Parse(format!("expected `{name}`, got `{k}`")));
            }
            Ok(v.trim().to_string())
        };
        let theta = field("theta")?
            .split(',')
            .map(parse_num::<T>)
            .collect::<Result<Vec<T>>>()?;
        if theta.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: theta.len(),
            });
        }
        let alpha = parse_num::<T>(&field("alpha")?)?;
        let nugget = parse_num::<T>(&field("nugget")?)?;
        let mu = parse_num::<T>(&field("mu")?)?;
        let sigma2 = parse_num::<T>(&field("sigma2")?)?;

        let cols = lines.next().ok_or_else(|| Error::Parse("missing data header".into()))?;
        if cols.split(',').count() != d + 1 {
            return Err(Error::Parse(format!("data header `{cols}` does not have {} columns", d + 1)));
        }
        let mut design = Points::new(d);
        let mut y = Vec::with_capacity(n);
        for line in lines {
            let vals = line.split(',').map(parse_num::<T>).collect::<Result<Vec<T>>>()?;
            if vals.len() != d + 1 {
                return Err(Error::Parse(format!("row `{line}` does not have {} columns", d + 1)));
            }
            design.push(&vals[..d])?;
            y.push(vals[d]);
        }
        if y.len() != n {
            return Err(Error::Parse(format!("header declares n={n}, found {} rows", y.len())));
        }
        let spec = KernelSpec::new(family, theta, alpha, nugget)?;
        GpModel::with_parameters(&design, &y, spec, mu, sigma2)
    }

    pub fn save(&self, path: impl AsRef<Path>, comments: &[String]) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text_with_comments(comments)).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text)
    }
}

fn parse_usize(s: &str) -> Result<usize> {
    s.parse().map_err(|_| Error::Parse(format!("expected an integer, got `{s}`")))
}

fn parse_num<T: Scalar>(s: &str) -> Result<T> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("expected a number, got `{s}`")))?;
    Ok(T::lit(v))
}
