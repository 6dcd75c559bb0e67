//! Experiment configuration: `key = value` lines with `#` comments, merged
//! with command-line overrides (later values win).

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use alkrig::acquisition::AcquisitionKind;
use alkrig::designs::{DEFAULT_ANNEAL_ITERS, DEFAULT_MOFAT_ITERS};
use alkrig::{Generator, KernelFamily, TestFunction};

use crate::error::{BenchError, Result};

pub const DEFAULT_REPLICATIONS: usize = 10;
pub const DEFAULT_N_TEST: usize = 1000;
pub const DEFAULT_EMULATION_BUDGET: usize = 100;
pub const DEFAULT_L: usize = 4;

/// Key-value pairs in insertion-independent (sorted) order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigMap {
    values: BTreeMap<String, String>,
}

impl ConfigMap {
    pub fn parse(text: &str, file: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(BenchError::ConfigSyntax {
                    file: file.to_string(),
                    line: i + 1,
                    message: format!("expected `key = value`, found `{line}`"),
                });
            };
            let key = k.trim().replace('-', "_");
            if key.is_empty() {
                return Err(BenchError::ConfigSyntax {
                    file: file.to_string(),
                    line: i + 1,
                    message: "empty key".into(),
                });
            }
            values.insert(key, v.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.values.insert(key.replace('-', "_"), value.into());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.values.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    fn parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: fmt::Display,
    {
        self.get(key)
            .map(|v| v.parse::<T>().map_err(|e| BenchError::config(key, format!("`{v}`: {e}"))))
            .transpose()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Emulate,
    Optimize,
}

/// Initial-design size: blocks for OFAT-family generators, rows otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DesignSize {
    Blocks(usize),
    Rows(usize),
}

/// One arm of an experiment: initial design plus kernel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Condition {
    pub generator: Generator,
    pub family: KernelFamily,
    pub size: DesignSize,
}

impl Condition {
    pub fn n_init(&self, d: usize) -> usize {
        match self.size {
            DesignSize::Blocks(l) => l * (d + 1),
            DesignSize::Rows(n) => n,
        }
    }

    pub fn label(&self, d: usize) -> String {
        format!("{}({})+{}", self.generator, self.n_init(d), self.family)
    }

    /// `generator:kernel[:size]`; the size is `l` for OFAT-family generators
    /// and the row count otherwise (default `4 (d + 1)` rows, `l = 4`).
    pub fn parse(s: &str, d: usize) -> Result<Self> {
        let field = "conditions";
        let parts: Vec<&str> = s.trim().split(':').map(str::trim).collect();
        if !(2..=3).contains(&parts.len()) {
            return Err(BenchError::config(field, format!("`{s}` is not generator:kernel[:size]")));
        }
        let generator: Generator = parts[0].parse().map_err(|e: alkrig::Error| BenchError::config(field, e.to_string()))?;
        if generator == Generator::Imported {
            return Err(BenchError::config(field, "imported designs cannot be generated"));
        }
        let family: KernelFamily = parts[1].parse().map_err(|e: alkrig::Error| BenchError::config(field, e.to_string()))?;
        let size = match parts.get(2) {
            Some(v) => v
                .parse::<usize>()
                .map_err(|_| BenchError::config(field, format!("size `{v}` is not an integer")))?,
            None if generator.is_ofat_family() => DEFAULT_L,
            None => 4 * (d + 1),
        };
        let size = if generator.is_ofat_family() {
            DesignSize::Blocks(size)
        } else {
            DesignSize::Rows(size)
        };
        Ok(Self { generator, family, size })
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let size = match self.size {
            DesignSize::Blocks(l) | DesignSize::Rows(l) => l,
        };
        write!(f, "{}:{}:{}", self.generator, self.family, size)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub function: TestFunction,
    pub conditions: Vec<Condition>,
    pub budget: usize,
    pub acquisition: AcquisitionKind,
    pub n_test: usize,
    pub master_seed: u64,
    pub replications: usize,
    pub out: PathBuf,
    /// Batch MaxPro baselines of size `budget` (emulation only).
    pub baseline: bool,
    pub restarts: usize,
    pub anneal_iters: usize,
    pub mofat_iters: usize,
    pub timestamp: bool,
}

impl ExperimentConfig {
    pub fn from_map(map: &ConfigMap, mode: Mode) -> Result<Self> {
        let name = map.get("function").ok_or_else(|| BenchError::config("function", "required"))?;
        let function = TestFunction::by_name(name).map_err(|e| BenchError::config("function", e.to_string()))?;
        let d = function.d_total;
        let conditions_text = map.get("conditions").map(str::to_string).unwrap_or_else(|| match mode {
            Mode::Emulate => "mofat:mim,maxpro:gaussian".into(),
            Mode::Optimize => format!("mofat:mim,maxpro:gaussian,maxpro:gaussian:{}", 10 * d),
        });
        let conditions = conditions_text
            .split(',')
            .filter(|c| !c.trim().is_empty())
            .map(|c| Condition::parse(c, d))
            .collect::<Result<Vec<_>>>()?;
        if conditions.is_empty() {
            return Err(BenchError::config("conditions", "at least one condition is required"));
        }
        let budget = map.parsed::<usize>("budget")?.unwrap_or(match mode {
            Mode::Emulate => DEFAULT_EMULATION_BUDGET,
            Mode::Optimize => 15 * d,
        });
        let acquisition = map.parsed::<AcquisitionKind>("acquisition")?.unwrap_or(match mode {
            Mode::Emulate => AcquisitionKind::Alm,
            Mode::Optimize => AcquisitionKind::Ei,
        });
        let cfg = Self {
            mode,
            function,
            conditions,
            budget,
            acquisition,
            n_test: map.parsed("n_test")?.unwrap_or(DEFAULT_N_TEST),
            master_seed: map.parsed("seed")?.unwrap_or(0),
            replications: map.parsed("replications")?.unwrap_or(DEFAULT_REPLICATIONS),
            out: map.get("out").map(PathBuf::from).unwrap_or_else(|| PathBuf::from("results")),
            baseline: map.parsed("baseline")?.unwrap_or(mode == Mode::Emulate),
            restarts: map.parsed("restarts")?.unwrap_or(5),
            anneal_iters: map.parsed("anneal_iters")?.unwrap_or(DEFAULT_ANNEAL_ITERS),
            mofat_iters: map.parsed("mofat_iters")?.unwrap_or(DEFAULT_MOFAT_ITERS),
            timestamp: !map.parsed::<bool>("no_timestamp")?.unwrap_or(false),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.function.d_total;
        for c in &self.conditions {
            let n0 = c.n_init(d);
            if n0 < 2 {
                return Err(BenchError::config("conditions", format!("{c}: initial design needs at least 2 rows")));
            }
            if c.generator == Generator::Mofat && matches!(c.size, DesignSize::Blocks(l) if l < 2) {
                return Err(BenchError::config("conditions", format!("{c}: MOFAT needs l >= 2")));
            }
            if self.budget < n0 {
                return Err(BenchError::config(
                    "budget",
                    format!("{} is smaller than the initial design of {c} ({n0} rows)", self.budget),
                ));
            }
        }
        if self.replications == 0 {
            return Err(BenchError::config("replications", "must be at least 1"));
        }
        if self.n_test == 0 {
            return Err(BenchError::config("n_test", "must be at least 1"));
        }
        if self.restarts == 0 {
            return Err(BenchError::config("restarts", "must be at least 1"));
        }
        if self.mode == Mode::Optimize && self.function.known_min.is_none() {
            return Err(alkrig::Error::MissingKnownMin(self.function.name.clone()).into());
        }
        Ok(())
    }

    /// Per-replication seeds `derive_seed(master, i)`.
    pub fn seeds(&self) -> Vec<u64> {
        (0..self.replications as u64)
            .map(|i| alkrig::numeric::derive_seed(self.master_seed, i))
            .collect()
    }

    /// Configuration echo for provenance headers.
    pub fn echo(&self) -> Vec<String> {
        let conditions: Vec<String> = self.conditions.iter().map(|c| c.to_string()).collect();
        vec![
            format!("function={}", self.function.name),
            format!("conditions={}", conditions.join(",")),
            format!("budget={}", self.budget),
            format!("acquisition={}", self.acquisition),
            format!("n_test={}", self.n_test),
            format!("seed={}", self.master_seed),
            format!("replications={}", self.replications),
            format!("baseline={}", self.baseline),
            format!("restarts={}", self.restarts),
            format!("anneal_iters={}", self.anneal_iters),
            format!("mofat_iters={}", self.mofat_iters),
        ]
    }
}
