//! Aggregation over replications and the summary CSV
//! `metric,condition,kind,n,mean,stderr,seeds,failed`.

use std::fmt;
use std::str::FromStr;

use alkrig::KernelFamily;

use crate::error::BenchError;
use crate::harness::ExperimentResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowKind {
    Sequential,
    Baseline,
}

impl fmt::Display for RowKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RowKind::Sequential => "sequential",
            RowKind::Baseline => "baseline",
        })
    }
}

impl FromStr for RowKind {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, BenchError> {
        match s {
            "sequential" => Ok(RowKind::Sequential),
            "baseline" => Ok(RowKind::Baseline),
            _ => Err(BenchError::Summary(format!("unknown row kind `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub metric: String,
    pub condition: String,
    pub kind: RowKind,
    pub n: usize,
    pub mean: f64,
    /// Standard error of the mean; 0 with fewer than two seeds.
    pub stderr: f64,
    pub seeds: usize,
    /// Replications missing from this row because they failed.
    pub failed: usize,
}

fn mean_stderr(v: &[f64]) -> (f64, f64) {
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let k = v.len() as f64;
    let mean = v.iter().sum::<f64>() / k;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (k - 1.0);
    (mean, (var / k).sqrt())
}

pub fn summarize(result: &ExperimentResult) -> Vec<SummaryRow> {
    let cfg = &result.config;
    let d = cfg.function.d_total;
    let mut rows = Vec::new();
    for (c, cond) in cfg.conditions.iter().enumerate() {
        let failed = result.failures.iter().filter(|f| f.condition == c).count();
        // Both curves start at the initial design: the first fit for MSE, the
        // initial incumbent for the gap.
        for n in cond.n_init(d)..=cfg.budget {
            let values = result.values_at(c, n);
            let (mean, stderr) = mean_stderr(&values);
            rows.push(SummaryRow {
                metric: result.metric.to_string(),
                condition: cond.label(d),
                kind: RowKind::Sequential,
                n,
                mean,
                stderr,
                seeds: values.len(),
                failed,
            });
        }
    }
    if cfg.baseline && !result.baselines.is_empty() {
        for family in [KernelFamily::Gaussian, KernelFamily::Mim] {
            let values = result.baseline_values(family);
            let (mean, stderr) = mean_stderr(&values);
            rows.push(SummaryRow {
                metric: result.metric.to_string(),
                condition: format!("maxpro({})+{family}", cfg.budget),
                kind: RowKind::Baseline,
                n: cfg.budget,
                mean,
                stderr,
                seeds: values.len(),
                failed: cfg.replications - values.len(),
            });
        }
    }
    rows
}

pub const HEADER: &str = "metric,condition,kind,n,mean,stderr,seeds,failed";

pub fn to_csv(rows: &[SummaryRow], header: &[String]) -> String {
    let mut s = String::new();
    for h in header {
        s.push_str(&format!("# {h}\n"));
    }
    s.push_str(HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{},{:.16e},{:.16e},{},{}\n",
            r.metric, r.condition, r.kind, r.n, r.mean, r.stderr, r.seeds, r.failed
        ));
    }
    s
}

pub fn parse_csv(text: &str) -> Result<Vec<SummaryRow>, BenchError> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if headers.join(",") != HEADER {
        return Err(BenchError::Summary(format!("expected header `{HEADER}`")));
    }
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let field = |k: usize| record.get(k).unwrap_or_default();
        let num = |k: usize| -> Result<f64, BenchError> {
            field(k)
                .parse::<f64>()
                .map_err(|_| BenchError::Summary(format!("row {}: `{}` is not a number", i + 1, field(k))))
        };
        let int = |k: usize| -> Result<usize, BenchError> {
            field(k)
                .parse::<usize>()
                .map_err(|_| BenchError::Summary(format!("row {}: `{}` is not an integer", i + 1, field(k))))
        };
        rows.push(SummaryRow {
            metric: field(0).to_string(),
            condition: field(1).to_string(),
            kind: field(2).parse()?,
            n: int(3)?,
            mean: num(4)?,
            stderr: num(5)?,
            seeds: int(6)?,
            failed: int(7)?,
        });
    }
    Ok(rows)
}
