//! Replicated emulation and optimization experiments.
//!
//! Replication `i` of every condition uses the seed `s_i = derive_seed(master, i)`
//! and splits it into design, fit and acquisition streams
//! (`derive_seed(s_i, 1..=3)`). Conditions with the same design generator and
//! size therefore share their initial designs seed by seed.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use alkrig::acquisition::{run_active_learning_with, AcquisitionSpec, RunLog};
use alkrig::designs::{maximin_lhd, maxpro_design, mofat_heuristic, random_design, random_ofat, sobol_points};
use alkrig::numeric::derive_seed;
use alkrig::{DesignMatrix, FitOptions, Generator, GpModel, KernelFamily, KernelSpec, PointSet};
use rayon::prelude::*;

use crate::config::{Condition, DesignSize, ExperimentConfig, Mode};
use crate::error::{BenchError, Result};
use crate::summary::{summarize, SummaryRow};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Streams {
    pub design: u64,
    pub fit: u64,
    pub acquisition: u64,
}

impl Streams {
    pub fn new(replication_seed: u64) -> Self {
        Self {
            design: derive_seed(replication_seed, 1),
            fit: derive_seed(replication_seed, 2),
            acquisition: derive_seed(replication_seed, 3),
        }
    }
}

pub fn initial_design(cond: &Condition, d: usize, seed: u64, cfg: &ExperimentConfig) -> Result<DesignMatrix> {
    let n = cond.n_init(d);
    let design = match (cond.generator, cond.size) {
        (Generator::Mofat, DesignSize::Blocks(l)) => mofat_heuristic(d, l, seed, cfg.mofat_iters)?,
        (Generator::Ofat, DesignSize::Blocks(l)) => random_ofat(d, l, seed)?,
        (Generator::MaximinLhd, _) => maximin_lhd(n, d, seed, cfg.anneal_iters)?,
        (Generator::MaxPro, _) => maxpro_design(n, d, seed, cfg.anneal_iters)?,
        (Generator::Sobol, _) => sobol_points(n, d, 1)?,
        (Generator::Random, _) => random_design(n, d, seed)?,
        (g, _) => return Err(BenchError::config("conditions", format!("cannot generate a `{g}` design"))),
    };
    Ok(design)
}

/// Metric curve of one replication: `(n, value)` for every model size from the
/// initial design to the budget.
#[derive(Debug, Clone, PartialEq)]
pub struct Replication {
    pub condition: usize,
    pub index: usize,
    pub seed: u64,
    pub curve: Vec<(usize, f64)>,
    pub log: RunLog,
    pub final_spec: KernelSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineRun {
    pub family: KernelFamily,
    pub index: usize,
    pub n: usize,
    pub value: f64,
}

#[derive(Debug, Clone)]
pub struct ReplicationFailure {
    pub condition: usize,
    pub index: usize,
    pub error: String,
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub metric: &'static str,
    pub replications: Vec<Replication>,
    pub failures: Vec<ReplicationFailure>,
    pub baselines: Vec<BaselineRun>,
}

impl ExperimentResult {
    pub fn summary(&self) -> Vec<SummaryRow> {
        summarize(self)
    }

    /// Values of one condition at model size `n`, in replication order.
    pub fn values_at(&self, condition: usize, n: usize) -> Vec<f64> {
        self.replications
            .iter()
            .filter(|r| r.condition == condition)
            .filter_map(|r| r.curve.iter().find(|(m, _)| *m == n).map(|(_, v)| *v))
            .collect()
    }

    pub fn baseline_values(&self, family: KernelFamily) -> Vec<f64> {
        self.baselines.iter().filter(|b| b.family == family).map(|b| b.value).collect()
    }
}

struct TestSet {
    points: PointSet,
    y: Vec<f64>,
}

fn test_set(cfg: &ExperimentConfig) -> Result<TestSet> {
    let d = cfg.function.d_total;
    let points = sobol_points(cfg.n_test, d, 1)?.into_points();
    let y = points.rows().map(|x| cfg.function.eval_unit(x)).collect::<alkrig::Result<_>>()?;
    Ok(TestSet { points, y })
}

fn mse(model: &GpModel, test: &TestSet) -> alkrig::Result<f64> {
    let (mean, _) = model.batch_predict(&test.points)?;
    Ok(mean.iter().zip(&test.y).map(|(m, y)| (m - y) * (m - y)).sum::<f64>() / test.y.len() as f64)
}

fn fit_options(cfg: &ExperimentConfig, seed: u64) -> FitOptions {
    FitOptions {
        restarts: cfg.restarts,
        ..FitOptions::default().with_seed(seed)
    }
}

fn run_replication(
    cfg: &ExperimentConfig,
    condition: usize,
    index: usize,
    seed: u64,
    test: Option<&TestSet>,
) -> Result<Replication> {
    let cond = &cfg.conditions[condition];
    let f = &cfg.function;
    let d = f.d_total;
    let streams = Streams::new(seed);
    let d0 = initial_design(cond, d, streams.design, cfg)?;
    let acq = AcquisitionSpec::new(cfg.acquisition).with_seed(streams.acquisition);
    let opts = fit_options(cfg, streams.fit);
    let mut curve = Vec::new();
    let observer = |n: usize, model: &GpModel| -> alkrig::Result<()> {
        if let Some(test) = test {
            curve.push((n, mse(model, test)?));
        }
        Ok(())
    };
    let eval = |x: &[f64]| f.eval_unit(x).unwrap_or(f64::NAN);
    let (model, mut log) = run_active_learning_with(eval, &d0, cfg.budget, cond.family, &acq, &opts, observer)?;
    log.header.function = f.name.clone();
    log.header.seeds.insert(0, ("replication".into(), seed));
    if cfg.mode == Mode::Optimize {
        let f_min = f.f_min().ok_or_else(|| alkrig::Error::MissingKnownMin(f.name.clone()))?;
        let n0 = log.n_initial();
        curve = log.records[n0 - 1..].iter().map(|r| (r.iter + 1, r.best_y - f_min)).collect();
    }
    Ok(Replication {
        condition,
        index,
        seed,
        curve,
        log,
        final_spec: model.spec().clone(),
    })
}

fn run_baseline(cfg: &ExperimentConfig, index: usize, seed: u64, test: &TestSet) -> Result<Vec<BaselineRun>> {
    let d = cfg.function.d_total;
    let streams = Streams::new(seed);
    let design = maxpro_design(cfg.budget, d, streams.design, cfg.anneal_iters)?;
    let y = design
        .points()
        .rows()
        .map(|x| cfg.function.eval_unit(x))
        .collect::<alkrig::Result<Vec<_>>>()?;
    [KernelFamily::Gaussian, KernelFamily::Mim]
        .into_iter()
        .map(|family| {
            let model = GpModel::fit(design.points(), &y, family, &fit_options(cfg, streams.fit))?;
            Ok(BaselineRun {
                family,
                index,
                n: cfg.budget,
                value: mse(&model, test)?,
            })
        })
        .collect()
}

/// Runs every condition on every replication seed. Numerical failures of a
/// replication are recorded, not propagated; configuration errors abort.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let test = match cfg.mode {
        Mode::Emulate => Some(test_set(cfg)?),
        Mode::Optimize => None,
    };
    let seeds = cfg.seeds();
    let jobs: Vec<(usize, usize)> = (0..cfg.conditions.len())
        .flat_map(|c| (0..seeds.len()).map(move |i| (c, i)))
        .collect();
    let outcomes: Vec<Result<Replication>> = jobs
        .par_iter()
        .map(|&(c, i)| run_replication(cfg, c, i, seeds[i], test.as_ref()))
        .collect();

    let mut replications = Vec::new();
    let mut failures = Vec::new();
    for ((c, i), outcome) in jobs.into_iter().zip(outcomes) {
        match outcome {
            Ok(r) => replications.push(r),
            Err(e @ BenchError::Core(_)) if e.is_numerical() => failures.push(ReplicationFailure {
                condition: c,
                index: i,
                error: e.to_string(),
            }),
            Err(e) => return Err(e),
        }
    }

    let mut baselines = Vec::new();
    if let (true, Some(test)) = (cfg.baseline, test.as_ref()) {
        let runs: Vec<Result<Vec<BaselineRun>>> =
            seeds.par_iter().enumerate().map(|(i, &s)| run_baseline(cfg, i, s, test)).collect();
        for r in runs {
            match r {
                Ok(v) => baselines.extend(v),
                Err(e) if e.is_numerical() => {}
                Err(e) => return Err(e),
            }
        }
    }
    Ok(ExperimentResult {
        config: cfg.clone(),
        metric: match cfg.mode {
            Mode::Emulate => "mse",
            Mode::Optimize => "gap",
        },
        replications,
        failures,
        baselines,
    })
}

/// `#` lines opening every output file.
pub fn provenance(command: &str, echo: &[String], timestamp: bool) -> Vec<String> {
    let mut lines = vec![format!("alkrig-bench {}", env!("CARGO_PKG_VERSION")), format!("command={command}")];
    lines.extend(echo.iter().cloned());
    if timestamp {
        let secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        lines.push(format!("timestamp={secs}"));
    }
    lines
}

/// `mofat(44)+mim` becomes `mofat_44_mim`.
fn file_label(label: &str) -> String {
    label
        .split(|c: char| !c.is_ascii_alphanumeric())
        .filter(|s| !s.is_empty())
        .collect::<Vec<_>>()
        .join("_")
}

/// Writes `summary.csv`, `per_seed.csv` and one RunLog per replication under
/// `logs/`. Returns the summary path.
pub fn write_outputs(result: &ExperimentResult, out: &Path, header: &[String]) -> Result<PathBuf> {
    let cfg = &result.config;
    let logs = out.join("logs");
    std::fs::create_dir_all(&logs).map_err(|e| BenchError::io(&logs, e))?;
    let d = cfg.function.d_total;
    for r in &result.replications {
        let label = cfg.conditions[r.condition].label(d);
        let path = logs.join(format!("{}_rep{:02}.csv", file_label(&label), r.index));
        r.log.write_csv(&path, header, cfg.timestamp)?;
    }

    let summary_path = out.join("summary.csv");
    let text = crate::summary::to_csv(&result.summary(), header);
    std::fs::write(&summary_path, text).map_err(|e| BenchError::io(&summary_path, e))?;

    let mut per_seed = String::new();
    for h in header {
        per_seed.push_str(&format!("# {h}\n"));
    }
    for f in &result.failures {
        per_seed.push_str(&format!("# failed: {} replication {}: {}\n", cfg.conditions[f.condition].label(d), f.index, f.error));
    }
    per_seed.push_str("metric,condition,kind,replication,n,value\n");
    for r in &result.replications {
        let label = cfg.conditions[r.condition].label(d);
        for (n, v) in &r.curve {
            per_seed.push_str(&format!("{},{label},sequential,{},{n},{v:.16e}\n", result.metric, r.index));
        }
    }
    for b in &result.baselines {
        per_seed.push_str(&format!(
            "{},maxpro({})+{},baseline,{},{},{:.16e}\n",
            result.metric, b.n, b.family, b.index, b.n, b.value
        ));
    }
    let path = out.join("per_seed.csv");
    std::fs::write(&path, per_seed).map_err(|e| BenchError::io(&path, e))?;
    Ok(summary_path)
}
