//! Command-line grammar and dispatch.
//!
//! Exit codes: 0 on success, 1 for usage and validation errors, 2 for
//! numerical failures (including failed theory checks).

use std::path::{Path, PathBuf};

use alkrig::designs::{
    maximin_lhd, maxpro_design, mofat_heuristic, random_design, random_ofat, read_design_csv, sobol_points,
    write_design_csv, DEFAULT_ANNEAL_ITERS, DEFAULT_MOFAT_ITERS,
};
use alkrig::sensitivity::{elementary_effects, total_sobol, DEFAULT_SOBOL_SAMPLES};
use alkrig::theory::{self, bundled_corpus, check_corpus, parse_corpus, sandwich_check};
use alkrig::{DesignMatrix, FitOptions, Generator, GpModel, KernelFamily, KernelSpec, TestFunction};
use clap::{Args, Parser, Subcommand};

use crate::config::{ConfigMap, ExperimentConfig, Mode};
use crate::error::{BenchError, Result};
use crate::harness::{provenance, run_experiment, write_outputs};
use crate::plot::plot_summary;
use crate::summary::parse_csv;

#[derive(Debug, Parser)]
#[command(name = "alkrig", version, about = "Kriging active-learning experiments")]
struct Cli {
    /// Master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file or directory, depending on the command.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// `key = value` configuration file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Omit timestamps and timings so reruns are byte-identical.
    #[arg(long, global = true)]
    no_timestamp: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate an initial design CSV.
    Design(DesignArgs),
    /// Fit a kriging model and write it as text.
    Fit(FitArgs),
    /// Replicated active-learning emulation experiment.
    Emulate(ExperimentArgs),
    /// Replicated expected-improvement optimization experiment.
    Optimize(ExperimentArgs),
    /// Total Sobol' indices and elementary effects.
    Screen(ScreenArgs),
    /// Small-length-scale limit checks on a corpus of designs.
    CheckTheory(TheoryArgs),
    /// SVG plots of a summary CSV.
    Plot(PlotArgs),
}

#[derive(Debug, Args)]
struct DesignArgs {
    #[arg(long)]
    generator: Option<String>,
    #[arg(long)]
    d: Option<usize>,
    /// Blocks for OFAT-family generators.
    #[arg(long)]
    l: Option<usize>,
    /// Rows for the other generators.
    #[arg(long)]
    n: Option<usize>,
    /// Optimizer iterations (annealing or MOFAT swaps).
    #[arg(long)]
    iters: Option<usize>,
}

#[derive(Debug, Args)]
struct DataArgs {
    /// Design CSV (`x1,...,xd`).
    #[arg(long)]
    design: Option<PathBuf>,
    /// Outputs CSV with a `y` column aligned with the design rows.
    #[arg(long)]
    y: Option<PathBuf>,
    /// Evaluate a catalog function on the design instead of reading outputs.
    #[arg(long)]
    function: Option<String>,
    #[arg(long)]
    kernel: Option<String>,
    #[arg(long)]
    restarts: Option<usize>,
}

#[derive(Debug, Args)]
struct FitArgs {
    #[command(flatten)]
    data: DataArgs,
}

#[derive(Debug, Args)]
struct ExperimentArgs {
    #[arg(long)]
    function: Option<String>,
    /// Comma-separated `generator:kernel[:size]` list.
    #[arg(long)]
    conditions: Option<String>,
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long)]
    acquisition: Option<String>,
    #[arg(long)]
    replications: Option<usize>,
    #[arg(long)]
    n_test: Option<usize>,
    #[arg(long)]
    restarts: Option<usize>,
    /// Skip the batch MaxPro baselines.
    #[arg(long)]
    no_baseline: bool,
}

#[derive(Debug, Args)]
struct ScreenArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Serialized model; replaces fitting.
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    samples: Option<usize>,
}

#[derive(Debug, Args)]
struct TheoryArgs {
    /// Corpus file; defaults to the bundled corpus.
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Debug, Args)]
struct PlotArgs {
    #[arg(long)]
    summary: PathBuf,
}

const SUBCOMMANDS: [&str; 7] = ["design", "fit", "emulate", "optimize", "screen", "check-theory", "plot"];

struct Context {
    map: ConfigMap,
    timestamp: bool,
    command_line: String,
}

impl Context {
    fn seed(&self) -> Result<u64> {
        match self.map.get("seed") {
            Some(v) => v.parse().map_err(|_| BenchError::config("seed", format!("`{v}` is not an integer"))),
            None => Ok(0),
        }
    }

    fn out(&self, default: &str) -> PathBuf {
        PathBuf::from(self.map.get("out").unwrap_or(default))
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.map.get(key)
    }

    fn parsed<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.get(key)
            .map(|v| v.parse::<T>().map_err(|_| BenchError::config(key, format!("cannot parse `{v}`"))))
            .transpose()
    }

    fn header(&self, extra: &[String]) -> Vec<String> {
        provenance(&self.command_line, extra, self.timestamp)
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn main(args: Vec<String>) -> i32 {
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli, &args) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_numerical() {
                2
            } else {
                1
            }
        }
    }
}

fn set_opt<T: ToString>(map: &mut ConfigMap, key: &str, v: &Option<T>) {
    if let Some(v) = v {
        map.set(key, v.to_string());
    }
}

fn run(cli: Cli, args: &[String]) -> Result<()> {
    let mut map = match &cli.config {
        Some(path) => ConfigMap::load(path).map_err(|e| match e {
            BenchError::Io { source, .. } if source.kind() == std::io::ErrorKind::NotFound => {
                BenchError::config("config", format!("file not found: {}", path.display()))
            }
            e => e,
        })?,
        None => ConfigMap::default(),
    };
    set_opt(&mut map, "seed", &cli.seed);
    set_opt(&mut map, "out", &cli.out.as_ref().map(|p| p.display().to_string()));
    if cli.no_timestamp {
        map.set("no_timestamp", "true");
    }
    let timestamp = !matches!(map.get("no_timestamp"), Some("true"));
    // Only the subcommand name: paths in the full argument list would make
    // otherwise identical reruns differ.
    let command_line = args
        .iter()
        .skip(1)
        .find(|a| !a.starts_with('-') && SUBCOMMANDS.contains(&a.as_str()))
        .cloned()
        .unwrap_or_default();
    let mut ctx = Context {
        map,
        timestamp,
        command_line,
    };
    match cli.command {
        Command::Design(a) => design(&mut ctx, a),
        Command::Fit(a) => fit(&mut ctx, a),
        Command::Emulate(a) => experiment(&mut ctx, a, Mode::Emulate),
        Command::Optimize(a) => experiment(&mut ctx, a, Mode::Optimize),
        Command::Screen(a) => screen(&mut ctx, a),
        Command::CheckTheory(a) => check_theory(&mut ctx, a),
        Command::Plot(a) => plot(&ctx, a),
    }
}

fn design(ctx: &mut Context, a: DesignArgs) -> Result<()> {
    set_opt(&mut ctx.map, "generator", &a.generator);
    set_opt(&mut ctx.map, "d", &a.d);
    set_opt(&mut ctx.map, "l", &a.l);
    set_opt(&mut ctx.map, "n", &a.n);
    set_opt(&mut ctx.map, "iters", &a.iters);
    let generator: Generator = ctx
        .get("generator")
        .ok_or_else(|| BenchError::config("generator", "required"))?
        .parse()
        .map_err(|e: alkrig::Error| BenchError::config("generator", e.to_string()))?;
    let d: usize = ctx.parsed("d")?.ok_or_else(|| BenchError::config("d", "required"))?;
    let seed = ctx.seed()?;
    let iters: Option<usize> = ctx.parsed("iters")?;
    let design = if generator.is_ofat_family() {
        let l: usize = ctx.parsed("l")?.ok_or_else(|| BenchError::config("l", format!("required for {generator}")))?;
        match generator {
            Generator::Mofat => mofat_heuristic(d, l, seed, iters.unwrap_or(DEFAULT_MOFAT_ITERS))?,
            _ => random_ofat(d, l, seed)?,
        }
    } else {
        let n: usize = ctx.parsed("n")?.ok_or_else(|| BenchError::config("n", format!("required for {generator}")))?;
        let anneal = iters.unwrap_or(DEFAULT_ANNEAL_ITERS);
        match generator {
            Generator::MaximinLhd => maximin_lhd(n, d, seed, anneal)?,
            Generator::MaxPro => maxpro_design(n, d, seed, anneal)?,
            Generator::Sobol => sobol_points(n, d, 1)?,
            Generator::Random => random_design(n, d, seed)?,
            g => return Err(BenchError::config("generator", format!("cannot generate a `{g}` design"))),
        }
    };
    let out = ctx.out("design.csv");
    let header = ctx.header(&[format!("generator={generator}"), format!("d={d}"), format!("seed={seed}")]);
    write_design_csv(&design, &out, &header)?;
    println!("{} rows written to {}", design.len(), out.display());
    Ok(())
}

fn read_outputs(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let col = reader
        .headers()?
        .iter()
        .position(|h| h == "y")
        .ok_or_else(|| BenchError::config("y", format!("{}: no `y` column", path.display())))?;
    reader
        .records()
        .enumerate()
        .map(|(i, r)| {
            let r = r?;
            let cell = r.get(col).unwrap_or_default();
            cell.parse::<f64>()
                .map_err(|_| BenchError::config("y", format!("row {}: `{cell}` is not a number", i + 1)))
        })
        .collect()
}

struct Data {
    design: DesignMatrix,
    y: Vec<f64>,
}

fn load_data(a: &DataArgs) -> Result<Data> {
    let path = a.design.as_ref().ok_or_else(|| BenchError::config("design", "required"))?;
    let design = read_design_csv(path)?;
    let y = match (&a.y, &a.function) {
        (Some(p), None) => read_outputs(p)?,
        (None, Some(name)) => {
            let f = TestFunction::by_name(name).map_err(|e| BenchError::config("function", e.to_string()))?;
            design.points().rows().map(|x| f.eval_unit(x)).collect::<alkrig::Result<_>>()?
        }
        _ => return Err(BenchError::config("y", "give exactly one of --y or --function")),
    };
    if y.len() != design.len() {
        return Err(BenchError::config(
            "y",
            format!("{} outputs for a design of {} rows", y.len(), design.len()),
        ));
    }
    Ok(Data { design, y })
}

fn fit_model(ctx: &Context, a: &DataArgs, data: &Data) -> Result<GpModel> {
    let family: KernelFamily = match &a.kernel {
        Some(k) => k.parse().map_err(|e: alkrig::Error| BenchError::config("kernel", e.to_string()))?,
        None => KernelFamily::Gaussian,
    };
    let mut opts = FitOptions::default().with_seed(ctx.seed()?);
    if let Some(r) = a.restarts {
        opts.restarts = r;
    }
    opts.validate()?;
    Ok(GpModel::fit(data.design.points(), &data.y, family, &opts)?)
}

fn fit(ctx: &mut Context, a: FitArgs) -> Result<()> {
    let data = load_data(&a.data)?;
    let model = fit_model(ctx, &a.data, &data)?;
    let out = ctx.out("model.txt");
    model.save(&out, &ctx.header(&[]))?;
    let spec: &KernelSpec = model.spec();
    println!("{} fit on {} points, nll {:?}, written to {}", spec.family, model.len(), model.nll(), out.display());
    Ok(())
}

fn experiment(ctx: &mut Context, a: ExperimentArgs, mode: Mode) -> Result<()> {
    let map = &mut ctx.map;
    set_opt(map, "function", &a.function);
    set_opt(map, "conditions", &a.conditions);
    set_opt(map, "budget", &a.budget);
    set_opt(map, "acquisition", &a.acquisition);
    set_opt(map, "replications", &a.replications);
    set_opt(map, "n_test", &a.n_test);
    set_opt(map, "restarts", &a.restarts);
    if a.no_baseline {
        map.set("baseline", "false");
    }
    let cfg = ExperimentConfig::from_map(&ctx.map, mode)?;
    let result = run_experiment(&cfg)?;
    let header = ctx.header(&cfg.echo());
    let summary = write_outputs(&result, &cfg.out, &header)?;
    for f in &result.failures {
        eprintln!("warning: replication {} of condition {} failed: {}", f.index, f.condition, f.error);
    }
    println!("summary written to {}", summary.display());
    Ok(())
}

fn screen(ctx: &mut Context, a: ScreenArgs) -> Result<()> {
    let seed = ctx.seed()?;
    let (model, effects) = match &a.model {
        Some(path) => (GpModel::load(path)?, None),
        None => {
            let data = load_data(&a.data)?;
            let model = fit_model(ctx, &a.data, &data)?;
            let effects = if data.design.blocks().is_empty() {
                None
            } else {
                Some(elementary_effects(&data.design, &data.y)?)
            };
            (model, effects)
        }
    };
    let n = a.samples.unwrap_or(DEFAULT_SOBOL_SAMPLES);
    let predictor = |x: &[f64]| model.predict(x).map(|p| p.mean).unwrap_or(f64::NAN);
    let report = total_sobol(predictor, model.dim(), n, seed)?;
    let mut s = String::new();
    for h in ctx.header(&[
        format!("estimator={}", report.estimator),
        format!("n_samples={}", report.n_samples),
        format!("seed={}", report.seed),
    ]) {
        s.push_str(&format!("# {h}\n"));
    }
    s.push_str("factor,total_index,mu_star,sigma\n");
    for (k, t) in report.total_indices.iter().enumerate() {
        let (mu, sd) = match &effects {
            Some(e) => (format!("{:.16e}", e.mu_star[k]), format!("{:.16e}", e.sigma[k])),
            None => (String::new(), String::new()),
        };
        s.push_str(&format!("x{},{t:.16e},{mu},{sd}\n", k + 1));
    }
    write_or_print(ctx.get("out").map(PathBuf::from), &s)
}

fn write_or_print(out: Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(&path, text).map_err(|e| BenchError::io(&path, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn check_theory(ctx: &mut Context, a: TheoryArgs) -> Result<()> {
    let corpus = match &a.corpus {
        Some(p) => parse_corpus(&std::fs::read_to_string(p).map_err(|e| BenchError::io(p, e))?)?,
        None => bundled_corpus(),
    };
    let tol = a.tol.unwrap_or(theory::DEFAULT_TOL);
    let results = check_corpus(&corpus, &theory::CORPUS_ALPHAS, &theory::DEFAULT_THETAS, tol)?;
    let mut sandwich_failures = 0;
    for c in &corpus {
        for &alpha in &theory::CORPUS_ALPHAS {
            for family in [KernelFamily::Gaussian, KernelFamily::Mim] {
                let spec = KernelSpec::isotropic(family, c.design.dim(), 0.3, alpha, 0.0)?;
                if !sandwich_check(&spec, &c.design, &c.x)?.holds() {
                    sandwich_failures += 1;
                }
            }
        }
    }
    let failed = results.iter().filter(|r| !r.report.converged).count() + sandwich_failures;
    let total = results.len() + corpus.len() * theory::CORPUS_ALPHAS.len() * 2;
    let header = ctx.header(&[
        format!("instances={}", corpus.len()),
        format!("tol={tol}"),
        format!("sandwich_failures={sandwich_failures}"),
    ]);
    let text = theory::report_csv(&results, &header);
    let out = ctx.out("theory_report.csv");
    std::fs::write(&out, text).map_err(|e| BenchError::io(&out, e))?;
    println!("{} of {total} checks passed, report written to {}", total - failed, out.display());
    if failed > 0 {
        return Err(BenchError::TheoryFailed { failed, total });
    }
    Ok(())
}

fn plot(ctx: &Context, a: PlotArgs) -> Result<()> {
    let text = std::fs::read_to_string(&a.summary).map_err(|e| BenchError::io(&a.summary, e))?;
    let rows = parse_csv(&text)?;
    let out = ctx.out(".");
    for p in plot_summary(&rows, &out)? {
        println!("{}", p.display());
    }
    Ok(())
}
