//! ALM and EI acquisitions and the sequential active-learning loop.
//!
//! Minimization convention: EI rewards predicted improvement below the
//! incumbent `y* = min y`. Each iteration maximizes the acquisition on the unit
//! cube, evaluates the black box at the winner, appends it and refits the
//! hyperparameters with the previous optimum as a warm start.

use std::fmt;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use crate::designs::DesignMatrix;
use crate::error::{Error, Result};
use crate::gp::{FitOptions, GpModel};
use crate::kernels::KernelFamily;
use crate::numeric::{derive_seed, norm_cdf, norm_pdf, search_box, BoxOptimizerConfig};
use crate::points::Points;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AcquisitionKind {
    /// Largest posterior variance.
    Alm,
    /// Expected improvement over the incumbent.
    Ei,
}

impl AcquisitionKind {
    pub fn name(self) -> &'static str {
        match self {
            AcquisitionKind::Alm => "alm",
            AcquisitionKind::Ei => "ei",
        }
    }
}

impl fmt::Display for AcquisitionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AcquisitionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "alm" => Ok(AcquisitionKind::Alm),
            "ei" => Ok(AcquisitionKind::Ei),
            _ => Err(Error::InvalidArgument(format!("unknown acquisition `{s}` (expected alm or ei)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AcquisitionSpec {
    pub kind: AcquisitionKind,
    pub optimizer: BoxOptimizerConfig,
    /// Infinity-norm radius within which a candidate counts as a duplicate.
    pub duplicate_tol: f64,
    /// Posterior standard deviations at or below this use the noiseless EI.
    pub s_floor: f64,
}

impl AcquisitionSpec {
    pub fn new(kind: AcquisitionKind) -> Self {
        Self {
            kind,
            optimizer: BoxOptimizerConfig::default(),
            duplicate_tol: 1e-8,
            s_floor: 1e-12,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.optimizer.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duplicate_tol > 0.0) || !(self.s_floor > 0.0) {
            return Err(Error::InvalidArgument("duplicate_tol and s_floor must be positive".into()));
        }
        self.optimizer.validate()
    }

    /// Acquisition value at `x`; larger is better.
    pub fn score(&self, model: &GpModel<f64>, x: &[f64]) -> Result<f64> {
        match self.kind {
            AcquisitionKind::Alm => alm_score(model, x),
            AcquisitionKind::Ei => {
                let p = model.predict(x)?;
                Ok(ei_from_moments(p.mean, p.variance.sqrt(), model.best_y(), self.s_floor))
            }
        }
    }
}

pub fn alm_score(model: &GpModel<f64>, x: &[f64]) -> Result<f64> {
    Ok(model.predict(x)?.variance)
}

/// `E max(y* - Y, 0)` for `Y ~ N(y_hat, s^2)`.
pub fn ei_from_moments(y_hat: f64, s: f64, y_star: f64, s_floor: f64) -> f64 {
    let gap = y_star - y_hat;
    if !(s > s_floor) {
        return gap.max(0.0);
    }
    let u = gap / s;
    (gap * norm_cdf(u) + s * norm_pdf(u)).max(0.0)
}

pub fn expected_improvement(model: &GpModel<f64>, x: &[f64], y_star: f64) -> Result<f64> {
    let p = model.predict(x)?;
    Ok(ei_from_moments(p.mean, p.variance.sqrt(), y_star, 1e-12))
}

#[derive(Debug, Clone, PartialEq)]
pub struct NextPoint {
    pub x: Vec<f64>,
    pub value: f64,
    /// The duplicate fallback moved the point off an existing design point.
    pub perturbed: bool,
}

pub fn next_point(model: &GpModel<f64>, spec: &AcquisitionSpec) -> Result<NextPoint> {
    spec.validate()?;
    let d = model.dim();
    let objective = |x: &[f64]| spec.score(model, x).unwrap_or(f64::NEG_INFINITY);
    let ranked = search_box(objective, d, &spec.optimizer);
    let design = model.design();
    if let Some(best) = ranked.iter().find(|c| design.find_within(&c.x, spec.duplicate_tol).is_none()) {
        return Ok(NextPoint {
            x: best.x.clone(),
            value: best.value,
            perturbed: false,
        });
    }
    let mut x = ranked[0].x.clone();
    let k = least_varied_column(design);
    let step = spec.duplicate_tol * 1e3;
    let moved = (x[k] + step).clamp(0.0, 1.0);
    x[k] = if moved != x[k] { moved } else { (x[k] - step).clamp(0.0, 1.0) };
    let value = spec.score(model, &x)?;
    Ok(NextPoint { x, value, perturbed: true })
}

fn least_varied_column(design: &Points<f64>) -> usize {
    let n = design.len() as f64;
    let var = |k: usize| {
        let col = design.column(k);
        let m = col.iter().sum::<f64>() / n;
        col.iter().map(|v| (v - m) * (v - m)).sum::<f64>()
    };
    (0..design.dim())
        .min_by(|&a, &b| var(a).partial_cmp(&var(b)).unwrap_or(std::cmp::Ordering::Equal))
        .unwrap_or(0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunHeader {
    pub function: String,
    pub d: usize,
    pub family: KernelFamily,
    pub generator: String,
    pub acquisition: AcquisitionKind,
    pub seeds: Vec<(String, u64)>,
    pub budget: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub iter: usize,
    pub x: Vec<f64>,
    pub y: f64,
    /// Incumbent after this evaluation.
    pub best_y: f64,
    /// `None` for initial-design rows.
    pub acq_value: Option<f64>,
    pub elapsed_ms: f64,
    pub perturbed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunLog {
    pub header: RunHeader,
    pub records: Vec<RunRecord>,
}

impl RunLog {
    pub fn new(header: RunHeader) -> Self {
        Self { header, records: Vec::new() }
    }

    pub fn push(&mut self, x: Vec<f64>, y: f64, acq_value: Option<f64>, elapsed_ms: f64, perturbed: bool) {
        let best_y = self.records.last().map_or(y, |r| r.best_y.min(y));
        self.records.push(RunRecord {
            iter: self.records.len(),
            x,
            y,
            best_y,
            acq_value,
            elapsed_ms,
            perturbed,
        });
    }

    pub fn n_initial(&self) -> usize {
        self.records.iter().take_while(|r| r.acq_value.is_none()).count()
    }

    pub fn best_y(&self) -> Option<f64> {
        self.records.last().map(|r| r.best_y)
    }

    /// Points chosen by the acquisition, in order.
    pub fn sequential_points(&self) -> Points<f64> {
        let mut p = Points::new(self.header.d);
        for r in self.records.iter().filter(|r| r.acq_value.is_some()) {
            p.push(&r.x).expect("records share the header dimension");
        }
        p
    }

    /// CSV text. With `timing == false` the elapsed column is written as 0 so
    /// that runs with equal seeds produce identical files.
    pub fn to_csv(&self, extra_comments: &[String], timing: bool) -> String {
        let h = &self.header;
        let mut s = String::new();
        for c in extra_comments {
            writeln!(s, "# {c}").unwrap();
        }
        writeln!(s, "# function={}", h.function).unwrap();
        writeln!(s, "# d={}", h.d).unwrap();
        writeln!(s, "# kernel={}", h.family).unwrap();
        writeln!(s, "# design={}", h.generator).unwrap();
        writeln!(s, "# acquisition={}", h.acquisition).unwrap();
        for (name, seed) in &h.seeds {
            writeln!(s, "# seed.{name}={seed}").unwrap();
        }
        writeln!(s, "# budget={}", h.budget).unwrap();
        let perturbed: Vec<String> = self.records.iter().filter(|r| r.perturbed).map(|r| r.iter.to_string()).collect();
        if !perturbed.is_empty() {
            writeln!(s, "# perturbed_iters={}", perturbed.join(";")).unwrap();
        }
        s.push_str("iter");
        for k in 1..=h.d {
            write!(s, ",x{k}").unwrap();
        }
        s.push_str(",y,best_y,acq_value,elapsed_ms\n");
        for r in &self.records {
            write!(s, "{}", r.iter).unwrap();
            for v in &r.x {
                write!(s, ",{v:.16e}").unwrap();
            }
            write!(s, ",{:.16e},{:.16e},", r.y, r.best_y).unwrap();
            if let Some(a) = r.acq_value {
                write!(s, "{a:.16e}").unwrap();
            }
            let ms = if timing { r.elapsed_ms } else { 0.0 };
            writeln!(s, ",{ms:.3}").unwrap();
        }
        s
    }

    pub fn write_csv(&self, path: impl AsRef<Path>, extra_comments: &[String], timing: bool) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv(extra_comments, timing)).map_err(|e| Error::io(path, e))
    }
}

fn evaluate<F: FnMut(&[f64]) -> f64>(f: &mut F, x: &[f64]) -> Result<f64> {
    let y = f(x);
    if y.is_finite() {
        Ok(y)
    } else {
        Err(Error::InvalidArgument(format!("black box returned {y} at {x:?}")))
    }
}

/// Runs the loop until `n_total` evaluations; see [`run_active_learning_with`].
pub fn run_active_learning<F>(
    f: F,
    d0: &DesignMatrix,
    n_total: usize,
    family: KernelFamily,
    acq: &AcquisitionSpec,
    fit_opts: &FitOptions,
) -> Result<(GpModel<f64>, RunLog)>
where
    F: FnMut(&[f64]) -> f64,
{
    run_active_learning_with(f, d0, n_total, family, acq, fit_opts, |_, _| Ok(()))
}

/// As [`run_active_learning`], calling `observer(n, model)` after every fit,
/// where `n` is the number of evaluations behind the model.
///
/// Iteration `t` (0-based, counted from the first sequential point) uses the
/// acquisition seed `derive_seed(acq.optimizer.seed, t)` and the fit seed
/// `derive_seed(fit_opts.seed, t + 1)`; the initial fit uses
/// `derive_seed(fit_opts.seed, 0)`.
pub fn run_active_learning_with<F, O>(
    mut f: F,
    d0: &DesignMatrix,
    n_total: usize,
    family: KernelFamily,
    acq: &AcquisitionSpec,
    fit_opts: &FitOptions,
    mut observer: O,
) -> Result<(GpModel<f64>, RunLog)>
where
    F: FnMut(&[f64]) -> f64,
    O: FnMut(usize, &GpModel<f64>) -> Result<()>,
{
    acq.validate()?;
    let n0 = d0.len();
    if n_total < n0 {
        return Err(Error::InvalidArgument(format!(
            "budget {n_total} is smaller than the initial design ({n0} rows)"
        )));
    }
    let d = d0.dim();
    let mut log = RunLog::new(RunHeader {
        function: "anonymous".into(),
        d,
        family,
        generator: d0.generator().to_string(),
        acquisition: acq.kind,
        seeds: vec![
            ("design".into(), d0.seed().unwrap_or(0)),
            ("fit".into(), fit_opts.seed),
            ("acquisition".into(), acq.optimizer.seed),
        ],
        budget: n_total,
    });

    let mut design = d0.points().clone();
    let mut y = Vec::with_capacity(n_total);
    for x in design.rows() {
        let start = Instant::now();
        let v = evaluate(&mut f, x)?;
        y.push(v);
        log.push(x.to_vec(), v, None, start.elapsed().as_secs_f64() * 1e3, false);
    }

    let wrap = |iteration: usize| move |e: Error| Error::AtIteration { iteration, source: Box::new(e) };
    let mut opts = fit_opts.clone().with_seed(derive_seed(fit_opts.seed, 0));
    let mut model = GpModel::fit(&design, &y, family, &opts).map_err(wrap(n0))?;
    observer(n0, &model)?;

    for t in 0..n_total - n0 {
        let iteration = n0 + t;
        let start = Instant::now();
        let spec = acq.clone().with_seed(derive_seed(acq.optimizer.seed, t as u64));
        let next = next_point(&model, &spec).map_err(wrap(iteration))?;
        let v = evaluate(&mut f, &next.x).map_err(wrap(iteration))?;
        design.push(&next.x)?;
        y.push(v);

        let s = model.spec();
        opts = fit_opts.clone().with_seed(derive_seed(fit_opts.seed, t as u64 + 1));
        opts.warm_start = Some((s.theta.clone(), s.alpha));
        model = GpModel::fit(&design, &y, family, &opts).map_err(wrap(iteration))?;
        log.push(next.x, v, Some(next.value), start.elapsed().as_secs_f64() * 1e3, next.perturbed);
        observer(iteration + 1, &model)?;
    }
    Ok((model, log))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::designs::Generator;
    use crate::kernels::KernelSpec;
    use rand::Rng;

    fn single_center_model(theta: f64) -> GpModel<f64> {
        let design = Points::from_rows(2, &[[0.5, 0.5]]).unwrap();
        let spec = KernelSpec::isotropic(KernelFamily::Gaussian, 2, theta, 1.0, 1e-6).unwrap();
        GpModel::with_parameters(&design, &[1.0], spec, 0.0, 1.0).unwrap()
    }

    #[test]
    fn ei_closed_form_specializations() {
        assert_eq!(ei_from_moments(-2.0, 0.0, 0.0, 1e-12), 2.0);
        assert_eq!(ei_from_moments(3.0, 0.0, 0.0, 1e-12), 0.0);
        assert!((ei_from_moments(0.0, 1.0, 0.0, 1e-12) - 0.398_942_280_401_432_7).abs() < 1e-12);
    }

    #[test]
    fn ei_matches_monte_carlo() {
        let mut rng = crate::numeric::seeded_rng(11);
        let n = 2_000_000;
        let mut acc = 0.0;
        for _ in 0..n / 2 {
            // Box-Muller, both branches.
            let (u1, u2): (f64, f64) = (1.0 - rng.random::<f64>(), rng.random::<f64>());
            let r = (-2.0 * u1.ln()).sqrt();
            for z in [r * (2.0 * std::f64::consts::PI * u2).cos(), r * (2.0 * std::f64::consts::PI * u2).sin()] {
                acc += (0.0 - (1.0 + z)).max(0.0);
            }
        }
        let mc = acc / n as f64;
        assert!((ei_from_moments(1.0, 1.0, 0.0, 1e-12) - mc).abs() < 2e-3, "mc {mc}");
    }

    #[test]
    fn ei_shift_invariant_and_nonnegative() {
        for &(m, s, ys) in &[(0.3, 0.2, 0.1), (-1.0, 1e-3, 4.0), (10.0, 0.5, -3.0)] {
            let a = ei_from_moments(m, s, ys, 1e-12);
            let b = ei_from_moments(m + 123.0, s, ys + 123.0, 1e-12);
            assert!(a >= 0.0 && (a - b).abs() <= 1e-10);
        }
    }

    #[test]
    fn alm_next_point_goes_to_a_corner() {
        let model = single_center_model(0.3);
        let spec = AcquisitionSpec::new(AcquisitionKind::Alm);
        let next = next_point(&model, &spec).unwrap();
        // Grid oracle: the variance is radial, so the 101^2 grid maximum is a
        // corner.
        let mut best = (f64::NEG_INFINITY, vec![]);
        for i in 0..=100 {
            for j in 0..=100 {
                let x = [i as f64 / 100.0, j as f64 / 100.0];
                let v = alm_score(&model, &x).unwrap();
                if v > best.0 {
                    best = (v, x.to_vec());
                }
            }
        }
        assert!(best.1.iter().all(|v| *v == 0.0 || *v == 1.0));
        let corner_dist = next.x.iter().map(|v| v.min(1.0 - v)).fold(0.0, f64::max);
        assert!(corner_dist <= 1e-2, "{:?}", next.x);
        assert_eq!(next, next_point(&model, &spec).unwrap());
    }

    #[test]
    fn fallback_perturbs_off_a_duplicate() {
        let model = single_center_model(0.3);
        let mut spec = AcquisitionSpec::new(AcquisitionKind::Alm);
        // Wide tolerance: every candidate counts as a duplicate.
        spec.duplicate_tol = 2.0;
        spec.optimizer.n_candidates = 10;
        spec.optimizer.n_polish_starts = 2;
        let next = next_point(&model, &spec).unwrap();
        assert!(next.perturbed);
        assert!(next.x.iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn alm_scales_with_sigma2() {
        let design = Points::from_rows(2, &[[0.2, 0.3], [0.8, 0.6], [0.4, 0.9]]).unwrap();
        let spec = KernelSpec::isotropic(KernelFamily::Mim, 2, 0.2, 1.0, 1e-6).unwrap();
        let y = [1.0, 2.0, 0.5];
        let a = GpModel::with_parameters(&design, &y, spec.clone(), 0.0, 1.0).unwrap();
        let b = GpModel::with_parameters(&design, &y, spec, 0.0, 7.0).unwrap();
        let acq = AcquisitionSpec::new(AcquisitionKind::Alm);
        let na = next_point(&a, &acq).unwrap();
        let nb = next_point(&b, &acq).unwrap();
        assert_eq!(na.x, nb.x);
        assert!((nb.value - 7.0 * na.value).abs() <= 1e-12 * nb.value);
    }

    #[test]
    fn ei_finds_quadratic_minimum() {
        let d0 = DesignMatrix::imported(Points::from_rows(1, &[[0.1], [0.9]]).unwrap()).unwrap();
        let acq = AcquisitionSpec::new(AcquisitionKind::Ei);
        let (model, log) = run_active_learning(
            |x| (x[0] - 0.3).powi(2),
            &d0,
            10,
            KernelFamily::Gaussian,
            &acq,
            &FitOptions::default(),
        )
        .unwrap();
        assert_eq!(model.len(), 10);
        assert!(log.best_y().unwrap() <= 1e-3, "{:?}", log.best_y());
        assert!(log.records.windows(2).all(|w| w[1].best_y <= w[0].best_y));
    }

    #[test]
    fn zero_sequential_iterations() {
        let d0 = DesignMatrix::new(
            Points::from_rows(1, &[[0.1], [0.5], [0.9]]).unwrap(),
            Generator::Imported,
            None,
        )
        .unwrap();
        let acq = AcquisitionSpec::new(AcquisitionKind::Alm);
        let (_, log) = run_active_learning(|x| x[0], &d0, 3, KernelFamily::Mim, &acq, &FitOptions::default()).unwrap();
        assert_eq!(log.records.len(), 3);
        assert_eq!(log.n_initial(), 3);
        let csv = log.to_csv(&[], false);
        let header = csv.lines().find(|l| !l.starts_with('#')).unwrap();
        assert_eq!(header, "iter,x1,y,best_y,acq_value,elapsed_ms");
        assert!(csv.lines().last().unwrap().contains(",,0.000"));
        assert!(run_active_learning(|x| x[0], &d0, 2, KernelFamily::Mim, &acq, &FitOptions::default()).is_err());
    }

    #[test]
    fn errors_carry_the_iteration() {
        let d0 = DesignMatrix::imported(Points::from_rows(1, &[[0.1], [0.9]]).unwrap()).unwrap();
        let acq = AcquisitionSpec::new(AcquisitionKind::Alm);
        let mut calls = 0;
        let f = |x: &[f64]| {
            calls += 1;
            if calls > 3 {
                f64::NAN
            } else {
                x[0]
            }
        };
        let err = run_active_learning(f, &d0, 6, KernelFamily::Gaussian, &acq, &FitOptions::default()).unwrap_err();
        assert!(matches!(err, Error::AtIteration { iteration: 3, .. }), "{err}");
    }
}
