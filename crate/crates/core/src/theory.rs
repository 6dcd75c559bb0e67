//! Small length-scale limits of the kriging variance.
//!
//! With `R` and `r(x)` from an inverse-multiquadric kernel and `eta = 0`,
//! `(sigma2 - s2(x)) / sigma2 = r' R^{-1} r`, and as the length scale shrinks
//!
//! * isotropic IM: `r' R^{-1} r / theta^{4 alpha} -> sum_i ||x - x_i||^{-4 alpha}`,
//! * MIM with equal `theta_k`:
//!   `r' R^{-1} r prod_k theta_k^{-4 alpha} -> sum_i prod_k |x_k - x_ik|^{-4 alpha}`.
//!
//! The right-hand sides are the sequential maximin and MaxPro criteria, so ALM
//! under these kernels tends to those designs. Both sides are accumulated in
//! log space; the quadratic form is always one triangular solve on `r`, never a
//! difference of variances.

use std::fmt::Write as _;

use rand::Rng;

use crate::error::{Error, Result};
use crate::kernels::{correlation_matrix, KernelFamily, KernelSpec};
use crate::numeric::{cholesky, seeded_rng, symmetric_eigenvalues, CholeskyFactor, Matrix};
use crate::points::Points;

pub const DEFAULT_THETAS: [f64; 3] = [1e-1, 1e-2, 1e-3];
pub const DEFAULT_TOL: f64 = 0.01;
/// Minimum separation (infinity norm, or per coordinate for the MIM limit)
/// between `x` and the design.
pub const MIN_SEPARATION: f64 = 1e-3;
const SANDWICH_SLACK: f64 = 1e-10;
// Fallback nugget when the exact correlation matrix will not factor.
const FALLBACK_NUGGET: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Theorem {
    /// Isotropic IM kernel, Euclidean distances.
    Isotropic,
    /// MIM kernel, coordinate-wise products.
    Product,
}

impl Theorem {
    pub fn name(self) -> &'static str {
        match self {
            Theorem::Isotropic => "theorem1",
            Theorem::Product => "theorem2",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitCheckReport {
    pub theorem: Theorem,
    pub alpha: f64,
    pub theta_sequence: Vec<f64>,
    pub lhs_values: Vec<f64>,
    pub rhs_value: f64,
    pub log_lhs: Vec<f64>,
    pub log_rhs: f64,
    /// `|lhs / rhs - 1|` per length scale.
    pub relative_errors: Vec<f64>,
    pub tol: f64,
    /// Last relative error within `tol`.
    pub converged: bool,
    /// Some factorization needed a nugget to succeed.
    pub jitter_used: bool,
}

fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::INFINITY || m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

fn check_thetas(thetas: &[f64]) -> Result<()> {
    if thetas.is_empty() || thetas.iter().any(|t| !(*t > 0.0)) || thetas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument(
            "theta sequence must be nonempty, positive and strictly decreasing".into(),
        ));
    }
    Ok(())
}

fn check_inputs(design: &Points<f64>, x: &[f64], alpha: f64) -> Result<()> {
    if design.is_empty() {
        return Err(Error::EmptyDesign);
    }
    if x.len() != design.dim() {
        return Err(Error::DimensionMismatch {
            expected: design.dim(),
            got: x.len(),
        });
    }
    if !(alpha > 0.0) {
        return Err(Error::InvalidArgument(format!("alpha must be positive, got {alpha}")));
    }
    Ok(())
}

/// Factor of `R` without a nugget if possible; otherwise with escalating
/// jitter from [`FALLBACK_NUGGET`].
fn factor(spec: &KernelSpec<f64>, design: &Points<f64>) -> Result<CholeskyFactor<f64>> {
    let r = correlation_matrix(spec, design)?;
    match cholesky(&r, 0.0) {
        Ok(c) => Ok(c),
        Err(_) => cholesky(&add_diagonal(&r, FALLBACK_NUGGET), FALLBACK_NUGGET),
    }
}

fn add_diagonal(r: &Matrix<f64>, v: f64) -> Matrix<f64> {
    let n = r.n_rows();
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| r[(i, j)] + if i == j { v } else { 0.0 }).collect())
        .collect();
    Matrix::from_rows(&rows).expect("square matrix")
}

/// `ln(r' R^{-1} r)`, with `r` rescaled by its largest entry before the solve.
fn log_quad(spec: &KernelSpec<f64>, design: &Points<f64>, x: &[f64]) -> Result<(f64, bool)> {
    let chol = factor(spec, design)?;
    let ln_r: Vec<f64> = design.rows().map(|xi| spec.ln_eval(x, xi)).collect::<Result<_>>()?;
    let m = ln_r.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let scaled: Vec<f64> = ln_r.iter().map(|v| (v - m).exp()).collect();
    let q = chol.quad_form(&scaled)?;
    Ok((2.0 * m + q.ln(), chol.jitter_used() > 0.0))
}

fn report(
    theorem: Theorem,
    alpha: f64,
    thetas: &[f64],
    log_lhs: Vec<f64>,
    log_rhs: f64,
    tol: f64,
    jitter_used: bool,
) -> LimitCheckReport {
    let relative_errors: Vec<f64> = log_lhs.iter().map(|l| (l - log_rhs).exp_m1().abs()).collect();
    let converged = relative_errors.last().is_some_and(|e| *e <= tol);
    LimitCheckReport {
        theorem,
        alpha,
        theta_sequence: thetas.to_vec(),
        lhs_values: log_lhs.iter().map(|v| v.exp()).collect(),
        rhs_value: log_rhs.exp(),
        log_lhs,
        log_rhs,
        relative_errors,
        tol,
        converged,
        jitter_used,
    }
}

/// Isotropic IM limit at `x`.
pub fn theorem1_check(design: &Points<f64>, x: &[f64], alpha: f64, thetas: &[f64], tol: f64) -> Result<LimitCheckReport> {
    check_inputs(design, x, alpha)?;
    check_thetas(thetas)?;
    if let Some(row) = design.find_within(x, MIN_SEPARATION * (1.0 - 1e-12)) {
        return Err(Error::PointInDesign { row: row + 1, tol: MIN_SEPARATION });
    }
    let log_rhs = sequential_criterion_ln(design, x, alpha, CriterionKind::Maximin)?;
    let mut log_lhs = Vec::with_capacity(thetas.len());
    let mut jitter = false;
    for &theta in thetas {
        let spec = KernelSpec::isotropic(KernelFamily::Im, design.dim(), theta, alpha, 0.0)?;
        let (lq, j) = log_quad(&spec, design, x)?;
        jitter |= j;
        log_lhs.push(lq - 4.0 * alpha * theta.ln());
    }
    Ok(report(Theorem::Isotropic, alpha, thetas, log_lhs, log_rhs, tol, jitter))
}

/// MIM limit at `x` with all length scales equal.
pub fn theorem2_check(design: &Points<f64>, x: &[f64], alpha: f64, thetas: &[f64], tol: f64) -> Result<LimitCheckReport> {
    check_inputs(design, x, alpha)?;
    check_thetas(thetas)?;
    check_coordinates(design, x, MIN_SEPARATION * (1.0 - 1e-12))?;
    let d = design.dim() as f64;
    let log_rhs = sequential_criterion_ln(design, x, alpha, CriterionKind::MaxPro)?;
    let mut log_lhs = Vec::with_capacity(thetas.len());
    let mut jitter = false;
    for &theta in thetas {
        let spec = KernelSpec::isotropic(KernelFamily::Mim, design.dim(), theta, alpha, 0.0)?;
        let (lq, j) = log_quad(&spec, design, x)?;
        jitter |= j;
        log_lhs.push(lq - 4.0 * alpha * d * theta.ln());
    }
    Ok(report(Theorem::Product, alpha, thetas, log_lhs, log_rhs, tol, jitter))
}

fn check_coordinates(design: &Points<f64>, x: &[f64], tol: f64) -> Result<()> {
    for (i, row) in design.rows().enumerate() {
        if let Some(k) = row.iter().zip(x).position(|(a, b)| (a - b).abs() < tol) {
            return Err(Error::CoordinateCollision { row: i + 1, col: k + 1, tol });
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sandwich {
    /// `r'r / lambda_max`
    pub lower: f64,
    pub quad: f64,
    /// `r'r / lambda_min`
    pub upper: f64,
}

impl Sandwich {
    pub fn holds(&self) -> bool {
        let slack = SANDWICH_SLACK * self.upper.abs().max(1.0);
        self.lower <= self.quad + slack && self.quad <= self.upper + slack
    }
}

/// Eigenvalue bounds on `r' R^{-1} r`. Any jitter added by the factorization
/// is added to the eigenvalues as well, so the three numbers refer to one
/// matrix.
pub fn sandwich_check(spec: &KernelSpec<f64>, design: &Points<f64>, x: &[f64]) -> Result<Sandwich> {
    let r_mat = correlation_matrix(spec, design)?;
    let chol = cholesky(&r_mat, spec.nugget)?;
    let extra = chol.jitter_used() - spec.nugget;
    let eig = symmetric_eigenvalues(&r_mat)?;
    let (lmin, lmax) = (eig[0] + extra, eig[eig.len() - 1] + extra);
    let r: Vec<f64> = design.rows().map(|xi| spec.eval(x, xi)).collect::<Result<_>>()?;
    let rr: f64 = r.iter().map(|v| v * v).sum();
    Ok(Sandwich {
        lower: rr / lmax,
        quad: chol.quad_form(&r)?,
        upper: rr / lmin,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CriterionKind {
    /// `sum_i ||x - x_i||^{-4 alpha}`
    Maximin,
    /// `sum_i prod_k |x_k - x_ik|^{-4 alpha}`
    MaxPro,
}

/// Natural log of the sequential criterion; `+inf` on an exact collision.
pub fn sequential_criterion_ln(design: &Points<f64>, x: &[f64], alpha: f64, kind: CriterionKind) -> Result<f64> {
    check_inputs(design, x, alpha)?;
    let terms: Vec<f64> = design
        .rows()
        .map(|xi| match kind {
            CriterionKind::Maximin => {
                let d2: f64 = xi.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
                -2.0 * alpha * d2.ln()
            }
            CriterionKind::MaxPro => -4.0 * alpha * xi.iter().zip(x).map(|(a, b)| (a - b).abs().ln()).sum::<f64>(),
        })
        .collect();
    Ok(log_sum_exp(&terms))
}

pub fn sequential_criterion(design: &Points<f64>, x: &[f64], alpha: f64, kind: CriterionKind) -> Result<f64> {
    Ok(sequential_criterion_ln(design, x, alpha, kind)?.exp())
}

/// A design and a probe point satisfying both limit preconditions.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusInstance {
    pub id: usize,
    pub design: Points<f64>,
    pub x: Vec<f64>,
}

pub const CORPUS_SIZE: usize = 20;
pub const CORPUS_SEED: u64 = 20_231;
pub const CORPUS_ALPHAS: [f64; 3] = [0.5, 1.0, 2.0];
const CORPUS_TEXT: &str = include_str!("../data/theory_corpus.txt");

// Separation constraints of the corpus generator.
const CORPUS_MIN_PAIR: f64 = 0.3;
const CORPUS_MIN_PROBE: f64 = 0.2;
const CORPUS_MIN_COORD: f64 = 0.05;

fn well_separated(points: &[Vec<f64>], x: &[f64]) -> bool {
    let dist = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt();
    for (i, a) in points.iter().enumerate() {
        if dist(a, x) < CORPUS_MIN_PROBE || a.iter().zip(x).any(|(p, q)| (p - q).abs() < CORPUS_MIN_COORD) {
            return false;
        }
        if points[..i].iter().any(|b| dist(a, b) < CORPUS_MIN_PAIR) {
            return false;
        }
    }
    true
}

/// Seeded rejection sampler: `n` in `2..=8`, `d` in `2..=4`, design points at
/// pairwise distance at least 0.3, probe at distance at least 0.2 from each
/// design point and 0.05 from it in every coordinate.
pub fn generate_corpus(seed: u64, size: usize) -> Vec<CorpusInstance> {
    let mut rng = seeded_rng(seed);
    (0..size)
        .map(|id| loop {
            let d = rng.random_range(2..=4);
            let n = rng.random_range(2..=8);
            let points: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.random::<f64>()).collect()).collect();
            let x: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
            if well_separated(&points, &x) {
                break CorpusInstance {
                    id,
                    design: Points::from_rows(d, &points).expect("rows share d"),
                    x,
                };
            }
        })
        .collect()
}

/// Text form: `instance <id> <n> <d>`, then `x` and `p` lines of coordinates.
pub fn corpus_to_text(corpus: &[CorpusInstance]) -> String {
    let mut s = String::from("# limit-check corpus: instance <id> <n> <d>; x = probe; p = design row\n");
    for c in corpus {
        writeln!(s, "instance {} {} {}", c.id, c.design.len(), c.design.dim()).unwrap();
        let line = |tag: &str, v: &[f64]| {
            let cells: Vec<String> = v.iter().map(|u| format!("{u:.17e}")).collect();
            format!("{tag} {}\n", cells.join(" "))
        };
        s.push_str(&line("x", &c.x));
        for row in c.design.rows() {
            s.push_str(&line("p", row));
        }
    }
    s
}

pub fn parse_corpus(text: &str) -> Result<Vec<CorpusInstance>> {
    let bad = |msg: &str| Error::Parse(format!("corpus: {msg}"));
    let mut out: Vec<CorpusInstance> = Vec::new();
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
        let mut it = line.split_whitespace();
        let tag = it.next().unwrap_or_default();
        let nums = || -> Result<Vec<f64>> {
            line.split_whitespace().skip(1).map(|t| t.parse::<f64>().map_err(|_| bad(t))).collect()
        };
        match tag {
            "instance" => {
                let v = nums()?;
                if v.len() != 3 {
                    return Err(bad("instance line needs id, n, d"));
                }
                out.push(CorpusInstance {
                    id: v[0] as usize,
                    design: Points::new(v[2] as usize),
                    x: Vec::new(),
                });
            }
            "x" => out.last_mut().ok_or_else(|| bad("x before instance"))?.x = nums()?,
            "p" => out.last_mut().ok_or_else(|| bad("p before instance"))?.design.push(&nums()?)?,
            other => return Err(bad(other)),
        }
    }
    for c in &out {
        if c.x.len() != c.design.dim() || c.design.is_empty() {
            return Err(bad(&format!("instance {} is incomplete", c.id)));
        }
    }
    Ok(out)
}

/// The corpus bundled with the crate.
pub fn bundled_corpus() -> Vec<CorpusInstance> {
    parse_corpus(CORPUS_TEXT).expect("bundled corpus parses")
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckRow {
    pub instance_id: String,
    pub theorem: Theorem,
    pub theta: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub rel_err: f64,
    pub pass: bool,
}

/// Both limit checks on every instance and alpha; the pass column applies the
/// tolerance at every length scale, but only the last one decides
/// convergence.
pub fn check_corpus(corpus: &[CorpusInstance], alphas: &[f64], thetas: &[f64], tol: f64) -> Result<Vec<LimitCheckReportRow>> {
    let mut rows = Vec::new();
    for c in corpus {
        for &alpha in alphas {
            for rep in [
                theorem1_check(&c.design, &c.x, alpha, thetas, tol)?,
                theorem2_check(&c.design, &c.x, alpha, thetas, tol)?,
            ] {
                rows.push(LimitCheckReportRow { instance: c.id, report: rep });
            }
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitCheckReportRow {
    pub instance: usize,
    pub report: LimitCheckReport,
}

impl LimitCheckReportRow {
    pub fn rows(&self) -> Vec<CheckRow> {
        let r = &self.report;
        r.theta_sequence
            .iter()
            .enumerate()
            .map(|(i, &theta)| CheckRow {
                instance_id: format!("{}_a{}", self.instance, r.alpha),
                theorem: r.theorem,
                theta,
                lhs: r.lhs_values[i],
                rhs: r.rhs_value,
                rel_err: r.relative_errors[i],
                pass: r.relative_errors[i] <= r.tol,
            })
            .collect()
    }
}

/// CSV with header `instance_id,theorem,theta,lhs,rhs,rel_err,pass`;
/// `instance_id` is `<corpus id>_a<alpha>`.
pub fn report_csv(results: &[LimitCheckReportRow], comments: &[String]) -> String {
    let mut s = String::new();
    for c in comments {
        writeln!(s, "# {c}").unwrap();
    }
    s.push_str("instance_id,theorem,theta,lhs,rhs,rel_err,pass\n");
    for row in results.iter().flat_map(|r| r.rows()) {
        writeln!(
            s,
            "{},{},{:e},{:.16e},{:.16e},{:.6e},{}",
            row.instance_id,
            row.theorem.name(),
            row.theta,
            row.lhs,
            row.rhs,
            row.rel_err,
            row.pass
        )
        .unwrap();
    }
    s
}
