//! Benchmark black-box functions exposed on the unit cube.
//!
//! Each function maps the first `d_native` unit coordinates affinely onto its
//! native box and ignores any appended inert coordinates. Native formulas:
//!
//! * **Levy** on `[-10, 10]^d`, `w_k = 1 + (x_k - 1)/4`:
//!   `sin^2(pi w_1) + sum_{k<d} (w_k - 1)^2 [1 + 10 sin^2(pi w_k + 1)]
//!    + (w_d - 1)^2 [1 + sin^2(2 pi w_d)]`; minimum 0 at `x = 1`.
//! * **Ackley** on `[-32.768, 32.768]^d` with `a = 20, b = 0.2, c = 2 pi`:
//!   `-a exp(-b sqrt(mean x_k^2)) - exp(mean cos(c x_k)) + a + e`; minimum 0
//!   at the origin.
//! * **Rastrigin** on `[-5.12, 5.12]^d`: `10 d + sum (x_k^2 - 10 cos(2 pi x_k))`;
//!   minimum 0 at the origin.
//! * **Friedman** on `[0, 1]^5`:
//!   `10 sin(pi x1 x2) + 20 (x3 - 0.5)^2 + 10 x4 + 5 x5`.
//! * **Dette & Pepelyshev** (8-d) on `[0, 1]^8`:
//!   `4 (x1 - 2 + 8 x2 - 8 x2^2)^2 + (3 - 4 x2)^2 + 16 sqrt(x3 + 1) (2 x3 - 1)^2
//!    + sum_{i=4}^{8} i ln(1 + sum_{j=3}^{i} x_j)`.
//! * **OTL circuit** (6-d), inputs `Rb1 in [50,150], Rb2 in [25,70],
//!   Rf in [0.5,3], Rc1 in [1.2,2.5], Rc2 in [0.25,1.2], beta in [50,300]`:
//!   with `Vb1 = 12 Rb2 / (Rb1 + Rb2)` and `B = beta (Rc2 + 9)`,
//!   `Vm = (Vb1 + 0.74) B / (B + Rf) + 11.35 Rf / (B + Rf) + 0.74 Rf B / ((B + Rf) Rc1)`.
//! * **Piston** (7-d), inputs `M in [30,60], S in [0.005,0.020],
//!   V0 in [0.002,0.010], k in [1000,5000], P0 in [90000,110000],
//!   Ta in [290,296], T0 in [340,360]`:
//!   `A = P0 S + 19.62 M - k V0 / S`,
//!   `V = S / (2k) (sqrt(A^2 + 4 k P0 V0 Ta / T0) - A)`,
//!   `C = 2 pi sqrt(M / (k + S^2 P0 V0 Ta / (T0 V^2)))`.
//! * **Robot arm** (8-d), angles `theta_1..4 in [0, 2 pi]`, lengths
//!   `L_1..4 in [0, 1]`: `u = sum L_i cos(sum_{j<=i} theta_j)`,
//!   `v = sum L_i sin(sum_{j<=i} theta_j)`, `f = sqrt(u^2 + v^2)`.
//! * **Wing weight** (10-d), inputs `Sw in [150,200], Wfw in [220,300],
//!   A in [6,10], Lambda in [-10,10] degrees, q in [16,45], lambda in [0.5,1],
//!   tc in [0.08,0.18], Nz in [2.5,6], Wdg in [1700,2500], Wp in [0.025,0.08]`:
//!   `0.036 Sw^0.758 Wfw^0.0035 (A / cos^2 Lambda)^0.6 q^0.006 lambda^0.04
//!    (100 tc / cos Lambda)^-0.3 (Nz Wdg)^0.49 + Sw Wp`.
//!
//! Names follow `<function><active>_aug<total>`, e.g. `levy6_aug10`; the
//! dimension suffix is optional for fixed-dimension functions (`friedman`,
//! `friedman5_aug10`).

use std::f64::consts::{E, PI};
use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Formula {
    Levy,
    Ackley,
    Rastrigin,
    Friedman,
    DettePepelyshev,
    OtlCircuit,
    Piston,
    RobotArm,
    WingWeight,
}

impl Formula {
    pub const ALL: [Formula; 9] = [
        Formula::Levy,
        Formula::Ackley,
        Formula::Rastrigin,
        Formula::Friedman,
        Formula::DettePepelyshev,
        Formula::OtlCircuit,
        Formula::Piston,
        Formula::RobotArm,
        Formula::WingWeight,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Formula::Levy => "levy",
            Formula::Ackley => "ackley",
            Formula::Rastrigin => "rastrigin",
            Formula::Friedman => "friedman",
            Formula::DettePepelyshev => "dette",
            Formula::OtlCircuit => "otl",
            Formula::Piston => "piston",
            Formula::RobotArm => "robot",
            Formula::WingWeight => "wing",
        }
    }

    /// Native dimension of fixed-dimension formulas.
    pub fn fixed_dim(self) -> Option<usize> {
        match self {
            Formula::Levy | Formula::Ackley | Formula::Rastrigin => None,
            Formula::Friedman => Some(5),
            Formula::DettePepelyshev => Some(8),
            Formula::OtlCircuit => Some(6),
            Formula::Piston => Some(7),
            Formula::RobotArm => Some(8),
            Formula::WingWeight => Some(10),
        }
    }

    fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "levy" => Formula::Levy,
            "ackley" => Formula::Ackley,
            "rastrigin" => Formula::Rastrigin,
            "friedman" => Formula::Friedman,
            "dette" | "dette_pepelyshev" | "dp" => Formula::DettePepelyshev,
            "otl" | "otl_circuit" | "otlcircuit" => Formula::OtlCircuit,
            "piston" => Formula::Piston,
            "robot" | "robot_arm" | "robotarm" => Formula::RobotArm,
            "wing" | "wing_weight" | "wingweight" => Formula::WingWeight,
            _ => return None,
        })
    }

    fn domain(self, d: usize) -> Vec<(f64, f64)> {
        match self {
            Formula::Levy => vec![(-10.0, 10.0); d],
            Formula::Ackley => vec![(-32.768, 32.768); d],
            Formula::Rastrigin => vec![(-5.12, 5.12); d],
            Formula::Friedman => vec![(0.0, 1.0); 5],
            Formula::DettePepelyshev => vec![(0.0, 1.0); 8],
            Formula::OtlCircuit => vec![(50.0, 150.0), (25.0, 70.0), (0.5, 3.0), (1.2, 2.5), (0.25, 1.2), (50.0, 300.0)],
            Formula::Piston => vec![
                (30.0, 60.0),
                (0.005, 0.020),
                (0.002, 0.010),
                (1000.0, 5000.0),
                (90000.0, 110000.0),
                (290.0, 296.0),
                (340.0, 360.0),
            ],
            Formula::RobotArm => {
                let mut v = vec![(0.0, 2.0 * PI); 4];
                v.extend([(0.0, 1.0); 4]);
                v
            }
            Formula::WingWeight => vec![
                (150.0, 200.0),
                (220.0, 300.0),
                (6.0, 10.0),
                (-10.0, 10.0),
                (16.0, 45.0),
                (0.5, 1.0),
                (0.08, 0.18),
                (2.5, 6.0),
                (1700.0, 2500.0),
                (0.025, 0.08),
            ],
        }
    }

    fn known_min(self, d: usize) -> Option<KnownMin> {
        match self {
            Formula::Levy => Some(KnownMin {
                value: 0.0,
                location: vec![1.0; d],
            }),
            Formula::Ackley | Formula::Rastrigin => Some(KnownMin {
                value: 0.0,
                location: vec![0.0; d],
            }),
            _ => None,
        }
    }

    /// Native-units formula; `x.len()` is the native dimension.
    pub fn eval(self, x: &[f64]) -> f64 {
        match self {
            Formula::Levy => levy(x),
            Formula::Ackley => ackley(x),
            Formula::Rastrigin => rastrigin(x),
            Formula::Friedman => friedman(x),
            Formula::DettePepelyshev => dette_pepelyshev(x),
            Formula::OtlCircuit => otl_circuit(x),
            Formula::Piston => piston(x),
            Formula::RobotArm => robot_arm(x),
            Formula::WingWeight => wing_weight(x),
        }
    }
}

pub fn levy(x: &[f64]) -> f64 {
    let w: Vec<f64> = x.iter().map(|v| 1.0 + (v - 1.0) / 4.0).collect();
    let d = w.len();
    let mut f = (PI * w[0]).sin().powi(2);
    for &wk in &w[..d - 1] {
        f += (wk - 1.0).powi(2) * (1.0 + 10.0 * (PI * wk + 1.0).sin().powi(2));
    }
    let wd = w[d - 1];
    f + (wd - 1.0).powi(2) * (1.0 + (2.0 * PI * wd).sin().powi(2))
}

pub fn ackley(x: &[f64]) -> f64 {
    let (a, b, c) = (20.0, 0.2, 2.0 * PI);
    let d = x.len() as f64;
    let s1 = x.iter().map(|v| v * v).sum::<f64>() / d;
    let s2 = x.iter().map(|v| (c * v).cos()).sum::<f64>() / d;
    -a * (-b * s1.sqrt()).exp() - s2.exp() + a + E
}

pub fn rastrigin(x: &[f64]) -> f64 {
    10.0 * x.len() as f64 + x.iter().map(|v| v * v - 10.0 * (2.0 * PI * v).cos()).sum::<f64>()
}

pub fn friedman(x: &[f64]) -> f64 {
    10.0 * (PI * x[0] * x[1]).sin() + 20.0 * (x[2] - 0.5).powi(2) + 10.0 * x[3] + 5.0 * x[4]
}

pub fn dette_pepelyshev(x: &[f64]) -> f64 {
    let t1 = 4.0 * (x[0] - 2.0 + 8.0 * x[1] - 8.0 * x[1] * x[1]).powi(2);
    let t2 = (3.0 - 4.0 * x[1]).powi(2);
    let t3 = 16.0 * (x[2] + 1.0).sqrt() * (2.0 * x[2] - 1.0).powi(2);
    let mut t4 = 0.0;
    for i in 4..=8 {
        let inner: f64 = x[2..i].iter().sum();
        t4 += i as f64 * (1.0 + inner).ln();
    }
    t1 + t2 + t3 + t4
}

pub fn otl_circuit(x: &[f64]) -> f64 {
    let (rb1, rb2, rf, rc1, rc2, beta) = (x[0], x[1], x[2], x[3], x[4], x[5]);
    let vb1 = 12.0 * rb2 / (rb1 + rb2);
    let b = beta * (rc2 + 9.0);
    (vb1 + 0.74) * b / (b + rf) + 11.35 * rf / (b + rf) + 0.74 * rf * b / ((b + rf) * rc1)
}

pub fn piston(x: &[f64]) -> f64 {
    let (m, s, v0, k, p0, ta, t0) = (x[0], x[1], x[2], x[3], x[4], x[5], x[6]);
    let a = p0 * s + 19.62 * m - k * v0 / s;
    let v = s / (2.0 * k) * ((a * a + 4.0 * k * p0 * v0 * ta / t0).sqrt() - a);
    2.0 * PI * (m / (k + s * s * p0 * v0 * ta / (t0 * v * v))).sqrt()
}

pub fn robot_arm(x: &[f64]) -> f64 {
    let (mut u, mut v, mut angle) = (0.0, 0.0, 0.0);
    for i in 0..4 {
        angle += x[i];
        u += x[4 + i] * angle.cos();
        v += x[4 + i] * angle.sin();
    }
    (u * u + v * v).sqrt()
}

pub fn wing_weight(x: &[f64]) -> f64 {
    let (sw, wfw, a, lam_deg, q, lam, tc, nz, wdg, wp) = (x[0], x[1], x[2], x[3], x[4], x[5], x[6], x[7], x[8], x[9]);
    let c = lam_deg.to_radians().cos();
    0.036 * sw.powf(0.758)
        * wfw.powf(0.0035)
        * (a / (c * c)).powf(0.6)
        * q.powf(0.006)
        * lam.powf(0.04)
        * (100.0 * tc / c).powf(-0.3)
        * (nz * wdg).powf(0.49)
        + sw * wp
}

#[derive(Debug, Clone, PartialEq)]
pub struct KnownMin {
    pub value: f64,
    /// Native units, active coordinates only.
    pub location: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestFunction {
    pub name: String,
    pub formula: Formula,
    pub d_native: usize,
    pub domain: Vec<(f64, f64)>,
    pub d_total: usize,
    pub known_min: Option<KnownMin>,
}

impl TestFunction {
    pub fn new(formula: Formula, d_native: usize, d_total: usize) -> Result<Self> {
        if let Some(fixed) = formula.fixed_dim() {
            if d_native != fixed {
                return Err(Error::InvalidArgument(format!(
                    "{} has {fixed} native dimensions, not {d_native}",
                    formula.name()
                )));
            }
        }
        if d_native == 0 || d_total < d_native {
            return Err(Error::InvalidArgument(format!(
                "invalid dimensions: {d_native} active of {d_total} total"
            )));
        }
        let name = if d_total == d_native {
            format!("{}{}", formula.name(), d_native)
        } else {
            format!("{}{}_aug{}", formula.name(), d_native, d_total)
        };
        Ok(Self {
            name,
            formula,
            d_native,
            domain: formula.domain(d_native),
            d_total,
            known_min: formula.known_min(d_native),
        })
    }

    /// Looks up `<function>[<active>][_aug<total>]`.
    pub fn by_name(name: &str) -> Result<Self> {
        let lower = name.trim().to_ascii_lowercase();
        let unknown = || Error::UnknownFunction(name.to_string());
        let (head, total) = match lower.split_once("_aug") {
            Some((h, t)) => (h.to_string(), Some(t.parse::<usize>().map_err(|_| unknown())?)),
            None => (lower.clone(), None),
        };
        let split = head.find(|c: char| c.is_ascii_digit()).unwrap_or(head.len());
        let (base, digits) = head.split_at(split);
        let formula = Formula::from_name(base).ok_or_else(unknown)?;
        let d_native = if digits.is_empty() {
            formula.fixed_dim().ok_or_else(unknown)?
        } else {
            digits.parse::<usize>().map_err(|_| unknown())?
        };
        Self::new(formula, d_native, total.unwrap_or(d_native)).map_err(|_| unknown())
    }

    /// Native coordinates of the active part of `u`.
    pub fn to_native(&self, u: &[f64]) -> Vec<f64> {
        u[..self.d_native]
            .iter()
            .zip(&self.domain)
            .map(|(&ui, &(lo, hi))| lo + ui * (hi - lo))
            .collect()
    }

    pub fn to_unit(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.domain)
            .map(|(&xi, &(lo, hi))| (xi - lo) / (hi - lo))
            .collect()
    }

    pub fn eval_native(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.d_native {
            return Err(Error::DimensionMismatch {
                expected: self.d_native,
                got: x.len(),
            });
        }
        Ok(self.formula.eval(x))
    }

    pub fn eval_unit(&self, u: &[f64]) -> Result<f64> {
        if u.len() != self.d_total {
            return Err(Error::DimensionMismatch {
                expected: self.d_total,
                got: u.len(),
            });
        }
        if let Some((k, &v)) = u.iter().enumerate().find(|(_, v)| !(0.0..=1.0).contains(*v)) {
            return Err(Error::OutOfRange { row: 1, col: k + 1, value: v });
        }
        Ok(self.formula.eval(&self.to_native(u)))
    }

    /// Global minimum value, if known.
    pub fn f_min(&self) -> Option<f64> {
        self.known_min.as_ref().map(|m| m.value)
    }
}

impl fmt::Display for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// Emulation set augmented to 10 inputs, plus the optimization set at 6 active
/// inputs with and without four inert ones.
pub fn catalog() -> Vec<TestFunction> {
    let mut out = Vec::new();
    for formula in [
        Formula::DettePepelyshev,
        Formula::Friedman,
        Formula::OtlCircuit,
        Formula::Piston,
        Formula::RobotArm,
        Formula::WingWeight,
    ] {
        let d = formula.fixed_dim().expect("fixed dimension");
        out.push(TestFunction::new(formula, d, d.max(10)).expect("valid catalog entry"));
    }
    for formula in [Formula::Ackley, Formula::Levy, Formula::Rastrigin] {
        out.push(TestFunction::new(formula, 6, 6).expect("valid catalog entry"));
        out.push(TestFunction::new(formula, 6, 10).expect("valid catalog entry"));
    }
    out
}
