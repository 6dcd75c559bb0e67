//! Plain-text SVG line charts of summary rows: one file per metric, one
//! polyline per sequential condition, dashed horizontal lines for baselines.
//! The optimality gap uses a log10 axis.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{BenchError, Result};
use crate::summary::{RowKind, SummaryRow};

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 200.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

fn log_axis(metric: &str) -> bool {
    metric == "gap"
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn new(values: impl Iterator<Item = f64>, log: bool) -> Self {
        let vals: Vec<f64> = values
            .filter(|v| v.is_finite())
            .map(|v| if log { v.max(1e-300).log10() } else { v })
            .collect();
        let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let (lo, hi) = if !(lo.is_finite() && hi.is_finite()) {
            (0.0, 1.0)
        } else if hi - lo < 1e-12 {
            (lo - 0.5, hi + 0.5)
        } else {
            let pad = 0.05 * (hi - lo);
            (lo - pad, hi + pad)
        };
        Self { lo, hi, log }
    }

    fn frac(&self, v: f64) -> f64 {
        let v = if self.log { v.max(1e-300).log10() } else { v };
        (v - self.lo) / (self.hi - self.lo)
    }

    fn ticks(&self) -> Vec<(f64, String)> {
        (0..=4)
            .map(|i| {
                let t = self.lo + (self.hi - self.lo) * i as f64 / 4.0;
                let label = if self.log { format!("1e{t:.1}") } else { format!("{t:.3e}") };
                (t, label)
            })
            .collect()
    }
}

/// SVG text for the rows of one metric.
pub fn render(metric: &str, rows: &[&SummaryRow]) -> Result<String> {
    if rows.is_empty() {
        return Err(BenchError::Summary(format!("no rows for metric `{metric}`")));
    }
    let log = log_axis(metric);
    let (plot_w, plot_h) = (WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM);
    let nx = rows.iter().map(|r| r.n as f64);
    let x_axis = Axis::new(nx, false);
    let y_axis = Axis::new(rows.iter().map(|r| r.mean), log);
    let px = |n: f64| LEFT + x_axis.frac(n) * plot_w;
    let py = |v: f64| TOP + (1.0 - y_axis.frac(v)) * plot_h;

    let mut series: BTreeMap<&str, Vec<&SummaryRow>> = BTreeMap::new();
    let mut baselines: BTreeMap<&str, &SummaryRow> = BTreeMap::new();
    for r in rows {
        match r.kind {
            RowKind::Sequential => series.entry(r.condition.as_str()).or_default().push(r),
            RowKind::Baseline => {
                baselines.insert(r.condition.as_str(), r);
            }
        }
    }

    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(s, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#).unwrap();
    writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    )
    .unwrap();
    for (t, label) in y_axis.ticks() {
        let y = TOP + (1.0 - (t - y_axis.lo) / (y_axis.hi - y_axis.lo)) * plot_h;
        writeln!(s, r##"<line x1="{}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="black"/>"##, LEFT - 4.0).unwrap();
        writeln!(s, r#"<text x="{}" y="{:.2}" text-anchor="end">{label}</text>"#, LEFT - 6.0, y + 4.0).unwrap();
    }
    for (t, _) in x_axis.ticks() {
        let x = LEFT + (t - x_axis.lo) / (x_axis.hi - x_axis.lo) * plot_w;
        let y0 = TOP + plot_h;
        writeln!(s, r#"<line x1="{x:.2}" y1="{y0}" x2="{x:.2}" y2="{}" stroke="black"/>"#, y0 + 4.0).unwrap();
        writeln!(s, r#"<text x="{x:.2}" y="{}" text-anchor="middle">{:.0}</text>"#, y0 + 18.0, t).unwrap();
    }
    writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">n</text>"#, LEFT + plot_w / 2.0, HEIGHT - 10.0).unwrap();
    let y_label = if log { format!("{metric} (log10)") } else { metric.to_string() };
    writeln!(
        s,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0,
        escape(&y_label)
    )
    .unwrap();

    let mut legend_y = TOP + 10.0;
    let legend_x = WIDTH - RIGHT + 15.0;
    let mut legend = |s: &mut String, color: &str, dashed: bool, label: &str| {
        let dash = if dashed { r#" stroke-dasharray="6 4""# } else { "" };
        writeln!(
            s,
            r#"<line x1="{legend_x}" y1="{legend_y}" x2="{}" y2="{legend_y}" stroke="{color}" stroke-width="2"{dash}/>"#,
            legend_x + 24.0
        )
        .unwrap();
        writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, legend_x + 30.0, legend_y + 4.0, escape(label)).unwrap();
        legend_y += 18.0;
    };

    for (i, (label, pts)) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let coords: Vec<String> = pts
            .iter()
            .filter(|r| r.mean.is_finite())
            .map(|r| format!("{:.2},{:.2}", px(r.n as f64), py(r.mean)))
            .collect();
        writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
            coords.join(" ")
        )
        .unwrap();
        legend(&mut s, color, false, label);
    }
    for (j, (label, row)) in baselines.iter().enumerate() {
        let color = PALETTE[(series.len() + j) % PALETTE.len()];
        let y = py(row.mean);
        writeln!(
            s,
            r#"<line x1="{LEFT}" y1="{y:.2}" x2="{}" y2="{y:.2}" stroke="{color}" stroke-width="1.5" stroke-dasharray="6 4"/>"#,
            LEFT + plot_w
        )
        .unwrap();
        legend(&mut s, color, true, label);
    }
    s.push_str("</svg>\n");
    Ok(s)
}

/// Writes `<metric>.svg` into `out_dir` for every metric present. Nothing is
/// written when there are no rows.
pub fn plot_summary(rows: &[SummaryRow], out_dir: &Path) -> Result<Vec<PathBuf>> {
    if rows.is_empty() {
        return Err(BenchError::Summary("no data rows to plot".into()));
    }
    let mut by_metric: BTreeMap<&str, Vec<&SummaryRow>> = BTreeMap::new();
    for r in rows {
        by_metric.entry(r.metric.as_str()).or_default().push(r);
    }
    let rendered = by_metric
        .iter()
        .map(|(m, rs)| Ok((*m, render(m, rs)?)))
        .collect::<Result<Vec<_>>>()?;
    std::fs::create_dir_all(out_dir).map_err(|e| BenchError::io(out_dir, e))?;
    let mut paths = Vec::new();
    for (metric, svg) in rendered {
        let path = out_dir.join(format!("{metric}.svg"));
        std::fs::write(&path, svg).map_err(|e| BenchError::io(&path, e))?;
        paths.push(path);
    }
    Ok(paths)
}
