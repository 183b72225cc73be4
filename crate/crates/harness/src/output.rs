use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{HarnessError, Result};
use crate::experiment::{AggregateResult, GapReport};

pub const CSV_HEADER: [&str; 7] = [
    "t",
    "regret_mean",
    "regret_std",
    "bound_thm1",
    "bound_thm2",
    "bound_thm3",
    "bound_thm4",
];

fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// The regret CSV: one row per checkpoint, empty cells for inapplicable bounds.
pub fn regret_csv(result: &AggregateResult) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let to_io = |e: csv::Error| HarnessError::io(Path::new("regret.csv"), e.into());
    w.write_record(CSV_HEADER).map_err(to_io)?;
    for (j, t) in result.checkpoints.iter().enumerate() {
        let b = &result.bounds;
        w.write_record([
            t.to_string(),
            result.mean[j].to_string(),
            result.std[j].to_string(),
            cell(b.thm1[j]),
            cell(b.thm2[j]),
            cell(b.thm3[j]),
            cell(b.thm4[j]),
        ])
        .map_err(to_io)?;
    }
    w.into_inner()
        .map_err(|e| HarnessError::io(Path::new("regret.csv"), e.into_error()))
}

/// Chart geometry.
const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 200.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;
/// Overlays are drawn up to this multiple of the regret band's height and clipped above.
const OVERLAY_HEADROOM: f64 = 10.0;
const OVERLAY_COLORS: [&str; 4] = ["#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];

fn esc(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Static SVG: mean regret with a +-1 std band and dashed bound overlays.
pub fn render_chart(result: &AggregateResult, title: &str) -> String {
    let ts = &result.checkpoints;
    let log_x = result.log_axis && ts.len() > 1;
    let xv = |t: u64| if log_x { (t as f64).ln() } else { t as f64 };
    let (x_lo, x_hi) = (xv(ts[0]), xv(*ts.last().unwrap_or(&1)));
    let x_span = if x_hi > x_lo { x_hi - x_lo } else { 1.0 };

    let band_lo = result
        .mean
        .iter()
        .zip(&result.std)
        .map(|(m, s)| m - s)
        .fold(0.0, f64::min);
    let band_hi = result
        .mean
        .iter()
        .zip(&result.std)
        .map(|(m, s)| m + s)
        .fold(0.0, f64::max);
    let band_hi = if band_hi > band_lo {
        band_hi
    } else {
        band_lo + 1.0
    };
    let overlays: Vec<(&str, &[Option<f64>])> = result
        .bounds
        .columns()
        .into_iter()
        .filter(|(_, col)| col.iter().any(Option::is_some))
        .collect();
    let overlay_hi = overlays
        .iter()
        .flat_map(|(_, col)| col.iter().flatten().copied())
        .fold(band_hi, f64::max);
    let y_hi = overlay_hi.min(band_lo + OVERLAY_HEADROOM * (band_hi - band_lo));
    let clipped = overlay_hi > y_hi;
    let y_span = y_hi - band_lo;

    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let px = |t: u64| LEFT + (xv(t) - x_lo) / x_span * plot_w;
    let py = |y: f64| TOP + plot_h - (y - band_lo) / y_span * plot_h;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        s,
        r#"<defs><clipPath id="plot"><rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}"/></clipPath></defs>"#
    );
    let _ = writeln!(
        s,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(s, r#"<text x="{LEFT}" y="18">{}</text>"#, esc(title));
    let _ = writeln!(
        s,
        r##"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="#444"/>"##
    );

    for i in 0..=4 {
        let y = band_lo + y_span * i as f64 / 4.0;
        let _ = writeln!(
            s,
            r##"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"##,
            LEFT - 6.0,
            py(y) + 4.0,
            format_tick(y)
        );
    }
    let x_ticks: Vec<u64> = if log_x {
        let mut v: Vec<u64> = (0..=12)
            .map(|e| 10u64.pow(e))
            .filter(|&t| t >= ts[0] && t <= *ts.last().unwrap())
            .collect();
        if v.is_empty() {
            v.push(ts[0]);
        }
        v
    } else {
        (0..=4)
            .map(|i| ts[0] + (ts.last().unwrap() - ts[0]) * i / 4)
            .collect()
    };
    for t in x_ticks {
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{t}</text>"#,
            px(t),
            HEIGHT - BOTTOM + 18.0
        );
    }
    let axis = if log_x { "t (log scale)" } else { "t" };
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{axis}</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 12.0
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.1}" transform="rotate(-90 16 {:.1})" text-anchor="middle">cumulative regret</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0
    );

    let mut band = String::new();
    for (j, &t) in ts.iter().enumerate() {
        let _ = write!(
            band,
            "{:.2},{:.2} ",
            px(t),
            py(result.mean[j] + result.std[j])
        );
    }
    for (j, &t) in ts.iter().enumerate().rev() {
        let _ = write!(
            band,
            "{:.2},{:.2} ",
            px(t),
            py(result.mean[j] - result.std[j])
        );
    }
    let _ = writeln!(
        s,
        r##"<polygon points="{}" fill="#1f77b4" fill-opacity="0.2" stroke="none" clip-path="url(#plot)"/>"##,
        band.trim_end()
    );
    let line: Vec<String> = ts
        .iter()
        .zip(&result.mean)
        .map(|(&t, &m)| format!("{:.2},{:.2}", px(t), py(m)))
        .collect();
    let _ = writeln!(
        s,
        r##"<polyline points="{}" fill="none" stroke="#1f77b4" stroke-width="2" clip-path="url(#plot)"/>"##,
        line.join(" ")
    );

    let mut legend = vec![("mean regret ± 1 std".to_string(), "#1f77b4", false)];
    for (i, (name, col)) in overlays.iter().enumerate() {
        let color = OVERLAY_COLORS[i % OVERLAY_COLORS.len()];
        let pts: Vec<String> = ts
            .iter()
            .zip(col.iter())
            .filter_map(|(&t, v)| v.map(|y| format!("{:.2},{:.2}", px(t), py(y))))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5" stroke-dasharray="6 4" clip-path="url(#plot)"/>"#,
            pts.join(" ")
        );
        legend.push((name.replace("bound_", "bound "), color, true));
    }
    for (i, (label, color, dashed)) in legend.iter().enumerate() {
        let y = TOP + 14.0 + 20.0 * i as f64;
        let x = WIDTH - RIGHT + 12.0;
        let dash = if *dashed {
            r#" stroke-dasharray="6 4""#
        } else {
            ""
        };
        let _ = writeln!(
            s,
            r#"<line x1="{x}" y1="{y}" x2="{}" y2="{y}" stroke="{color}" stroke-width="2"{dash}/>"#,
            x + 24.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}">{}</text>"#,
            x + 30.0,
            y + 4.0,
            esc(label)
        );
    }
    if clipped {
        let _ = writeln!(
            s,
            r##"<text x="{}" y="{}" fill="#666">bounds clipped above</text>"##,
            WIDTH - RIGHT + 12.0,
            TOP + 14.0 + 20.0 * legend.len() as f64
        );
    }
    s.push_str("</svg>\n");
    s
}

fn format_tick(y: f64) -> String {
    if y != 0.0 && (y.abs() >= 1e5 || y.abs() < 1e-2) {
        format!("{y:.2e}")
    } else {
        format!("{y:.2}")
    }
}

#[derive(Debug, Serialize)]
pub struct Summary<'a> {
    pub master_seed: u64,
    pub config_hash: &'a str,
    pub wall_time_secs: f64,
    pub runs: usize,
    pub horizon: u64,
    pub mu: &'a [f64],
    pub final_regret_mean: f64,
    pub final_regret_std: f64,
    pub gaps: Option<&'a GapReport>,
    pub lipschitz: Option<f64>,
    pub max_increment: Option<f64>,
    pub round_cap: Option<f64>,
    pub cap_violations: usize,
    pub oracle_fallbacks: u64,
}

pub fn summary(result: &AggregateResult) -> Summary<'_> {
    Summary {
        master_seed: result.master_seed,
        config_hash: &result.config_hash,
        wall_time_secs: result.wall_time_secs,
        runs: result.runs,
        horizon: *result.checkpoints.last().unwrap_or(&0),
        mu: &result.mu,
        final_regret_mean: *result.mean.last().unwrap_or(&0.0),
        final_regret_std: *result.std.last().unwrap_or(&0.0),
        gaps: result.gaps.as_ref(),
        lipschitz: result.lipschitz,
        max_increment: result.max_increment,
        round_cap: result.round_cap,
        cap_violations: result.cap_violations,
        oracle_fallbacks: result.oracle_fallbacks,
    }
}

/// Writes `regret.csv`, `regret.svg` and `summary.json` into `dir`.
pub fn write_artifacts(result: &AggregateResult, dir: &Path, title: &str) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    let csv_path = dir.join("regret.csv");
    let svg_path = dir.join("regret.svg");
    let json_path = dir.join("summary.json");
    std::fs::write(&csv_path, regret_csv(result)?).map_err(|e| HarnessError::io(&csv_path, e))?;
    std::fs::write(&svg_path, render_chart(result, title))
        .map_err(|e| HarnessError::io(&svg_path, e))?;
    let json = serde_json::to_string_pretty(&summary(result)).expect("summary serializes");
    std::fs::write(&json_path, json + "\n").map_err(|e| HarnessError::io(&json_path, e))?;
    Ok(vec![csv_path, svg_path, json_path])
}
