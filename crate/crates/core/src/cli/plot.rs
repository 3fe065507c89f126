//! Minimal self-contained SVG line charts of sweep CSVs.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::csv::{Table, METRICS};
use crate::error::{Error, Result};

const WIDTH: f64 = 860.0;
const HEIGHT: f64 = 520.0;
const LEFT: f64 = 90.0;
const RIGHT: f64 = 250.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct SeriesKey {
    r: u32,
    k: u32,
    mode: String,
    source: String,
}

impl SeriesKey {
    fn label(&self) -> String {
        format!("{} R={} K={} ({})", self.mode, self.r, self.k, self.source)
    }
}

fn nice_step(range: f64) -> f64 {
    let raw = range / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let nice = if norm < 1.5 {
        1.0
    } else if norm < 3.5 {
        2.0
    } else if norm < 7.5 {
        5.0
    } else {
        10.0
    };
    nice * mag
}

fn ticks(lo: f64, hi: f64) -> (f64, f64, Vec<f64>) {
    let (lo, hi) = if hi > lo {
        (lo, hi)
    } else {
        let pad = if lo == 0.0 { 1.0 } else { lo.abs() * 0.1 };
        (lo - pad, hi + pad)
    };
    let step = nice_step(hi - lo);
    let start = (lo / step).floor() * step;
    let end = (hi / step).ceil() * step;
    let count = ((end - start) / step).round() as usize;
    let marks = (0..=count).map(|i| start + i as f64 * step).collect();
    (start, end, marks)
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e5 || v.abs() < 1e-2 {
        format!("{v:.2e}")
    } else {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Plots `metric` against `lambda_per_s`, one line per `(R, K, mode,
/// source)`. Simulated series are dashed with point markers.
pub fn render_svg(table: &Table, metric: &str) -> Result<String> {
    let unknown = || Error::UnknownMetric {
        name: metric.to_string(),
        valid: METRICS.join(", "),
    };
    if !METRICS.contains(&metric) {
        return Err(unknown());
    }
    let y_col = table.column(metric).ok_or_else(unknown)?;
    let col = |name: &str| {
        table
            .column(name)
            .ok_or_else(|| Error::Csv(format!("missing column `{name}`")))
    };
    let (x_col, r_col, k_col, mode_col, src_col) =
        (col("lambda_per_s")?, col("R")?, col("K")?, col("mode")?, col("source")?);

    let mut series: BTreeMap<SeriesKey, Vec<(f64, f64)>> = BTreeMap::new();
    for row in &table.rows {
        let parse = |i: usize| row[i].parse::<f64>();
        let (Ok(x), Ok(y)) = (parse(x_col), parse(y_col)) else {
            continue;
        };
        let key = SeriesKey {
            r: row[r_col].parse().map_err(|_| Error::Csv(format!("bad R `{}`", row[r_col])))?,
            k: row[k_col].parse().map_err(|_| Error::Csv(format!("bad K `{}`", row[k_col])))?,
            mode: row[mode_col].clone(),
            source: row[src_col].clone(),
        };
        series.entry(key).or_default().push((x, y));
    }
    if series.is_empty() {
        return Err(Error::Csv(format!("no numeric values for `{metric}`")));
    }
    for pts in series.values_mut() {
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    }

    let all = series.values().flatten();
    let (mut x_lo, mut x_hi, mut y_lo, mut y_hi) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &(x, y) in all {
        x_lo = x_lo.min(x);
        x_hi = x_hi.max(x);
        y_lo = y_lo.min(y);
        y_hi = y_hi.max(y);
    }
    if y_lo > 0.0 {
        y_lo = 0.0;
    }
    let (x_lo, x_hi, x_ticks) = ticks(x_lo, x_hi);
    let (y_lo, y_hi, y_ticks) = ticks(y_lo, y_hi);
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x_lo) / (x_hi - x_lo) * plot_w;
    let sy = |y: f64| TOP + plot_h - (y - y_lo) / (y_hi - y_lo) * plot_h;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
        LEFT + plot_w / 2.0,
        escape(metric)
    );

    for &t in &x_ticks {
        let x = sx(t);
        let _ = writeln!(
            svg,
            r##"<line x1="{x:.2}" y1="{TOP}" x2="{x:.2}" y2="{:.2}" stroke="#e5e5e5"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"##,
            TOP + plot_h,
            TOP + plot_h + 18.0,
            tick_label(t)
        );
    }
    for &t in &y_ticks {
        let y = sy(t);
        let _ = writeln!(
            svg,
            r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#e5e5e5"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##,
            LEFT + plot_w,
            LEFT - 8.0,
            y + 4.0,
            tick_label(t)
        );
    }
    let _ = writeln!(
        svg,
        r#"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">lambda (arrivals/s)</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 15.0
    );

    for (i, (key, pts)) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let dashed = key.source == "sim";
        let path: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="2"{} points="{}"/>"#,
            if dashed { r#" stroke-dasharray="6,4""# } else { "" },
            path.join(" ")
        );
        if dashed {
            for &(x, y) in pts {
                let _ = writeln!(svg, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#, sx(x), sy(y));
            }
        }
        let ly = TOP + 10.0 + 20.0 * i as f64;
        let lx = WIDTH - RIGHT + 15.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"{}/><text x="{}" y="{}">{}</text>"#,
            lx + 25.0,
            if dashed { r#" stroke-dasharray="6,4""# } else { "" },
            lx + 32.0,
            ly + 4.0,
            escape(&key.label())
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}
