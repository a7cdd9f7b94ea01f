//! Standalone SVG line charts, one stacked panel per variable.

use std::fmt::Write as _;

use sfdsim::trajectory::Table;
use sfdsim::{fmt_value, TrajectoryError};

const MARGIN_LEFT: f64 = 80.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 28.0;
const MARGIN_BOTTOM: f64 = 28.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChartSpec {
    pub series: Vec<Series>,
    pub width: u32,
    /// Height of each panel.
    pub height: u32,
}

/// Picks `vars` out of a run table, dropping missing (empty) cells.
pub fn series_from_table(
    table: &Table,
    vars: &[String],
    unit_of: impl Fn(&str) -> Option<String>,
) -> Result<Vec<Series>, TrajectoryError> {
    let times = &table.columns[0].values;
    vars.iter()
        .map(|v| {
            let col = table.columns[1..]
                .iter()
                .find(|c| &c.name == v)
                .ok_or_else(|| TrajectoryError::MissingColumn(v.clone()))?;
            let label = match unit_of(v) {
                Some(u) => format!("{v} [{u}]"),
                None => v.clone(),
            };
            let points = times
                .iter()
                .zip(&col.values)
                .filter(|(t, y)| t.is_finite() && y.is_finite())
                .map(|(t, y)| (*t, *y))
                .collect();
            Ok(Series { label, points })
        })
        .collect()
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if lo == hi {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn label(v: f64) -> String {
    let s = fmt_value(v);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s.is_empty() || s == "-" { "0".into() } else { s.to_string() }
}

pub fn render_svg(chart: &ChartSpec) -> String {
    let w = chart.width as f64;
    let h = chart.height as f64;
    let total = h * chart.series.len().max(1) as f64;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}" font-family="sans-serif" font-size="11">"#,
        chart.width, total, chart.width, total
    );
    let _ = writeln!(out, r#"<rect x="0" y="0" width="{}" height="{}" fill="white"/>"#, chart.width, total);
    let plot_w = (w - MARGIN_LEFT - MARGIN_RIGHT).max(1.0);
    let plot_h = (h - MARGIN_TOP - MARGIN_BOTTOM).max(1.0);
    for (i, s) in chart.series.iter().enumerate() {
        let top = i as f64 * h + MARGIN_TOP;
        let bottom = top + plot_h;
        let right = MARGIN_LEFT + plot_w;
        let (x0, x1) = range(s.points.iter().map(|p| p.0));
        let (y0, y1) = range(s.points.iter().map(|p| p.1));
        let sx = |x: f64| MARGIN_LEFT + (x - x0) / (x1 - x0) * plot_w;
        let sy = |y: f64| bottom - (y - y0) / (y1 - y0) * plot_h;

        let _ = writeln!(out, r#"<g class="panel" id="panel-{i}">"#);
        let _ = writeln!(
            out,
            r#"<text x="{MARGIN_LEFT}" y="{:.2}" font-weight="bold">{}</text>"#,
            top - 10.0,
            escape(&s.label)
        );
        let _ = writeln!(
            out,
            r#"<path d="M{MARGIN_LEFT:.2},{top:.2} L{MARGIN_LEFT:.2},{bottom:.2} L{right:.2},{bottom:.2}" fill="none" stroke="black"/>"#
        );
        for (y, text) in [(top, label(y1)), (bottom, label(y0))] {
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
                MARGIN_LEFT - 6.0,
                y + 4.0,
                text
            );
        }
        for (x, anchor, text) in [(MARGIN_LEFT, "start", label(x0)), (right, "end", label(x1))] {
            let _ = writeln!(
                out,
                r#"<text x="{x:.2}" y="{:.2}" text-anchor="{anchor}">{text}</text>"#,
                bottom + 16.0
            );
        }
        let pts: Vec<String> = s
            .points
            .iter()
            .map(|(x, y)| format!("{:.2},{:.2}", sx(*x), sy(*y)))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="steelblue" stroke-width="1.5"/>"#,
            pts.join(" ")
        );
        if let [(x, y)] = s.points.as_slice() {
            let _ = writeln!(out, r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="steelblue"/>"#, sx(*x), sy(*y));
        }
        out.push_str("</g>\n");
    }
    out.push_str("</svg>\n");
    out
}
