//! SVG line plots rendered from CSV files that were already written.
//!
//! Each series keeps its source values verbatim (the CSV text of every
//! point) in a `data-points` attribute, so a plot is a lossless view of the
//! table it was drawn from.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::CliResult;
use crate::output::OutDir;

/// What to draw from one CSV file.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    /// Source CSV file name inside the output directory.
    pub csv: String,
    /// Target SVG file name.
    pub svg: String,
    pub title: String,
    /// Column on the horizontal axis.
    pub x: String,
    /// Columns drawn as separate series.
    pub ys: Vec<String>,
    /// Optional column splitting rows into separate series (one per distinct value).
    pub group: Option<String>,
}

/// A named polyline with the original CSV text of each coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub points: Vec<(String, String)>,
}

impl Series {
    fn numeric(&self) -> Vec<(f64, f64)> {
        self.points
            .iter()
            .filter_map(|(x, y)| Some((x.parse::<f64>().ok()?, y.parse::<f64>().ok()?)))
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .collect()
    }
}

/// Reads the series described by `spec`; `None` when the file or a column is absent.
pub fn read_series(dir: &Path, spec: &PlotSpec) -> CliResult<Option<Vec<Series>>> {
    let path = dir.join(&spec.csv);
    if !path.exists() {
        return Ok(None);
    }
    let mut rd = csv::Reader::from_path(path)?;
    let header = rd.headers()?.clone();
    let col = |name: &str| header.iter().position(|h| h == name);
    let Some(xi) = col(&spec.x) else { return Ok(None) };
    let mut yi = Vec::new();
    for y in &spec.ys {
        match col(y) {
            Some(i) => yi.push((y.clone(), i)),
            None => return Ok(None),
        }
    }
    let gi = match &spec.group {
        Some(g) => match col(g) {
            Some(i) => Some(i),
            None => return Ok(None),
        },
        None => None,
    };
    let mut series: Vec<Series> = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        let group = gi.map(|i| rec[i].to_string());
        for (name, i) in &yi {
            let label = match &group {
                Some(g) => format!("{name} @ {}={g}", spec.group.as_deref().unwrap_or("")),
                None => name.clone(),
            };
            let pt = (rec[xi].to_string(), rec[*i].to_string());
            match series.iter_mut().find(|s| s.name == label) {
                Some(s) => s.points.push(pt),
                None => series.push(Series { name: label, points: vec![pt] }),
            }
        }
    }
    Ok(Some(series))
}

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

/// Renders series as an SVG 1.1 document.
pub fn render_svg(title: &str, xlabel: &str, series: &[Series]) -> String {
    let (w, h, m) = (720.0, 440.0, 60.0);
    let pts: Vec<(f64, f64)> = series.iter().flat_map(|s| s.numeric()).collect();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in &pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if y1 <= y0 {
        let pad = if y0 == 0.0 { 1.0 } else { y0.abs() * 0.1 };
        y0 -= pad;
        y1 += pad;
    }
    let sx = |x: f64| m + (x - x0) / (x1 - x0) * (w - 2.0 * m);
    let sy = |y: f64| h - m - (y - y0) / (y1 - y0) * (h - 2.0 * m);
    let esc = |s: &str| s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;");
    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(out, r#"<title>{}</title>"#, esc(title));
    let _ = writeln!(out, r#"<rect x="0" y="0" width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<rect x="{m}" y="{m}" width="{}" height="{}" fill="none" stroke="black" stroke-width="1"/>"#,
        w - 2.0 * m,
        h - 2.0 * m
    );
    let _ = writeln!(out, r#"<text x="{}" y="30" font-size="16" text-anchor="middle">{}</text>"#, w / 2.0, esc(title));
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">{}</text>"#,
        w / 2.0,
        h - 15.0,
        esc(xlabel)
    );
    for (v, anchor_y) in [(y0, h - m), (y1, m)] {
        let _ =
            writeln!(out, r#"<text x="{}" y="{anchor_y}" font-size="10" text-anchor="end">{v:.4e}</text>"#, m - 4.0);
    }
    for (v, anchor_x) in [(x0, m), (x1, w - m)] {
        let _ = writeln!(
            out,
            r#"<text x="{anchor_x}" y="{}" font-size="10" text-anchor="middle">{v:.4e}</text>"#,
            h - m + 14.0
        );
    }
    for (k, s) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let path: Vec<String> = s.numeric().iter().map(|&(x, y)| format!("{:.3},{:.3}", sx(x), sy(y))).collect();
        let data: Vec<String> = s.points.iter().map(|(x, y)| format!("{x} {y}")).collect();
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" data-name="{}" data-points="{}" points="{}"/>"#,
            esc(&s.name),
            esc(&data.join(";")),
            path.join(" ")
        );
        let ly = m + 14.0 + 14.0 * k as f64;
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{ly}" font-size="11" fill="{color}">{}</text>"#,
            w - m - 170.0,
            esc(&s.name)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Parses the `data-points` attributes of an SVG produced by [`render_svg`].
pub fn parse_svg_points(svg: &str) -> Vec<Vec<(f64, f64)>> {
    svg.lines()
        .filter_map(|line| {
            let start = line.find("data-points=\"")? + "data-points=\"".len();
            let rest = &line[start..];
            let body = &rest[..rest.find('"')?];
            Some(
                body.split(';')
                    .filter(|p| !p.is_empty())
                    .filter_map(|p| {
                        let mut it = p.split(' ');
                        Some((it.next()?.parse().ok()?, it.next()?.parse().ok()?))
                    })
                    .collect(),
            )
        })
        .collect()
}

/// Renders every spec whose data exists; returns warnings for the skipped ones.
pub fn emit_plots(out: &mut OutDir, specs: &[PlotSpec]) -> CliResult<Vec<String>> {
    let mut warnings = Vec::new();
    if specs.is_empty() {
        warnings.push("no curves to plot".to_string());
    }
    for spec in specs {
        match read_series(out.root(), spec)? {
            Some(series) if series.iter().any(|s| !s.points.is_empty()) => {
                let svg = render_svg(&spec.title, &spec.x, &series);
                out.text(&spec.svg, &svg)?;
            }
            _ => warnings.push(format!("plot {} skipped: no data in {}", spec.svg, spec.csv)),
        }
    }
    Ok(warnings)
}
