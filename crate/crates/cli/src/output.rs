//! Deterministic output writers: CSV tables, JSON reports and SVG line
//! plots. Every plotted series is also emitted as CSV by the callers; the
//! SVG is a derived artifact, never the only record.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde_json::Value;

/// Which artifact kinds a run should write.
#[derive(Debug, Clone, Copy)]
pub struct Formats {
    pub csv: bool,
    pub json: bool,
    pub svg: bool,
}

impl Formats {
    /// Parses a comma-separated subset of `csv,json,svg`.
    pub fn parse(s: &str) -> Result<Formats, String> {
        let mut f = Formats { csv: false, json: false, svg: false };
        for part in s.split(',') {
            match part.trim() {
                "csv" => f.csv = true,
                "json" => f.json = true,
                "svg" => f.svg = true,
                other => return Err(format!("unknown output format `{other}`")),
            }
        }
        Ok(f)
    }
}

/// Formats a float with Rust's shortest-roundtrip representation;
/// non-finite values use the literals `-inf`, `inf`, `nan`.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v}")
    } else if v.is_nan() {
        "nan".to_string()
    } else if v > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

/// JSON encoding of a float; non-finite values become the same string
/// literals as in CSV so reports round-trip losslessly.
pub fn json_f64(v: f64) -> Value {
    if v.is_finite() {
        serde_json::json!(v)
    } else {
        Value::String(fmt_f64(v))
    }
}

pub fn json_f64_vec(vs: &[f64]) -> Value {
    Value::Array(vs.iter().map(|&v| json_f64(v)).collect())
}

/// Writes a CSV file with a header row; fields are written verbatim (all
/// values here are numeric or simple identifiers, never quoted text).
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> io::Result<()> {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    fs::write(path, out)
}

/// Writes a pretty-printed JSON report with a trailing newline.
pub fn write_json(path: &Path, value: &Value) -> io::Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .expect("report values contain no non-string keys");
    text.push('\n');
    fs::write(path, text)
}

/// One plotted series: a name and its finite sample points.
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

const PALETTE: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

/// Writes a minimal line plot: axes box, per-series polyline and legend,
/// with data ranges padded by 5%. Non-finite points must already be
/// filtered out by the caller.
pub fn write_svg(path: &Path, title: &str, series: &[Series]) -> io::Result<()> {
    let (w, h) = (640.0, 400.0);
    let (ml, mr, mt, mb) = (60.0, 20.0, 40.0, 40.0);
    let pts: Vec<(f64, f64)> = series.iter().flat_map(|s| s.points.iter().copied()).collect();
    let (mut x0, mut x1) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in &pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !(x0.is_finite() && y0.is_finite()) {
        // nothing plottable; still emit a valid empty plot
        x0 = 0.0;
        x1 = 1.0;
        y0 = 0.0;
        y1 = 1.0;
    }
    let pad = |lo: &mut f64, hi: &mut f64| {
        let span = (*hi - *lo).max(1e-12);
        *lo -= 0.05 * span;
        *hi += 0.05 * span;
    };
    pad(&mut x0, &mut x1);
    pad(&mut y0, &mut y1);
    let sx = |x: f64| ml + (x - x0) / (x1 - x0) * (w - ml - mr);
    let sy = |y: f64| h - mb - (y - y0) / (y1 - y0) * (h - mt - mb);

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" \
         viewBox=\"0 0 {w} {h}\">\n"
    ));
    svg.push_str(&format!(
        "<rect x=\"{ml}\" y=\"{mt}\" width=\"{}\" height=\"{}\" fill=\"none\" \
         stroke=\"#333\"/>\n",
        w - ml - mr,
        h - mt - mb
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" \
         font-size=\"15\">{title}</text>\n",
        w / 2.0
    ));
    for (anchor, x, y, v) in [
        ("start", ml, h - mb + 16.0, x0),
        ("end", w - mr, h - mb + 16.0, x1),
        ("end", ml - 6.0, h - mb, y0),
        ("end", ml - 6.0, mt + 10.0, y1),
    ] {
        svg.push_str(&format!(
            "<text x=\"{x:.1}\" y=\"{y:.1}\" text-anchor=\"{anchor}\" \
             font-family=\"sans-serif\" font-size=\"11\">{:.4}</text>\n",
            v
        ));
    }
    for (k, s) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        if !s.points.is_empty() {
            let path_pts: Vec<String> = s
                .points
                .iter()
                .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
                .collect();
            svg.push_str(&format!(
                "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" \
                 points=\"{}\"/>\n",
                path_pts.join(" ")
            ));
        }
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"12\" \
             fill=\"{color}\">{}</text>\n",
            ml + 8.0,
            mt + 16.0 + 14.0 * k as f64,
            s.name
        ));
    }
    svg.push_str("</svg>\n");
    fs::write(path, svg)
}

/// Ensures the output directory exists and returns the path for `name`.
pub fn out_path(dir: &Path, name: &str) -> io::Result<PathBuf> {
    fs::create_dir_all(dir)?;
    Ok(dir.join(name))
}
