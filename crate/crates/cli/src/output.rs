//! Artifact formats: JSON with 17 significant digits and sorted keys, CSV,
//! SVG line charts, and atomic file writes.

use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::Failure;

/// Pretty JSON whose floats always carry 17 significant digits, so a value
/// read back is bit-identical and two runs print the same bytes.
struct Fixed17<'a>(PrettyFormatter<'a>);

impl Formatter for Fixed17<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        write!(w, "{v:.16e}")
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Serialize through `serde_json::Value`, whose maps are sorted, so key order
/// does not depend on struct layout. Non-finite floats become null.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let tree = serde_json::to_value(value).expect("report types serialize to JSON");
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Fixed17(PrettyFormatter::new()));
    tree.serialize(&mut ser).expect("writing to memory");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

fn number(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        String::new()
    }
}

/// Comma-separated table with a header row and LF line endings.
pub fn csv(header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.iter().map(|&v| number(v)).collect::<Vec<_>>().join(","));
        out.push('\n');
    }
    out
}

pub struct Series<'a> {
    pub name: &'a str,
    pub points: Vec<(f64, f64)>,
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const MARGIN: f64 = 60.0;
const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

/// Static line chart. Non-finite points (and non-positive x on a log axis)
/// are dropped.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, log_x: bool, series: &[Series]) -> String {
    let tx = |x: f64| if log_x { x.log10() } else { x };
    let usable = |&(x, y): &(f64, f64)| x.is_finite() && y.is_finite() && (!log_x || x > 0.0);
    let pts: Vec<(f64, f64)> =
        series.iter().flat_map(|s| s.points.iter().copied().filter(usable)).map(|(x, y)| (tx(x), y)).collect();
    let (mut x0, mut x1, mut y0, mut y1) = pts.iter().fold(
        (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY),
        |(a, b, c, d), &(x, y)| (a.min(x), b.max(x), c.min(y), d.max(y)),
    );
    if pts.is_empty() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if y1 <= y0 {
        y1 = y0 + 1.0;
    }
    let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let py = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(svg, r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#, WIDTH / 2.0, escape(title));
    let (left, right, top, bottom) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    let _ = writeln!(
        svg,
        r#"<polyline points="{left},{top} {left},{bottom} {right},{bottom}" fill="none" stroke="black"/>"#
    );
    let fmt_x = |x: f64| if log_x { format!("{:.3e}", 10f64.powf(x)) } else { format!("{x:.3e}") };
    let _ = writeln!(svg, r#"<text x="{left}" y="{}" text-anchor="middle">{}</text>"#, bottom + 18.0, fmt_x(x0));
    let _ = writeln!(svg, r#"<text x="{right}" y="{}" text-anchor="middle">{}</text>"#, bottom + 18.0, fmt_x(x1));
    let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="end">{y0:.3e}</text>"#, left - 4.0, bottom);
    let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="end">{y1:.3e}</text>"#, left - 4.0, top + 4.0);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 16.0,
        escape(x_label)
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(y_label)
    );
    for (i, s) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let coords: Vec<String> = s
            .points
            .iter()
            .copied()
            .filter(usable)
            .map(|(x, y)| format!("{:.2},{:.2}", px(tx(x)), py(y)))
            .collect();
        let _ = writeln!(svg, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, coords.join(" "));
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" fill="{color}">{}</text>"#,
            right - 120.0,
            top + 16.0 * (i as f64 + 1.0),
            escape(s.name)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Files produced by one command, written only once everything is computed.
#[derive(Default)]
pub struct Artifacts {
    files: Vec<(String, String)>,
}

impl Artifacts {
    pub fn add(&mut self, name: &str, contents: String) {
        self.files.push((name.to_string(), contents));
    }

    /// Write each file to a temporary in `dir` and rename it into place.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>, Failure> {
        let io_err = |what: &str, e: &dyn std::fmt::Display| Failure::Config(format!("{what}: {e}"));
        std::fs::create_dir_all(dir).map_err(|e| io_err(&format!("cannot create {}", dir.display()), &e))?;
        let mut written = Vec::new();
        for (name, contents) in &self.files {
            let target = dir.join(name);
            let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| io_err("cannot create temporary file", &e))?;
            tmp.write_all(contents.as_bytes()).map_err(|e| io_err(&format!("writing {}", target.display()), &e))?;
            tmp.persist(&target).map_err(|e| io_err(&format!("renaming into {}", target.display()), &e))?;
            written.push(target);
        }
        Ok(written)
    }
}
