//! Number formatting, output sinks and the SVG writer.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// 17 significant digits, enough to round-trip any `f64`.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        // adding zero folds -0 into 0
        format!("{:.16e}", x + 0.0)
    } else {
        format!("{x}")
    }
}

/// Writes `text` to `path`, or to standard output when `path` is `None`.
pub fn emit(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
        }
    }
    Ok(())
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// `run.csv` → `run.summary.json`.
pub fn sibling_summary(out: &Path) -> PathBuf {
    out.with_extension("summary.json")
}

/// CSV table with a fixed header; rows are joined with `\n`.
#[derive(Debug, Clone)]
pub struct Csv {
    text: String,
    columns: usize,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut text = header.join(",");
        text.push('\n');
        Self { text, columns: header.len() }
    }

    pub fn row<S: AsRef<str>>(&mut self, fields: &[S]) {
        debug_assert_eq!(fields.len(), self.columns);
        for (i, f) in fields.iter().enumerate() {
            if i > 0 {
                self.text.push(',');
            }
            self.text.push_str(f.as_ref());
        }
        self.text.push('\n');
    }

    pub fn finish(self) -> String {
        self.text
    }
}

/// Polyline plot with axes, written as SVG 1.1.
#[derive(Debug, Clone)]
pub struct SvgPlot {
    width: f64,
    height: f64,
    margin: f64,
    x: (f64, f64),
    y: (f64, f64),
    body: String,
}

impl SvgPlot {
    pub fn new(x: (f64, f64), y: (f64, f64)) -> Self {
        Self { width: 640.0, height: 480.0, margin: 48.0, x, y, body: String::new() }
    }

    fn px(&self, x: f64) -> f64 {
        self.margin + (x - self.x.0) / (self.x.1 - self.x.0) * (self.width - 2.0 * self.margin)
    }

    fn py(&self, y: f64) -> f64 {
        self.height - self.margin - (y - self.y.0) / (self.y.1 - self.y.0) * (self.height - 2.0 * self.margin)
    }

    pub fn polyline(&mut self, points: &[(f64, f64)], color: &str) {
        if points.len() < 2 {
            if let Some(&(x, y)) = points.first() {
                let _ = writeln!(
                    self.body,
                    r#"<circle cx="{:.2}" cy="{:.2}" r="2" fill="{color}"/>"#,
                    self.px(x),
                    self.py(y)
                );
            }
            return;
        }
        let pts: Vec<String> = points.iter().map(|&(x, y)| format!("{:.2},{:.2}", self.px(x), self.py(y))).collect();
        let _ = writeln!(
            self.body,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1" points="{}"/>"#,
            pts.join(" ")
        );
    }

    pub fn finish(self, x_label: &str, y_label: &str, title: &str) -> String {
        let (w, h, m) = (self.width, self.height, self.margin);
        let mut s = String::new();
        let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
        );
        let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<rect x="{m}" y="{m}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            w - 2.0 * m,
            h - 2.0 * m
        );
        if self.y.0 < 0.0 && self.y.1 > 0.0 {
            let y0 = self.py(0.0);
            let _ = writeln!(s, r##"<line x1="{m}" y1="{y0:.2}" x2="{}" y2="{y0:.2}" stroke="#999"/>"##, w - m);
        }
        if self.x.0 < 0.0 && self.x.1 > 0.0 {
            let x0 = self.px(0.0);
            let _ = writeln!(s, r##"<line x1="{x0:.2}" y1="{m}" x2="{x0:.2}" y2="{}" stroke="#999"/>"##, h - m);
        }
        for (v, anchor) in [(self.x.0, "start"), (self.x.1, "end")] {
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{}" font-size="11" text-anchor="{anchor}">{v:.3}</text>"#,
                self.px(v),
                h - m + 14.0
            );
        }
        for v in [self.y.0, self.y.1] {
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{:.2}" font-size="11" text-anchor="end">{v:.3}</text>"#,
                m - 4.0,
                self.py(v) + 4.0
            );
        }
        let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="13" text-anchor="middle">{x_label}</text>"#, w / 2.0, h - 12.0);
        let _ = writeln!(
            s,
            r#"<text x="14" y="{}" font-size="13" text-anchor="middle" transform="rotate(-90 14 {})">{y_label}</text>"#,
            h / 2.0,
            h / 2.0
        );
        let _ = writeln!(s, r#"<text x="{}" y="24" font-size="14" text-anchor="middle">{title}</text>"#, w / 2.0);
        s.push_str(&self.body);
        s.push_str("</svg>\n");
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, -1.0 / 3.0, 1e-300, 6.02214076e23, std::f64::consts::PI, 0.0] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(num(1.0), "1.0000000000000000e0");
        assert_eq!(num(f64::NAN), "NaN");
    }

    #[test]
    fn csv_layout() {
        let mut c = Csv::new(&["a", "b"]);
        c.row(&["1", "2"]);
        assert_eq!(c.finish(), "a,b\n1,2\n");
    }

    #[test]
    fn svg_is_well_formed() {
        let mut p = SvgPlot::new((-1.0, 1.0), (0.0, 2.0));
        p.polyline(&[(0.0, 0.0), (1.0, 2.0)], "red");
        p.polyline(&[(0.5, 1.0)], "blue");
        let s = p.finish("x", "y", "t");
        assert!(s.starts_with("<?xml"));
        assert!(s.trim_end().ends_with("</svg>"));
        assert_eq!(s.matches("<polyline").count(), 1);
        assert_eq!(s.matches("<circle").count(), 1);
    }
}
