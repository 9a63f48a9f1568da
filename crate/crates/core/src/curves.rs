//! Labelled curves sharing one x axis, with a CSV reader/writer and a
//! minimal SVG line plot.

use std::fmt::Write as _;
use std::io::{Read, Write};

use crate::error::{Error, Result};

/// Shortest decimal text that parses back to exactly `x`. Very small and
/// very large magnitudes use exponent notation.
pub fn format_number(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 {
        "0".to_string()
    } else if !(1e-4..1e6).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub y: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveSet {
    pub x_label: String,
    pub y_label: String,
    pub x: Vec<f64>,
    pub series: Vec<Series>,
}

impl CurveSet {
    pub fn new(x_label: &str, y_label: &str, x: Vec<f64>) -> Self {
        Self {
            x_label: x_label.into(),
            y_label: y_label.into(),
            x,
            series: Vec::new(),
        }
    }

    pub fn push(&mut self, label: impl Into<String>, y: Vec<f64>) -> &mut Self {
        self.series.push(Series {
            label: label.into(),
            y,
        });
        self
    }

    pub fn series(&self, label: &str) -> Option<&[f64]> {
        self.series
            .iter()
            .find(|s| s.label == label)
            .map(|s| s.y.as_slice())
    }

    /// x strictly increasing, every series the same length as x, all finite.
    pub fn validate(&self) -> Result<()> {
        if self.x.is_empty() {
            return Err(Error::EmptyGrid);
        }
        if self.x.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::invalid("x", "must be strictly increasing"));
        }
        if self.x.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("x", "non-finite value"));
        }
        for s in &self.series {
            if s.y.len() != self.x.len() {
                return Err(Error::invalid(
                    "series",
                    format!("`{}` has the wrong length", s.label),
                ));
            }
            if s.y.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid(
                    "series",
                    format!("`{}` has a non-finite value", s.label),
                ));
            }
        }
        Ok(())
    }

    /// Header row `x_label,series...`, one row per x.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        self.validate()?;
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec![self.x_label.as_str()];
        header.extend(self.series.iter().map(|s| s.label.as_str()));
        w.write_record(&header)?;
        for (i, &x) in self.x.iter().enumerate() {
            let mut row = vec![format_number(x)];
            row.extend(self.series.iter().map(|s| format_number(s.y[i])));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is UTF-8"))
    }

    /// Parses CSV written by [`CurveSet::write_csv`]. The y label is not
    /// stored in the file and comes back empty.
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let header = r.headers()?.clone();
        let mut set = CurveSet::new(header.get(0).unwrap_or(""), "", Vec::new());
        for label in header.iter().skip(1) {
            set.push(label, Vec::new());
        }
        for rec in r.records() {
            let rec = rec?;
            let mut values = rec.iter().map(|f| {
                f.parse::<f64>()
                    .map_err(|_| Error::invalid("csv", format!("`{f}` is not a number")))
            });
            set.x.push(
                values
                    .next()
                    .ok_or_else(|| Error::invalid("csv", "empty row"))??,
            );
            for s in &mut set.series {
                s.y.push(
                    values
                        .next()
                        .ok_or_else(|| Error::invalid("csv", "short row"))??,
                );
            }
        }
        set.validate()?;
        Ok(set)
    }

    /// Self-contained SVG: axes with five ticks each, one polyline per
    /// series, legend in the top right.
    pub fn to_svg(&self, title: &str) -> Result<String> {
        self.validate()?;
        const W: f64 = 720.0;
        const H: f64 = 480.0;
        const L: f64 = 80.0;
        const R: f64 = 20.0;
        const T: f64 = 40.0;
        const B: f64 = 60.0;
        const COLORS: [&str; 6] = [
            "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
        ];

        let (x0, x1) = (self.x[0], self.x[self.x.len() - 1]);
        let ys = self.series.iter().flat_map(|s| s.y.iter().copied());
        let (mut y0, mut y1) = ys.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
            (a.min(v), b.max(v))
        });
        if !y0.is_finite() {
            (y0, y1) = (0.0, 1.0);
        }
        if y1 - y0 <= 0.0 {
            y0 -= 0.5;
            y1 += 0.5;
        }
        let pad = 0.05 * (y1 - y0);
        let (y0, y1) = (y0 - pad, y1 + pad);
        let x_span = if x1 > x0 { x1 - x0 } else { 1.0 };
        let px = |x: f64| L + (x - x0) / x_span * (W - L - R);
        let py = |y: f64| H - B - (y - y0) / (y1 - y0) * (H - T - B);

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
            W / 2.0,
            escape(title)
        );
        let _ = writeln!(
            s,
            r#"<path d="M{L} {T} V{} H{}" fill="none" stroke="black"/>"#,
            H - B,
            W - R
        );
        for i in 0..=4 {
            let f = i as f64 / 4.0;
            let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
            let (tx, ty) = (px(xv), py(yv));
            let _ = writeln!(
                s,
                r#"<line x1="{tx:.2}" y1="{}" x2="{tx:.2}" y2="{}" stroke="black"/>"#,
                H - B,
                H - B + 5.0
            );
            let _ = writeln!(
                s,
                r#"<text x="{tx:.2}" y="{}" text-anchor="middle">{}</text>"#,
                H - B + 20.0,
                tick(xv)
            );
            let _ = writeln!(
                s,
                r#"<line x1="{}" y1="{ty:.2}" x2="{L}" y2="{ty:.2}" stroke="black"/>"#,
                L - 5.0
            );
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#,
                L - 8.0,
                ty + 4.0,
                tick(yv)
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            (L + W - R) / 2.0,
            H - 15.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text x="20" y="{0}" text-anchor="middle" transform="rotate(-90 20 {0})">{1}</text>"#,
            (T + H - B) / 2.0,
            escape(&self.y_label)
        );
        for (k, series) in self.series.iter().enumerate() {
            let color = COLORS[k % COLORS.len()];
            let points: Vec<String> = self
                .x
                .iter()
                .zip(&series.y)
                .map(|(&x, &y)| format!("{:.2},{:.2}", px(x), py(y)))
                .collect();
            let _ = writeln!(
                s,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                points.join(" ")
            );
            let ly = T + 10.0 + 18.0 * k as f64;
            let lx = W - R - 160.0;
            let _ = writeln!(
                s,
                r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#,
                lx + 24.0
            );
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}">{}</text>"#,
                lx + 30.0,
                ly + 4.0,
                escape(&series.label)
            );
        }
        s.push_str("</svg>\n");
        Ok(s)
    }
}

fn tick(v: f64) -> String {
    let t = format!("{v:.3}");
    let t = t.trim_end_matches('0').trim_end_matches('.');
    if t == "-0" {
        "0".into()
    } else {
        t.into()
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
