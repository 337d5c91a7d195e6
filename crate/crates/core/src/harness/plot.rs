//! SVG scatter of per-replication active-link counts against `n`.
//!
//! Output is plain text assembled in a fixed order with fixed-precision
//! numbers, so identical inputs give identical bytes.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::harness::fit::ScalingFit;
use crate::harness::sweep::ExperimentRecord;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 64.0;
const RIGHT: f64 = 24.0;
const TOP: f64 = 36.0;
const BOTTOM: f64 = 52.0;
const TICKS: usize = 5;
const CURVE_SAMPLES: usize = 100;

struct Axis {
    lo: f64,
    hi: f64,
    px_lo: f64,
    px_hi: f64,
}

impl Axis {
    fn new(lo: f64, hi: f64, px_lo: f64, px_hi: f64) -> Self {
        // pad degenerate ranges so a single point sits mid-axis
        let (lo, hi) = if hi > lo {
            let pad = 0.05 * (hi - lo);
            (lo - pad, hi + pad)
        } else {
            let pad = if lo == 0.0 { 1.0 } else { 0.1 * lo.abs() };
            (lo - pad, hi + pad)
        };
        Axis { lo, hi, px_lo, px_hi }
    }

    fn map(&self, v: f64) -> f64 {
        self.px_lo + (v - self.lo) / (self.hi - self.lo) * (self.px_hi - self.px_lo)
    }

    fn ticks(&self) -> Vec<f64> {
        (0..TICKS)
            .map(|k| self.lo + (self.hi - self.lo) * k as f64 / (TICKS - 1) as f64)
            .collect()
    }
}

fn label(v: f64) -> String {
    if v.abs() >= 100.0 {
        format!("{v:.0}")
    } else {
        format!("{v:.1}")
    }
}

pub fn render_svg(records: &[ExperimentRecord], fit: Option<&ScalingFit>) -> Result<String> {
    if records.is_empty() {
        return Err(Error::param("cannot plot an empty record set"));
    }
    let n_min = records.iter().map(|r| r.n).fold(f64::INFINITY, f64::min);
    let n_max = records.iter().map(|r| r.n).fold(f64::NEG_INFINITY, f64::max);
    let mut y_min = records.iter().map(|r| r.eta_n as f64).fold(f64::INFINITY, f64::min);
    let mut y_max = records.iter().map(|r| r.eta_n as f64).fold(f64::NEG_INFINITY, f64::max);

    let curve: Option<Vec<(f64, f64)>> = fit.filter(|_| n_max > n_min).map(|f| {
        (0..=CURVE_SAMPLES)
            .map(|k| {
                let n = n_min + (n_max - n_min) * k as f64 / CURVE_SAMPLES as f64;
                (n, f.predict(n))
            })
            .collect()
    });
    if let Some(c) = &curve {
        for &(_, y) in c {
            y_min = y_min.min(y);
            y_max = y_max.max(y);
        }
    }

    let x = Axis::new(n_min, n_max, LEFT, WIDTH - RIGHT);
    let y = Axis::new(y_min, y_max, HEIGHT - BOTTOM, TOP);

    let mut s = String::new();
    let w = &mut s;
    // writes to a String cannot fail
    let _ = writeln!(
        w,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH:.0}" height="{HEIGHT:.0}" viewBox="0 0 {WIDTH:.0} {HEIGHT:.0}">"#
    );
    let _ = writeln!(w, r#"<rect x="0" y="0" width="{WIDTH:.0}" height="{HEIGHT:.0}" fill="white"/>"#);
    let _ = writeln!(
        w,
        r#"<text x="{:.2}" y="22" font-family="sans-serif" font-size="14" text-anchor="middle">Active links vs intensity</text>"#,
        WIDTH / 2.0
    );
    let (x0, x1) = (LEFT, WIDTH - RIGHT);
    let (y0, y1) = (HEIGHT - BOTTOM, TOP);
    let _ = writeln!(
        w,
        r#"<path d="M{x0:.2},{y1:.2} L{x0:.2},{y0:.2} L{x1:.2},{y0:.2}" fill="none" stroke="black" stroke-width="1"/>"#
    );
    for t in x.ticks() {
        let px = x.map(t);
        let _ = writeln!(
            w,
            r#"<line x1="{px:.2}" y1="{y0:.2}" x2="{px:.2}" y2="{:.2}" stroke="black"/><text x="{px:.2}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="middle">{}</text>"#,
            y0 + 5.0,
            y0 + 18.0,
            label(t)
        );
    }
    for t in y.ticks() {
        let py = y.map(t);
        let _ = writeln!(
            w,
            r#"<line x1="{:.2}" y1="{py:.2}" x2="{x0:.2}" y2="{py:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="end">{}</text>"#,
            x0 - 5.0,
            x0 - 8.0,
            py + 4.0,
            label(t)
        );
    }
    let _ = writeln!(
        w,
        r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12" text-anchor="middle">n</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 12.0
    );
    let _ = writeln!(
        w,
        r#"<text x="16" y="{:.2}" font-family="sans-serif" font-size="12" text-anchor="middle" transform="rotate(-90 16 {:.2})">active links</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    );
    let _ = writeln!(w, r##"<g fill="#1f5fbf" fill-opacity="0.5">"##);
    for r in records {
        let _ = writeln!(
            w,
            r#"<circle cx="{:.2}" cy="{:.2}" r="2"/>"#,
            x.map(r.n),
            y.map(r.eta_n as f64)
        );
    }
    let _ = writeln!(w, "</g>");
    if let Some(c) = curve {
        let pts: Vec<String> = c
            .iter()
            .map(|&(n, v)| format!("{:.2},{:.2}", x.map(n), y.map(v)))
            .collect();
        let _ = writeln!(
            w,
            r##"<polyline points="{}" fill="none" stroke="#c0392b" stroke-width="2"/>"##,
            pts.join(" ")
        );
    }
    let _ = writeln!(w, "</svg>");
    Ok(s)
}

pub fn emit_plot(records: &[ExperimentRecord], fit: Option<&ScalingFit>, path: impl AsRef<Path>) -> Result<()> {
    let svg = render_svg(records, fit)?;
    std::fs::write(path, svg)?;
    Ok(())
}
