//! Minimal log-log SVG plots.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlotSpec {
    pub title: String,
    pub xlabel: String,
    pub ylabel: String,
    /// Slope of a dashed reference line through the first point of the first series.
    pub guide_slope: Option<f64>,
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 64.0;
const COLORS: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

fn num(v: f64) -> String {
    format!("{v:.2}")
}

/// Renders the series as an SVG 1.1 document. Identical input gives identical bytes.
pub fn render_loglog(series: &[Series], spec: &PlotSpec) -> Result<String> {
    let all: Vec<(f64, f64)> = series
        .iter()
        .flat_map(|s| s.points.iter().copied())
        .collect();
    if all.is_empty() {
        return Err(Error::TooFewSamples {
            found: 0,
            needed: 1,
        });
    }
    for &(x, y) in &all {
        for v in [x, y] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::NonPositiveValue(v));
            }
        }
    }
    let decades = |f: fn(&(f64, f64)) -> f64| {
        let lo = all
            .iter()
            .map(f)
            .fold(f64::INFINITY, f64::min)
            .log10()
            .floor();
        let hi = all
            .iter()
            .map(f)
            .fold(f64::NEG_INFINITY, f64::max)
            .log10()
            .ceil();
        (lo, if hi > lo { hi } else { lo + 1.0 })
    };
    let (x0, x1) = decades(|p| p.0);
    let (y0, y1) = decades(|p| p.1);
    let px = |x: f64| MARGIN + (x.log10() - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let py = |y: f64| HEIGHT - MARGIN - (y.log10() - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let (l, r, t, b) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    let _ = writeln!(
        s,
        r#"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        num(l),
        num(t),
        num(r - l),
        num(b - t)
    );
    for d in x0 as i32..=x1 as i32 {
        let x = px(10f64.powi(d));
        let _ = writeln!(
            s,
            r##"<line x1="{0}" y1="{1}" x2="{0}" y2="{2}" stroke="#ddd"/><text x="{0}" y="{3}" text-anchor="middle">1e{d}</text>"##,
            num(x),
            num(t),
            num(b),
            num(b + 16.0)
        );
    }
    for d in y0 as i32..=y1 as i32 {
        let y = py(10f64.powi(d));
        let _ = writeln!(
            s,
            r##"<line x1="{0}" y1="{1}" x2="{2}" y2="{1}" stroke="#ddd"/><text x="{3}" y="{1}" text-anchor="end" dominant-baseline="middle">1e{d}</text>"##,
            num(l),
            num(y),
            num(r),
            num(l - 6.0)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle" font-size="14">{}</text>"#,
        num(WIDTH / 2.0),
        num(MARGIN / 2.0),
        escape(&spec.title)
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        num(WIDTH / 2.0),
        num(HEIGHT - 16.0),
        escape(&spec.xlabel)
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{0}" text-anchor="middle" transform="rotate(-90 16 {0})">{1}</text>"#,
        num(HEIGHT / 2.0),
        escape(&spec.ylabel)
    );
    if let (Some(k), Some(&(ax, ay))) = (
        spec.guide_slope,
        series.iter().find_map(|s| s.points.first()),
    ) {
        let lo = 10f64.powf(x0);
        let hi = 10f64.powf(x1);
        let at = |x: f64| ay * (x / ax).powf(k);
        let _ = writeln!(
            s,
            r#"<clipPath id="frame"><rect x="{}" y="{}" width="{}" height="{}"/></clipPath>"#,
            num(l),
            num(t),
            num(r - l),
            num(b - t)
        );
        let _ = writeln!(
            s,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="gray" stroke-dasharray="6 4" clip-path="url(#frame)"/>"#,
            num(px(lo)),
            num(py(at(lo))),
            num(px(hi)),
            num(py(at(hi)))
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" fill="gray">slope {k}</text>"#,
            num(r - 80.0),
            num(b - 8.0)
        );
    }
    for (k, ser) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let path: Vec<String> = ser
            .points
            .iter()
            .map(|&(x, y)| format!("{},{}", num(px(x)), num(py(y))))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            path.join(" ")
        );
        for &(x, y) in &ser.points {
            let _ = writeln!(
                s,
                r#"<circle cx="{}" cy="{}" r="3" fill="{color}"/>"#,
                num(px(x)),
                num(py(y))
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" fill="{color}">{}</text>"#,
            num(l + 10.0),
            num(t + 18.0 + 16.0 * k as f64),
            escape(&ser.label)
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

pub fn emit_loglog_plot(series: &[Series], spec: &PlotSpec, path: &Path) -> Result<()> {
    let svg = render_loglog(series, spec)?;
    std::fs::write(path, svg).map_err(|e| Error::io(path, e))
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> PlotSpec {
        PlotSpec {
            title: "E vs eps".into(),
            xlabel: "eps".into(),
            ylabel: "E".into(),
            guide_slope: Some(1.0),
        }
    }

    #[test]
    fn deterministic_and_validated() {
        let s = vec![Series {
            label: "y = x".into(),
            points: (0..5).map(|k| (10f64.powi(-k), 10f64.powi(-k))).collect(),
        }];
        let a = render_loglog(&s, &spec()).unwrap();
        assert_eq!(a, render_loglog(&s, &spec()).unwrap());
        assert!(a.starts_with("<?xml") && a.contains("<polyline") && a.contains("slope 1"));
        assert!(render_loglog(&[], &spec()).is_err());
        let bad = vec![Series {
            label: "bad".into(),
            points: vec![(1.0, 0.0)],
        }];
        assert!(matches!(
            render_loglog(&bad, &spec()),
            Err(Error::NonPositiveValue(_))
        ));
    }

    #[test]
    fn unit_slope_line_is_diagonal() {
        let s = vec![Series {
            label: "a<b".into(),
            points: vec![(1e-4, 1e-4), (1.0, 1.0)],
        }];
        let svg = render_loglog(&s, &spec()).unwrap();
        // Square decade range: the series runs corner to corner of the frame.
        assert!(
            svg.contains(r#"points="64.00,416.00 576.00,64.00""#),
            "{svg}"
        );
        assert!(svg.contains("a&lt;b"));
    }
}
