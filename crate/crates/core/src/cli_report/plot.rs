//! Plot data as CSV, plus a bare-bones SVG line plot for a quick look.

use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Two-column CSV with the given header.
pub fn xy_csv(header: [&str; 2], points: &[(f64, f64)]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Config(format!("csv encoding failed: {e}"));
    w.write_record(header).map_err(io)?;
    for (x, y) in points {
        w.write_record([x.to_string(), y.to_string()]).map_err(io)?;
    }
    w.into_inner()
        .map_err(|e| Error::Config(format!("csv encoding failed: {e}")))
}

/// Step profile `(τ, h)` drawn as a staircase: each jump contributes the
/// value just before and just after it.
pub fn staircase(knots: &[f64], cumulative: &[f64]) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(2 * knots.len());
    let mut prev = 0.0;
    for (&k, &v) in knots.iter().zip(cumulative) {
        out.push((k, prev));
        out.push((k, v));
        prev = v;
    }
    out
}

/// Polyline SVG, optionally with a logarithmic x axis. Points with
/// non-finite coordinates (or `x ≤ 0` on a log axis) are dropped.
pub fn svg_line_plot(points: &[(f64, f64)], title: &str, log_x: bool) -> String {
    const W: f64 = 640.0;
    const H: f64 = 400.0;
    const PAD: f64 = 48.0;
    let tx = |x: f64| if log_x { x.log10() } else { x };
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| x.is_finite() && y.is_finite() && (!log_x || *x > 0.0))
        .map(|&(x, y)| (tx(x), y))
        .collect();
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="24" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#,
        W / 2.0,
        escape(title)
    );
    if pts.is_empty() {
        svg.push_str("</svg>\n");
        return svg;
    }
    let (mut x0, mut x1, mut y0, mut y1) = (
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
    );
    for &(x, y) in &pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if x1 == x0 {
        x1 = x0 + 1.0;
    }
    if y1 == y0 {
        y1 = y0 + 1.0;
    }
    let sx = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let sy = |y: f64| H - PAD - (y - y0) / (y1 - y0) * (H - 2.0 * PAD);
    let _ = writeln!(
        svg,
        r#"<path d="M{PAD} {PAD} V{} H{}" fill="none" stroke="black"/>"#,
        H - PAD,
        W - PAD
    );
    let coords: Vec<String> = pts
        .iter()
        .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
        .collect();
    let _ = writeln!(
        svg,
        r#"<polyline points="{}" fill="none" stroke="steelblue" stroke-width="1.5"/>"#,
        coords.join(" ")
    );
    let label = |v: f64, log: bool| {
        if log {
            format!("1e{v:.1}")
        } else {
            format!("{v:.4}")
        }
    };
    let _ = writeln!(
        svg,
        r#"<text x="{PAD}" y="{}" font-family="sans-serif" font-size="11">{}</text>"#,
        H - PAD + 16.0,
        label(x0, log_x)
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11" text-anchor="end">{}</text>"#,
        W - PAD,
        H - PAD + 16.0,
        label(x1, log_x)
    );
    let _ = writeln!(
        svg,
        r#"<text x="4" y="{}" font-family="sans-serif" font-size="11">{}</text>"#,
        PAD,
        label(y1, false)
    );
    let _ = writeln!(
        svg,
        r#"<text x="4" y="{}" font-family="sans-serif" font-size="11">{}</text>"#,
        H - PAD,
        label(y0, false)
    );
    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let bytes = xy_csv(["t", "ratio"], &[(1.0, 0.5), (2.0, 0.25)]).unwrap();
        assert_eq!(
            String::from_utf8(bytes).unwrap(),
            "t,ratio\n1,0.5\n2,0.25\n"
        );
    }

    #[test]
    fn staircase_shape() {
        assert_eq!(
            staircase(&[1.0, 2.0], &[0.5, 1.5]),
            vec![(1.0, 0.0), (1.0, 0.5), (2.0, 0.5), (2.0, 1.5)]
        );
    }

    #[test]
    fn svg_drops_bad_points() {
        let svg = svg_line_plot(
            &[(0.0, 1.0), (1.0, 1.0), (10.0, f64::NAN), (100.0, 2.0)],
            "a<b",
            true,
        );
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("a&lt;b"));
        assert_eq!(svg.matches("polyline").count(), 1);
        assert!(svg_line_plot(&[], "empty", false).ends_with("</svg>\n"));
    }
}
