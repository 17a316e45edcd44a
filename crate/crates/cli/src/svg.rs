//! Minimal SVG plots of lower-convex polygons.

use std::fmt::Write as _;

use kvariant_core::{Rational, RationalPolygon};

const WIDTH: f64 = 480.0;
const HEIGHT: f64 = 360.0;
const MARGIN: f64 = 40.0;
const COLORS: [&str; 3] = ["#1f77b4", "#d62728", "#2ca02c"];

fn to_f64(r: &Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Plots each labelled polygon on shared axes.
pub fn render(title: &str, polygons: &[(&str, &RationalPolygon)]) -> String {
    let max_x = polygons
        .iter()
        .map(|(_, p)| to_f64(&p.endpoint().0))
        .fold(1.0, f64::max);
    let max_y = polygons
        .iter()
        .flat_map(|(_, p)| p.vertices().iter().map(|v| to_f64(&v.1)))
        .fold(1.0, f64::max);
    let sx = (WIDTH - 2.0 * MARGIN) / max_x;
    let sy = (HEIGHT - 2.0 * MARGIN) / max_y;
    let point = |x: f64, y: f64| (MARGIN + x * sx, HEIGHT - MARGIN - y * sy);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{MARGIN}" y="20" font-family="sans-serif" font-size="14">{}</text>"#,
        escape(title)
    );
    let (ox, oy) = point(0.0, 0.0);
    let (ex, _) = point(max_x, 0.0);
    let (_, ey) = point(0.0, max_y);
    let _ = writeln!(s, r#"<line x1="{ox}" y1="{oy}" x2="{ex}" y2="{oy}" stroke="black"/>"#);
    let _ = writeln!(s, r#"<line x1="{ox}" y1="{oy}" x2="{ox}" y2="{ey}" stroke="black"/>"#);
    for (i, (label, poly)) in polygons.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let pts: Vec<String> = poly
            .vertices()
            .iter()
            .map(|(x, y)| {
                let (px, py) = point(to_f64(x), to_f64(y));
                format!("{px:.2},{py:.2}")
            })
            .collect();
        let dash = if i == 0 { "" } else { r#" stroke-dasharray="6,3""# };
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"{dash}/>"#,
            pts.join(" ")
        );
        for (x, y) in poly.vertices() {
            let (px, py) = point(to_f64(x), to_f64(y));
            let _ = writeln!(s, r#"<circle cx="{px:.2}" cy="{py:.2}" r="3" fill="{color}"/>"#);
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" fill="{color}">{}</text>"#,
            WIDTH - MARGIN - 120.0,
            MARGIN + 16.0 * i as f64,
            escape(label)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
