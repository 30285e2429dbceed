use std::fmt::Write as _;

use crate::manifold::Point;

const SIZE: f64 = 480.0;
const RADIUS: f64 = 200.0;

/// Orthographic view of curves on the unit sphere, seen from the +y axis with
/// +z up. Each curve is `(label, points, stroke colour)`.
pub fn orthographic_svg(title: &str, curves: &[(&str, &[Point], &str)]) -> String {
    let c = SIZE / 2.0;
    let project = |p: &Point| {
        let x = p.coords();
        (c - RADIUS * x[0], c - RADIUS * x[2])
    };
    let mut s = String::new();
    writeln!(
        s,
        r##"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{SIZE}" height="{h}" viewBox="0 0 {SIZE} {h}">
<title>{title}</title>
<rect width="100%" height="100%" fill="white"/>
<circle cx="{c}" cy="{c}" r="{RADIUS}" fill="none" stroke="#999" stroke-width="1"/>
<line x1="{l}" y1="{c}" x2="{r}" y2="{c}" stroke="#ccc" stroke-dasharray="4 3"/>"##,
        h = SIZE + 20.0 * curves.len() as f64,
        title = escape(title),
        l = c - RADIUS,
        r = c + RADIUS,
    )
    .unwrap();
    for (label, pts, colour) in curves {
        let path: Vec<String> = pts
            .iter()
            .map(|p| {
                let (x, y) = project(p);
                format!("{x:.2},{y:.2}")
            })
            .collect();
        writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{colour}" stroke-width="2"><title>{}</title></polyline>"#,
            path.join(" "),
            escape(label)
        )
        .unwrap();
    }
    for (i, (label, _, colour)) in curves.iter().enumerate() {
        let y = SIZE + 20.0 * i as f64 - 4.0;
        writeln!(
            s,
            r#"<line x1="16" y1="{y}" x2="40" y2="{y}" stroke="{colour}" stroke-width="2"/><text x="48" y="{ty}" font-family="sans-serif" font-size="13">{}</text>"#,
            escape(label),
            ty = y + 4.0
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    s
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
    fn projects_from_plus_y() {
        let pts: Vec<Point> = vec![[1.0, 0.0, 0.0].into(), [0.0, 0.0, 1.0].into()];
        let svg = orthographic_svg("t", &[("a<b", &pts, "red")]);
        assert!(svg.contains("points=\"40.00,240.00 240.00,40.00\""));
        assert!(svg.contains("a&lt;b"));
        assert!(svg.ends_with("</svg>\n"));
    }
}
