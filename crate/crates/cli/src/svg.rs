use std::fmt::Write;

use rigidity_core::Framework;

const SIZE: f64 = 480.0;
const MARGIN: f64 = 24.0;

/// Screen-plane coordinates. 1D frameworks sit on the x axis, 3D ones are
/// projected orthographically onto u = (1, −1, 0)/√2 and w = (−1, −1, 2)/√6
/// (viewing along (1, 1, 1)), higher dimensions keep their first two axes.
fn project(f: &Framework) -> Vec<(f64, f64)> {
    f.config()
        .points()
        .iter()
        .map(|p| match p.len() {
            1 => (p[0], 0.0),
            3 => (
                (p[0] - p[1]) / 2f64.sqrt(),
                (-p[0] - p[1] + 2.0 * p[2]) / 6f64.sqrt(),
            ),
            _ => (p[0], p[1]),
        })
        .collect()
}

pub fn render(f: &Framework) -> String {
    let pts = project(f);
    let (mut xmin, mut xmax, mut ymin, mut ymax) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &(x, y) in &pts {
        xmin = xmin.min(x);
        xmax = xmax.max(x);
        ymin = ymin.min(y);
        ymax = ymax.max(y);
    }
    let span = (xmax - xmin).max(ymax - ymin).max(1e-12);
    let scale = (SIZE - 2.0 * MARGIN) / span;
    let cx = (xmin + xmax) / 2.0;
    let cy = (ymin + ymax) / 2.0;
    let screen: Vec<(f64, f64)> = pts
        .iter()
        .map(|&(x, y)| (SIZE / 2.0 + (x - cx) * scale, SIZE / 2.0 - (y - cy) * scale))
        .collect();

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(out, r#"<g stroke="black" stroke-width="1.5">"#);
    for &(i, j) in f.graph().edges() {
        let (a, b) = (screen[i], screen[j]);
        let _ = writeln!(
            out,
            r#"<line x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}"/>"#,
            a.0, a.1, b.0, b.1
        );
    }
    let _ = writeln!(out, "</g>");
    let _ = writeln!(
        out,
        r#"<g fill="steelblue" font-family="sans-serif" font-size="11">"#
    );
    for (i, &(x, y)) in screen.iter().enumerate() {
        let _ = writeln!(out, r#"<circle cx="{x:.3}" cy="{y:.3}" r="4"/>"#);
        let _ = writeln!(
            out,
            r#"<text x="{:.3}" y="{:.3}" fill="black">{i}</text>"#,
            x + 6.0,
            y - 6.0
        );
    }
    let _ = writeln!(out, "</g>");
    out.push_str("</svg>\n");
    out
}
