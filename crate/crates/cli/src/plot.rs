//! A small SVG chart: one panel per parameter, median absolute error against
//! the window half-width with interquartile bars.

use std::fmt::Write as _;

use crate::experiment::ConsistencyReport;

const PANEL_W: f64 = 220.0;
const PANEL_H: f64 = 180.0;
const MARGIN: f64 = 40.0;

pub fn error_plot_svg(report: &ConsistencyReport) -> String {
    let k = report.names.len().max(1);
    let width = k as f64 * (PANEL_W + MARGIN) + MARGIN;
    let height = PANEL_H + 2.0 * MARGIN;
    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="11">"#
    )
    .unwrap();
    writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    let m = report.rungs.len();
    for (p, name) in report.names.iter().enumerate() {
        let x0 = MARGIN + p as f64 * (PANEL_W + MARGIN);
        let y0 = MARGIN;
        // upper end of the bars: median + IQR/2
        let top = report
            .rungs
            .iter()
            .map(|r| r.median[p] + 0.5 * r.iqr[p])
            .filter(|v| v.is_finite())
            .fold(0.0, f64::max);
        let top = if top > 0.0 { top * 1.1 } else { 1.0 };
        let px = |i: usize| x0 + PANEL_W * (i as f64 + 0.5) / m.max(1) as f64;
        let py = |v: f64| y0 + PANEL_H * (1.0 - (v / top).clamp(0.0, 1.0));
        writeln!(
            s,
            r#"<rect x="{x0}" y="{y0}" width="{PANEL_W}" height="{PANEL_H}" fill="none" stroke="black"/>"#
        )
        .unwrap();
        writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">|{name} error|</text>"#,
            x0 + PANEL_W / 2.0,
            y0 - 8.0
        )
        .unwrap();
        writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{:.3}</text>"#, x0 - 3.0, y0 + 4.0, top).unwrap();
        writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">0</text>"#, x0 - 3.0, y0 + PANEL_H).unwrap();
        let mut path = String::new();
        for (i, r) in report.rungs.iter().enumerate() {
            let (med, q) = (r.median[p], r.iqr[p]);
            writeln!(
                s,
                r#"<text x="{}" y="{}" text-anchor="middle">n={}</text>"#,
                px(i),
                y0 + PANEL_H + 14.0,
                r.n
            )
            .unwrap();
            if !med.is_finite() {
                continue;
            }
            writeln!(
                s,
                r##"<line x1="{0}" x2="{0}" y1="{1}" y2="{2}" stroke="#888"/>"##,
                px(i),
                py((med - 0.5 * q).max(0.0)),
                py(med + 0.5 * q)
            )
            .unwrap();
            writeln!(s, r##"<circle cx="{}" cy="{}" r="3" fill="#1f5fa8"/>"##, px(i), py(med)).unwrap();
            write!(path, "{}{:.2},{:.2} ", if path.is_empty() { "M" } else { "L" }, px(i), py(med)).unwrap();
        }
        if !path.is_empty() {
            writeln!(s, r##"<path d="{}" fill="none" stroke="#1f5fa8"/>"##, path.trim_end()).unwrap();
        }
    }
    s.push_str("</svg>\n");
    s
}
