//! Minimal static SVG charts. Every point carries its data value in a
//! `<title>` element so the numbers survive without the plotting code.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 480.0;
const MARGIN: f64 = 60.0;
const LEGEND: f64 = 150.0;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

pub(crate) struct Series<'a> {
    pub name: &'a str,
    pub points: Vec<(f64, f64)>,
}

pub(crate) enum Style {
    Lines,
    Scatter,
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn fit(series: &[Series<'_>], hline: Option<f64>) -> Self {
        let mut f = Frame {
            x0: f64::INFINITY,
            x1: f64::NEG_INFINITY,
            y0: f64::INFINITY,
            y1: f64::NEG_INFINITY,
        };
        for (x, y) in series.iter().flat_map(|s| s.points.iter().copied()) {
            f.x0 = f.x0.min(x);
            f.x1 = f.x1.max(x);
            f.y0 = f.y0.min(y);
            f.y1 = f.y1.max(y);
        }
        if let Some(h) = hline {
            f.y0 = f.y0.min(h);
            f.y1 = f.y1.max(h);
        }
        if !f.x0.is_finite() {
            (f.x0, f.x1, f.y0, f.y1) = (0.0, 1.0, 0.0, 1.0);
        }
        let pad = |lo: &mut f64, hi: &mut f64| {
            let span = (*hi - *lo).max(1e-9);
            *lo -= 0.05 * span;
            *hi += 0.05 * span;
        };
        pad(&mut f.x0, &mut f.x1);
        pad(&mut f.y0, &mut f.y1);
        f
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x0) / (self.x1 - self.x0) * (W - LEGEND - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        H - MARGIN - (y - self.y0) / (self.y1 - self.y0) * (H - 2.0 * MARGIN)
    }
}

fn glyph(out: &mut String, shape: usize, x: f64, y: f64, color: &str, tip: &str) {
    let _ = match shape % 3 {
        0 => write!(out, r#"<circle cx="{x:.2}" cy="{y:.2}" r="4" fill="{color}">"#),
        1 => write!(out, r#"<rect x="{:.2}" y="{:.2}" width="7" height="7" fill="{color}">"#, x - 3.5, y - 3.5),
        _ => write!(
            out,
            r#"<polygon points="{:.2},{:.2} {:.2},{:.2} {:.2},{:.2}" fill="{color}">"#,
            x,
            y - 4.5,
            x - 4.0,
            y + 3.5,
            x + 4.0,
            y + 3.5
        ),
    };
    let _ = write!(out, "<title>{tip}</title>");
    out.push_str(match shape % 3 {
        0 => "</circle>\n",
        1 => "</rect>\n",
        _ => "</polygon>\n",
    });
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Renders a chart. `hline` draws a dashed reference line (e.g. a baseline).
pub(crate) fn chart(title: &str, x_label: &str, y_label: &str, series: &[Series<'_>], style: Style, hline: Option<(&str, f64)>) -> String {
    let f = Frame::fit(series, hline.map(|h| h.1));
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#, (W - LEGEND) / 2.0, escape(title));
    let (left, right, top, bottom) = (MARGIN, W - LEGEND - MARGIN, MARGIN, H - MARGIN);
    let _ = writeln!(
        s,
        r#"<rect x="{left}" y="{top}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        right - left,
        bottom - top
    );
    for t in 0..=4 {
        let fx = f.x0 + (f.x1 - f.x0) * t as f64 / 4.0;
        let fy = f.y0 + (f.y1 - f.y0) * t as f64 / 4.0;
        let _ = writeln!(s, r#"<text x="{:.2}" y="{}" text-anchor="middle">{fx:.3}</text>"#, f.px(fx), bottom + 16.0);
        let _ = writeln!(s, r#"<text x="{}" y="{:.2}" text-anchor="end">{fy:.3}</text>"#, left - 4.0, f.py(fy) + 4.0);
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, (left + right) / 2.0, H - 16.0, escape(x_label));
    let _ = writeln!(
        s,
        r#"<text x="16" y="{0}" text-anchor="middle" transform="rotate(-90 16 {0})">{1}</text>"#,
        (top + bottom) / 2.0,
        escape(y_label)
    );
    if let Some((name, y)) = hline {
        let _ = writeln!(
            s,
            r##"<line x1="{left}" y1="{0:.2}" x2="{right}" y2="{0:.2}" stroke="#444" stroke-dasharray="6 4"><title>{1} {y:.6}</title></line>"##,
            f.py(y),
            escape(name)
        );
    }
    for (i, ser) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let name = escape(ser.name);
        if matches!(style, Style::Lines) && ser.points.len() > 1 {
            let pts: Vec<String> = ser.points.iter().map(|&(x, y)| format!("{:.2},{:.2}", f.px(x), f.py(y))).collect();
            let _ = writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, pts.join(" "));
        }
        for &(x, y) in &ser.points {
            let tip = format!("{name} ({x:.6}, {y:.6})");
            if matches!(style, Style::Lines) {
                let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="2" fill="{color}"><title>{tip}</title></circle>"#, f.px(x), f.py(y));
            } else {
                glyph(&mut s, i, f.px(x), f.py(y), color, &tip);
            }
        }
        let ly = top + 18.0 * i as f64;
        glyph(&mut s, if matches!(style, Style::Scatter) { i } else { 0 }, right + 20.0, ly, color, &name);
        let _ = writeln!(s, r#"<text x="{}" y="{:.2}">{name}</text>"#, right + 30.0, ly + 4.0);
    }
    s.push_str("</svg>\n");
    s
}
