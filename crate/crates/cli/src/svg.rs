//! Scatter plots written as plain SVG markup.
//!
//! Coordinates are printed with a fixed number of decimals, so equal inputs
//! give byte-identical files.

use std::fmt::Write;

pub struct Layer<'a> {
    pub label: &'a str,
    pub color: &'a str,
    pub radius: f64,
    pub points: &'a [[f64; 2]],
}

pub struct Scatter<'a> {
    pub title: &'a str,
    /// Data-space bounds `(min, max)`, shared by both axes.
    pub range: (f64, f64),
    pub layers: Vec<Layer<'a>>,
    /// Drawn as crosses on top of the layers.
    pub markers: &'a [[f64; 2]],
}

const SIZE: f64 = 560.0;
const MARGIN: f64 = 40.0;

impl Scatter<'_> {
    fn to_px(&self, p: [f64; 2]) -> (f64, f64) {
        let (lo, hi) = self.range;
        let span = SIZE - 2.0 * MARGIN;
        let x = MARGIN + (p[0] - lo) / (hi - lo) * span;
        let y = SIZE - MARGIN - (p[1] - lo) / (hi - lo) * span;
        (x, y)
    }

    fn inside(&self, p: [f64; 2]) -> bool {
        let (lo, hi) = self.range;
        p.iter().all(|v| v.is_finite() && *v >= lo && *v <= hi)
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let (lo, hi) = self.range;
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
        );
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="24" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#,
            SIZE / 2.0,
            escape(self.title)
        );
        let inner = SIZE - 2.0 * MARGIN;
        let _ = writeln!(
            s,
            r#"<rect x="{MARGIN}" y="{MARGIN}" width="{inner}" height="{inner}" fill="none" stroke="black" stroke-width="1"/>"#
        );

        // Integer ticks on both axes.
        let mut t = lo.ceil();
        while t <= hi {
            let (x, _) = self.to_px([t, lo]);
            let (_, y) = self.to_px([lo, t]);
            let bottom = SIZE - MARGIN;
            let _ = writeln!(
                s,
                r#"<line x1="{x:.2}" y1="{bottom:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" font-family="sans-serif" font-size="10" text-anchor="middle">{t}</text>"#,
                bottom + 4.0,
                bottom + 16.0
            );
            let _ = writeln!(
                s,
                r#"<line x1="{:.2}" y1="{y:.2}" x2="{MARGIN:.2}" y2="{y:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="10" text-anchor="end">{t}</text>"#,
                MARGIN - 4.0,
                MARGIN - 6.0,
                y + 3.0
            );
            t += 1.0;
        }

        for layer in &self.layers {
            let _ = writeln!(s, r#"<g fill="{}" fill-opacity="0.6">"#, layer.color);
            for &p in layer.points.iter().filter(|p| self.inside(**p)) {
                let (x, y) = self.to_px(p);
                let _ = writeln!(s, r#"<circle cx="{x:.2}" cy="{y:.2}" r="{:.1}"/>"#, layer.radius);
            }
            let _ = writeln!(s, "</g>");
        }

        let _ = writeln!(s, r#"<g stroke="crimson" stroke-width="1.5">"#);
        for &p in self.markers.iter().filter(|p| self.inside(**p)) {
            let (x, y) = self.to_px(p);
            let _ = writeln!(
                s,
                r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}"/><line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}"/>"#,
                x - 4.0,
                y - 4.0,
                x + 4.0,
                y + 4.0,
                x - 4.0,
                y + 4.0,
                x + 4.0,
                y - 4.0
            );
        }
        let _ = writeln!(s, "</g>");

        // Legend.
        for (i, layer) in self.layers.iter().enumerate() {
            let y = MARGIN + 14.0 + 16.0 * i as f64;
            let _ = writeln!(
                s,
                r#"<circle cx="{:.1}" cy="{y:.1}" r="4" fill="{}"/><text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="11">{}</text>"#,
                MARGIN + 12.0,
                layer.color,
                MARGIN + 20.0,
                y + 4.0,
                escape(layer.label)
            );
        }
        s.push_str("</svg>\n");
        s
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
