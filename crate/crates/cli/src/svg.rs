//! Tiny static SVG line/marker plots: axes with ticks, polylines, markers
//! with optional error bars, reference lines and a legend.

use std::fmt::Write;

const W: f64 = 720.0;
const H: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 30.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

pub struct Line {
    pub name: String,
    pub points: Vec<(f64, f64)>,
    pub color: &'static str,
    pub dashed: bool,
}

pub struct Markers {
    pub name: String,
    /// `(x, y, error bar half-height)`.
    pub points: Vec<(f64, f64, f64)>,
    pub color: &'static str,
}

#[derive(Default)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub lines: Vec<Line>,
    pub markers: Vec<Markers>,
    /// Horizontal reference lines `(y, legend name)`.
    pub hlines: Vec<(f64, String)>,
    /// Labelled vertical guides, replacing numeric x ticks when present.
    pub vlines: Vec<(f64, String)>,
}

/// Roughly `target` round tick positions covering `[lo, hi]`.
pub fn ticks(lo: f64, hi: f64, target: usize) -> Vec<f64> {
    let span = (hi - lo).max(f64::EPSILON * hi.abs().max(1.0));
    let raw = span / target.max(1) as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| span / s <= target as f64)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|i| i as f64 * step).collect()
}

fn tick_label(v: f64) -> String {
    let s = format!("{:.6}", v);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl Plot {
    fn bounds(&self) -> (f64, f64, f64, f64) {
        let mut xs: Vec<f64> = Vec::new();
        let mut ys: Vec<f64> = Vec::new();
        for l in &self.lines {
            xs.extend(l.points.iter().map(|p| p.0));
            ys.extend(l.points.iter().map(|p| p.1));
        }
        for m in &self.markers {
            xs.extend(m.points.iter().map(|p| p.0));
            ys.extend(m.points.iter().flat_map(|p| [p.1 - p.2, p.1 + p.2]));
        }
        ys.extend(self.hlines.iter().map(|h| h.0));
        xs.extend(self.vlines.iter().map(|v| v.0));
        let finite = |v: &Vec<f64>| v.iter().copied().filter(|x| x.is_finite()).collect::<Vec<_>>();
        let (xs, ys) = (finite(&xs), finite(&ys));
        let lo = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = |v: &[f64]| v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let (mut x0, mut x1, mut y0, mut y1) = (lo(&xs), hi(&xs), lo(&ys), hi(&ys));
        if !x0.is_finite() {
            (x0, x1) = (0.0, 1.0);
        }
        if !y0.is_finite() {
            (y0, y1) = (0.0, 1.0);
        }
        if x1 - x0 < 1e-12 {
            (x0, x1) = (x0 - 0.5, x1 + 0.5);
        }
        let pad = ((y1 - y0) * 0.08).max(1e-9 * y1.abs().max(1.0));
        (x0, x1, y0 - pad, y1 + pad)
    }

    pub fn render(&self) -> String {
        let (x0, x1, y0, y1) = self.bounds();
        let pw = W - LEFT - RIGHT;
        let ph = H - TOP - BOTTOM;
        let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
        let sy = |y: f64| TOP + (y1 - y) / (y1 - y0) * ph;

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
            W / 2.0,
            escape(&self.title)
        );

        for t in ticks(y0, y1, 6) {
            let y = sy(t);
            let _ = writeln!(
                s,
                "<line x1=\"{LEFT}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"#e4e4e4\"/>",
                W - RIGHT
            );
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
                LEFT - 6.0,
                y + 4.0,
                tick_label(t)
            );
        }
        if self.vlines.is_empty() {
            for t in ticks(x0, x1, 8) {
                let x = sx(t);
                let _ = writeln!(
                    s,
                    r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
                    H - BOTTOM + 18.0,
                    tick_label(t)
                );
            }
        }
        for (x, label) in &self.vlines {
            let x = sx(*x);
            let _ = writeln!(
                s,
                "<line x1=\"{x:.2}\" y1=\"{TOP}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"#bbbbbb\"/>",
                H - BOTTOM
            );
            let _ = writeln!(
                s,
                r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
                H - BOTTOM + 18.0,
                escape(label)
            );
        }
        let _ = writeln!(
            s,
            r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            LEFT + pw / 2.0,
            H - 18.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">{}</text>"#,
            TOP + ph / 2.0,
            TOP + ph / 2.0,
            escape(&self.y_label)
        );

        // (name, color, dashed, marker)
        let mut legend: Vec<(String, &'static str, bool, bool)> = Vec::new();
        for (y, name) in &self.hlines {
            let y = sy(*y);
            let _ = writeln!(
                s,
                "<line x1=\"{LEFT}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"#555555\" stroke-dasharray=\"6 4\"/>",
                W - RIGHT
            );
            legend.push((name.clone(), "#555555", true, false));
        }
        for l in &self.lines {
            let pts: Vec<String> = l
                .points
                .iter()
                .filter(|p| p.1.is_finite())
                .map(|p| format!("{:.2},{:.2}", sx(p.0), sy(p.1)))
                .collect();
            let dash = if l.dashed { r#" stroke-dasharray="6 4""# } else { "" };
            let _ = writeln!(
                s,
                r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="1.5"{dash}/>"#,
                pts.join(" "),
                l.color
            );
            legend.push((l.name.clone(), l.color, l.dashed, false));
        }
        for m in &self.markers {
            for &(x, y, err) in m.points.iter().filter(|p| p.1.is_finite()) {
                let (cx, cy) = (sx(x), sy(y));
                if err > 0.0 {
                    let (top, bottom) = (sy(y + err), sy(y - err));
                    let _ = writeln!(
                        s,
                        r#"<line x1="{cx:.2}" y1="{top:.2}" x2="{cx:.2}" y2="{bottom:.2}" stroke="{}"/>"#,
                        m.color
                    );
                }
                let _ = writeln!(s, r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="4" fill="{}"/>"#, m.color);
            }
            legend.push((m.name.clone(), m.color, false, true));
        }
        for (i, (name, color, dashed, marker)) in legend.iter().enumerate() {
            let y = TOP + 16.0 + 18.0 * i as f64;
            let x = W - RIGHT - 170.0;
            if *marker {
                let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{y:.2}" r="4" fill="{color}"/>"#, x + 12.0);
            } else {
                let dash = if *dashed { r#" stroke-dasharray="6 4""# } else { "" };
                let _ = writeln!(
                    s,
                    r#"<line x1="{x:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{color}" stroke-width="2"{dash}/>"#,
                    x + 24.0
                );
            }
            let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, x + 30.0, y + 4.0, escape(name));
        }
        s.push_str("</svg>\n");
        s
    }
}
