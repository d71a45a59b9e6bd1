//! Minimal grayscale SVG renderings of sweep output.

use std::fmt::Write;

use crate::format::num;

const W: f64 = 640.0;
const H: f64 = 440.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 30.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 60.0;

pub struct Heatmap {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// `z[i][j]` belongs to `x[i]`, `y[j]`.
    pub z: Vec<Vec<f64>>,
    /// Polyline in (x value, fractional y index) coordinates.
    pub overlay: Vec<(f64, f64)>,
}

pub struct LinePlot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<(String, Vec<(f64, f64)>)>,
}

fn open(title: &str) -> String {
    let mut s = String::new();
    writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#).unwrap();
    writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#).unwrap();
    writeln!(s, r#"<text x="{}" y="18" text-anchor="middle">{}</text>"#, W / 2.0, escape(title)).unwrap();
    s
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn frame(s: &mut String, x_label: &str, y_label: &str, x_range: (f64, f64), y_range: (f64, f64)) {
    let (pw, ph) = (W - LEFT - RIGHT, H - TOP - BOTTOM);
    writeln!(s, r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#).unwrap();
    let bottom = TOP + ph;
    writeln!(s, r#"<text x="{LEFT}" y="{}" text-anchor="start">{}</text>"#, bottom + 16.0, num(x_range.0)).unwrap();
    writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, LEFT + pw, bottom + 16.0, num(x_range.1)).unwrap();
    writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, LEFT - 4.0, bottom, num(y_range.0)).unwrap();
    writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, LEFT - 4.0, TOP + 10.0, num(y_range.1)).unwrap();
    writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, LEFT + pw / 2.0, H - 16.0, escape(x_label)).unwrap();
    writeln!(
        s,
        r#"<text x="20" y="{0}" text-anchor="middle" transform="rotate(-90 20 {0})">{1}</text>"#,
        TOP + ph / 2.0,
        escape(y_label)
    )
    .unwrap();
}

fn finite_range(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    values.filter(|v| v.is_finite()).fold(None, |acc, v| match acc {
        None => Some((v, v)),
        Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
    })
}

fn widen((lo, hi): (f64, f64)) -> (f64, f64) {
    if hi > lo {
        (lo, hi)
    } else {
        let pad = if lo == 0.0 { 1.0 } else { 0.05 * lo.abs() };
        (lo - pad, hi + pad)
    }
}

impl Heatmap {
    /// Cells are drawn on an index grid, so log-spaced axes appear uniform.
    /// Darker means larger; non-finite cells stay white.
    pub fn render(&self) -> String {
        let mut s = open(&self.title);
        let (nx, ny) = (self.x.len().max(1), self.y.len().max(1));
        let (pw, ph) = (W - LEFT - RIGHT, H - TOP - BOTTOM);
        let (cw, ch) = (pw / nx as f64, ph / ny as f64);
        let (lo, hi) = widen(finite_range(self.z.iter().flatten().copied()).unwrap_or((0.0, 1.0)));
        for (i, col) in self.z.iter().enumerate() {
            for (j, &v) in col.iter().enumerate() {
                if !v.is_finite() {
                    continue;
                }
                let level = (255.0 * (1.0 - (v - lo) / (hi - lo))).round() as u8;
                writeln!(
                    s,
                    r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="rgb({level},{level},{level})"/>"#,
                    LEFT + i as f64 * cw,
                    TOP + ph - (j + 1) as f64 * ch,
                    cw + 0.05,
                    ch + 0.05
                )
                .unwrap();
            }
        }
        if self.overlay.len() > 1 && nx > 1 {
            let (x0, x1) = (self.x[0], self.x[nx - 1]);
            let pts: Vec<String> = self
                .overlay
                .iter()
                .filter(|(x, _)| x.is_finite() && *x >= x0 && *x <= x1)
                .map(|(x, fj)| {
                    let px = LEFT + cw * (0.5 + (nx - 1) as f64 * (x - x0) / (x1 - x0));
                    let py = TOP + ph - ch * (0.5 + fj);
                    format!("{px:.2},{py:.2}")
                })
                .collect();
            writeln!(s, r#"<polyline points="{}" fill="none" stroke="black" stroke-width="2" stroke-dasharray="6 3"/>"#, pts.join(" ")).unwrap();
        }
        let xr = (self.x.first().copied().unwrap_or(0.0), self.x.last().copied().unwrap_or(1.0));
        let yr = (self.y.first().copied().unwrap_or(0.0), self.y.last().copied().unwrap_or(1.0));
        frame(&mut s, &self.x_label, &self.y_label, xr, yr);
        writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">scale {} to {}</text>"#, W - RIGHT, H - 4.0, num(lo), num(hi)).unwrap();
        s.push_str("</svg>\n");
        s
    }
}

const DASHES: [&str; 4] = ["", "6 3", "2 2", "8 3 2 3"];
const GRAYS: [&str; 3] = ["#000", "#555", "#999"];

impl LinePlot {
    pub fn render(&self) -> String {
        let mut s = open(&self.title);
        let xr = widen(finite_range(self.series.iter().flat_map(|(_, p)| p.iter().map(|q| q.0))).unwrap_or((0.0, 1.0)));
        let yr = widen(finite_range(self.series.iter().flat_map(|(_, p)| p.iter().map(|q| q.1))).unwrap_or((0.0, 1.0)));
        let (pw, ph) = (W - LEFT - RIGHT, H - TOP - BOTTOM);
        let map = |(x, y): (f64, f64)| (LEFT + pw * (x - xr.0) / (xr.1 - xr.0), TOP + ph * (1.0 - (y - yr.0) / (yr.1 - yr.0)));
        for (k, (name, points)) in self.series.iter().enumerate() {
            let pts: Vec<String> = points
                .iter()
                .filter(|(x, y)| x.is_finite() && y.is_finite())
                .map(|&q| {
                    let (px, py) = map(q);
                    format!("{px:.2},{py:.2}")
                })
                .collect();
            let dash = DASHES[k % DASHES.len()];
            let gray = GRAYS[(k / DASHES.len()) % GRAYS.len()];
            writeln!(s, r#"<polyline points="{}" fill="none" stroke="{gray}" stroke-width="1.2" stroke-dasharray="{dash}"/>"#, pts.join(" ")).unwrap();
            let ly = TOP + 14.0 + 14.0 * k as f64;
            writeln!(s, r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{gray}" stroke-dasharray="{dash}"/>"#, W - RIGHT - 140.0, W - RIGHT - 110.0).unwrap();
            writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, W - RIGHT - 104.0, ly + 4.0, escape(name)).unwrap();
        }
        frame(&mut s, &self.x_label, &self.y_label, xr, yr);
        s.push_str("</svg>\n");
        s
    }
}
