//! Standalone SVG line and box charts.

use std::fmt::Write as _;

use crate::stats::BoxStats;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Maps data values onto a pixel interval, optionally on a log scale.
#[derive(Debug, Clone, Copy)]
struct Scale {
    lo: f64,
    hi: f64,
    log: bool,
    from: f64,
    to: f64,
}

impl Scale {
    fn new(values: impl Iterator<Item = f64>, log: bool, from: f64, to: f64) -> Self {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values.filter(|v| v.is_finite() && (!log || *v > 0.0)) {
            let v = if log { v.log10() } else { v };
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() {
            (lo, hi) = (0.0, 1.0);
        }
        if hi - lo < 1e-12 {
            lo -= 0.5;
            hi += 0.5;
        }
        let pad = 0.05 * (hi - lo);
        Scale { lo: lo - pad, hi: hi + pad, log, from, to }
    }

    fn map(&self, v: f64) -> f64 {
        let v = if self.log { v.max(1e-300).log10() } else { v };
        self.from + (v - self.lo) / (self.hi - self.lo) * (self.to - self.from)
    }

    fn ticks(&self) -> Vec<f64> {
        (0..=4)
            .map(|i| {
                let t = self.lo + (self.hi - self.lo) * i as f64 / 4.0;
                if self.log { 10f64.powf(t) } else { t }
            })
            .collect()
    }
}

fn label(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-2 || v.abs() >= 1e4) {
        format!("{v:.1e}")
    } else {
        format!("{v:.3}")
    }
}

fn frame(out: &mut String, title: &str, x_label: &str, y_label: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#, (LEFT + WIDTH - RIGHT) / 2.0, escape(title));
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, (LEFT + WIDTH - RIGHT) / 2.0, HEIGHT - 15.0, escape(x_label));
    let _ = writeln!(
        out,
        r#"<text x="18" y="{0}" text-anchor="middle" transform="rotate(-90 18 {0})">{1}</text>"#,
        (TOP + HEIGHT - BOTTOM) / 2.0,
        escape(y_label)
    );
    let _ = writeln!(
        out,
        r#"<rect x="{LEFT}" y="{TOP}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        WIDTH - LEFT - RIGHT,
        HEIGHT - TOP - BOTTOM
    );
}

fn y_axis(out: &mut String, y: &Scale) {
    for t in y.ticks() {
        let py = y.map(t);
        let _ = writeln!(out, r##"<line x1="{LEFT}" y1="{py:.2}" x2="{:.2}" y2="{py:.2}" stroke="#ddd"/>"##, WIDTH - RIGHT);
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, LEFT - 6.0, py + 4.0, label(t));
    }
}

fn legend(out: &mut String, names: &[&str]) {
    for (i, name) in names.iter().enumerate() {
        let y = TOP + 10.0 + 18.0 * i as f64;
        let x = WIDTH - RIGHT + 12.0;
        let _ = writeln!(
            out,
            r#"<rect x="{x}" y="{}" width="12" height="12" fill="{}"/><text x="{}" y="{}">{}</text>"#,
            y - 10.0,
            PALETTE[i % PALETTE.len()],
            x + 18.0,
            y,
            escape(name)
        );
    }
}

/// One polyline with markers per series.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[(String, Vec<(f64, f64)>)], log_x: bool, log_y: bool) -> String {
    let mut out = String::new();
    frame(&mut out, title, x_label, y_label);
    let all = || series.iter().flat_map(|(_, pts)| pts.iter());
    let x = Scale::new(all().map(|p| p.0), log_x, LEFT, WIDTH - RIGHT);
    let y = Scale::new(all().map(|p| p.1), log_y, HEIGHT - BOTTOM, TOP);
    y_axis(&mut out, &y);
    for t in x.ticks() {
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, x.map(t), HEIGHT - BOTTOM + 18.0, label(t));
    }
    for (i, (_, pts)) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let visible: Vec<(f64, f64)> = pts
            .iter()
            .filter(|(a, b)| a.is_finite() && b.is_finite() && (!log_x || *a > 0.0) && (!log_y || *b > 0.0))
            .map(|&(a, b)| (x.map(a), y.map(b)))
            .collect();
        let path: Vec<String> = visible.iter().map(|(a, b)| format!("{a:.2},{b:.2}")).collect();
        let _ = writeln!(out, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, path.join(" "));
        for (a, b) in visible {
            let _ = writeln!(out, r#"<circle cx="{a:.2}" cy="{b:.2}" r="3" fill="{color}"/>"#);
        }
    }
    let names: Vec<&str> = series.iter().map(|(n, _)| n.as_str()).collect();
    legend(&mut out, &names);
    out.push_str("</svg>\n");
    out
}

/// Box per category: quartile box, median line, Tukey whiskers, outlier dots.
pub fn box_chart(title: &str, y_label: &str, boxes: &[(String, BoxStats)], log_y: bool) -> String {
    let mut out = String::new();
    frame(&mut out, title, "", y_label);
    let values = boxes
        .iter()
        .flat_map(|(_, b)| [b.whisker_low, b.whisker_high].into_iter().chain(b.outliers.iter().copied()));
    let y = Scale::new(values, log_y, HEIGHT - BOTTOM, TOP);
    y_axis(&mut out, &y);
    let slot = (WIDTH - LEFT - RIGHT) / boxes.len().max(1) as f64;
    for (i, (name, b)) in boxes.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let cx = LEFT + slot * (i as f64 + 0.5);
        let half = (slot * 0.3).min(30.0);
        let (q1, q3, med) = (y.map(b.q1), y.map(b.q3), y.map(b.median));
        let (lo, hi) = (y.map(b.whisker_low), y.map(b.whisker_high));
        let _ = writeln!(out, r#"<line x1="{cx:.2}" y1="{lo:.2}" x2="{cx:.2}" y2="{q1:.2}" stroke="black"/>"#);
        let _ = writeln!(out, r#"<line x1="{cx:.2}" y1="{q3:.2}" x2="{cx:.2}" y2="{hi:.2}" stroke="black"/>"#);
        for w in [lo, hi] {
            let _ = writeln!(out, r#"<line x1="{:.2}" y1="{w:.2}" x2="{:.2}" y2="{w:.2}" stroke="black"/>"#, cx - half / 2.0, cx + half / 2.0);
        }
        let _ = writeln!(
            out,
            r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{color}" fill-opacity="0.35" stroke="{color}"/>"#,
            cx - half,
            q3.min(q1),
            2.0 * half,
            (q1 - q3).abs()
        );
        let _ = writeln!(out, r#"<line x1="{:.2}" y1="{med:.2}" x2="{:.2}" y2="{med:.2}" stroke="black" stroke-width="2"/>"#, cx - half, cx + half);
        for o in &b.outliers {
            let _ = writeln!(out, r#"<circle cx="{cx:.2}" cy="{:.2}" r="2.5" fill="none" stroke="{color}"/>"#, y.map(*o));
        }
        let _ = writeln!(out, r#"<text x="{cx:.2}" y="{:.2}" text-anchor="middle" font-size="10">{}</text>"#, HEIGHT - BOTTOM + 16.0, escape(name));
    }
    out.push_str("</svg>\n");
    out
}
