//! Self-contained SVG charts.

use std::fmt::Write;

const WIDTH: f64 = 760.0;
const HEIGHT: f64 = 460.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 160.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 55.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

/// Heatmap floor in dB below the per-step peak.
const CBF_FLOOR_DB: f64 = -30.0;

#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

impl Series {
    pub fn new(name: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Self { name: name.into(), points }
    }
}

/// Linear map from a data range onto a pixel range.
#[derive(Clone, Copy)]
struct Axis {
    lo: f64,
    hi: f64,
    px_lo: f64,
    px_hi: f64,
}

impl Axis {
    fn map(&self, v: f64) -> f64 {
        self.px_lo + (v - self.lo) / (self.hi - self.lo) * (self.px_hi - self.px_lo)
    }
}

/// Step from {1, 2, 5} x 10^k closest (in log scale) to `span / target`.
fn nice_step(span: f64, target: usize) -> f64 {
    let raw = span / target as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let step = [1.0, 2.0, 5.0, 10.0]
        .into_iter()
        .min_by(|a: &f64, b: &f64| (a / norm).ln().abs().total_cmp(&(b / norm).ln().abs()))
        .unwrap_or(1.0);
    step * mag
}

fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let step = nice_step(hi - lo, 6);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn label(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Padded data range; a degenerate range is widened to one unit.
fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        return (lo - 0.5, hi + 0.5);
    }
    (lo, hi)
}

struct Frame {
    svg: String,
    x: Axis,
    y: Axis,
}

fn frame(title: &str, x: (f64, f64), y: (f64, f64)) -> Frame {
    let xa = Axis { lo: x.0, hi: x.1, px_lo: LEFT, px_hi: WIDTH - RIGHT };
    let ya = Axis { lo: y.0, hi: y.1, px_lo: HEIGHT - BOTTOM, px_hi: TOP };
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{:.1}" y="22" text-anchor="middle" font-size="15">{}</text>"#, (LEFT + WIDTH - RIGHT) / 2.0, escape(title));
    Frame { svg: s, x: xa, y: ya }
}

fn axes(f: &mut Frame, x_label: &str, y_label: &str) {
    let (x, y) = (f.x, f.y);
    let s = &mut f.svg;
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{:.1}" height="{:.1}" fill="none" stroke="black"/>"#,
        WIDTH - RIGHT - LEFT,
        HEIGHT - BOTTOM - TOP
    );
    for v in ticks(x.lo, x.hi) {
        let px = x.map(v);
        let _ = writeln!(s, r#"<line x1="{px:.2}" y1="{:.1}" x2="{px:.2}" y2="{:.1}" stroke="black"/>"#, y.px_lo, y.px_lo + 5.0);
        let _ = writeln!(s, r#"<text x="{px:.2}" y="{:.1}" text-anchor="middle">{}</text>"#, y.px_lo + 18.0, label(v));
    }
    for v in ticks(y.lo, y.hi) {
        let py = y.map(v);
        let _ = writeln!(s, r#"<line x1="{:.1}" y1="{py:.2}" x2="{LEFT}" y2="{py:.2}" stroke="black"/>"#, LEFT - 5.0);
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.2}" text-anchor="end">{}</text>"#, LEFT - 8.0, py + 4.0, label(v));
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        (x.px_lo + x.px_hi) / 2.0,
        HEIGHT - 15.0,
        escape(x_label)
    );
    let cy = (y.px_lo + y.px_hi) / 2.0;
    let _ = writeln!(s, r#"<text x="18" y="{cy:.1}" text-anchor="middle" transform="rotate(-90 18 {cy:.1})">{}</text>"#, escape(y_label));
}

fn legend(s: &mut String, entries: &[(String, &str, bool)]) {
    for (i, (name, color, dot)) in entries.iter().enumerate() {
        let y = TOP + 12.0 + 20.0 * i as f64;
        let x = WIDTH - RIGHT + 15.0;
        if *dot {
            let _ = writeln!(s, r#"<circle cx="{:.1}" cy="{y:.1}" r="3.5" fill="{color}"/>"#, x + 10.0);
        } else {
            let _ = writeln!(s, r#"<line x1="{x:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="{color}" stroke-width="2"/>"#, x + 20.0);
        }
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}">{}</text>"#, x + 26.0, y + 4.0, escape(name));
    }
}

/// Line chart with markers, one polyline per series.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let xr = range(series.iter().flat_map(|s| s.points.iter().map(|p| p.0)));
    let (ylo, yhi) = range(series.iter().flat_map(|s| s.points.iter().map(|p| p.1)));
    let yr = (ylo.min(0.0), yhi + 0.05 * (yhi - ylo.min(0.0)));
    let mut f = frame(title, xr, yr);
    axes(&mut f, x_label, y_label);
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<String> = s
            .points
            .iter()
            .filter(|p| p.0.is_finite() && p.1.is_finite())
            .map(|&(x, y)| format!("{:.2},{:.2}", f.x.map(x), f.y.map(y)))
            .collect();
        let _ = writeln!(f.svg, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#, pts.join(" "));
        for p in &pts {
            let (cx, cy) = p.split_once(',').unwrap_or(("0", "0"));
            let _ = writeln!(f.svg, r#"<circle cx="{cx}" cy="{cy}" r="3" fill="{color}"/>"#);
        }
    }
    let entries: Vec<(String, &str, bool)> =
        series.iter().enumerate().map(|(i, s)| (s.name.clone(), PALETTE[i % PALETTE.len()], false)).collect();
    legend(&mut f.svg, &entries);
    f.svg.push_str("</svg>\n");
    f.svg
}

/// DOA-vs-time scatter over a beamforming heatmap.
///
/// `cbf[k][g]` is the spectrum of step `steps[k]` at `grid_deg[g]`; each
/// step is normalized to its own peak and shown in dB down to -30.
pub fn doa_time_chart(
    title: &str,
    steps: &[usize],
    grid_deg: &[f64],
    cbf: &[Vec<f64>],
    estimates: &[(usize, f64)],
    truth: &[(usize, f64)],
) -> String {
    let t_lo = steps.first().copied().unwrap_or(1) as f64 - 0.5;
    let t_hi = steps.last().copied().unwrap_or(1) as f64 + 0.5;
    let mut f = frame(title, (t_lo, t_hi), (-90.0, 90.0));
    let half = if grid_deg.len() > 1 { (grid_deg[1] - grid_deg[0]).abs() / 2.0 } else { 0.5 };
    for (k, &t) in steps.iter().enumerate() {
        let Some(spec) = cbf.get(k) else { continue };
        let peak = spec.iter().copied().fold(0.0, f64::max);
        if peak <= 0.0 {
            continue;
        }
        let x0 = f.x.map(t as f64 - 0.5);
        let w = f.x.map(t as f64 + 0.5) - x0;
        for (&b, &p) in grid_deg.iter().zip(spec) {
            let db = (10.0 * (p / peak).log10()).max(CBF_FLOOR_DB);
            let level = (255.0 * (1.0 - db / CBF_FLOOR_DB)).round() as u8;
            let shade = 255 - level / 2;
            let y0 = f.y.map(b + half);
            let h = f.y.map(b - half) - y0;
            let _ = writeln!(
                f.svg,
                r#"<rect x="{x0:.2}" y="{y0:.2}" width="{w:.2}" height="{h:.2}" fill="rgb({shade},{shade},255)"/>"#
            );
        }
    }
    axes(&mut f, "time step", "DOA (deg)");
    for &(t, b) in truth {
        let (x, y) = (f.x.map(t as f64), f.y.map(b));
        let _ = writeln!(f.svg, r#"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="black" stroke-width="2"/>"#, x - 4.0, x + 4.0);
    }
    for &(t, b) in estimates {
        let _ = writeln!(f.svg, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{}"/>"#, f.x.map(t as f64), f.y.map(b), PALETTE[1]);
    }
    let mut entries = vec![("estimate".to_string(), PALETTE[1], true)];
    if !truth.is_empty() {
        entries.push(("truth".to_string(), "black", false));
    }
    entries.push(("CBF (0 to -30 dB)".to_string(), "rgb(128,128,255)", false));
    legend(&mut f.svg, &entries);
    f.svg.push_str("</svg>\n");
    f.svg
}
