use std::fmt::Write as _;

use crate::plant::GainSign;
use crate::tracer::RootLocusResult;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 600.0;
const MARGIN: f64 = 60.0;

#[derive(Debug, Clone, Copy, PartialEq)]
struct Bounds {
    xmin: f64,
    xmax: f64,
    ymin: f64,
    ymax: f64,
}

impl Bounds {
    fn empty() -> Self {
        Self {
            xmin: f64::INFINITY,
            xmax: f64::NEG_INFINITY,
            ymin: f64::INFINITY,
            ymax: f64::NEG_INFINITY,
        }
    }

    fn include(&mut self, x: f64, y: f64) {
        self.xmin = self.xmin.min(x);
        self.xmax = self.xmax.max(x);
        self.ymin = self.ymin.min(y);
        self.ymax = self.ymax.max(y);
    }

    /// Pads each side by 10% of the span; degenerate spans get a unit width.
    fn padded(mut self) -> Self {
        for (lo, hi) in [(&mut self.xmin, &mut self.xmax), (&mut self.ymin, &mut self.ymax)] {
            if *hi - *lo <= 0.0 {
                *lo -= 0.5;
                *hi += 0.5;
            }
            let pad = 0.1 * (*hi - *lo);
            *lo -= pad;
            *hi += pad;
        }
        self
    }

    fn x(&self, v: f64) -> f64 {
        MARGIN + (v - self.xmin) / (self.xmax - self.xmin) * (WIDTH - 2.0 * MARGIN)
    }

    fn y(&self, v: f64) -> f64 {
        MARGIN + (self.ymax - v) / (self.ymax - self.ymin) * (HEIGHT - 2.0 * MARGIN)
    }
}

/// Tick positions at a 1-2-5 spacing giving roughly six ticks.
fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let raw = (hi - lo) / 6.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|i| i as f64 * step).collect()
}

fn label(v: f64) -> String {
    let s = format!("{:.6}", v);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

fn num(v: f64) -> String {
    format!("{v:.2}")
}

/// Static SVG rendering of the locus.
pub fn render(result: &RootLocusResult) -> String {
    let sigma0 = result.region.sigma0;
    let mut b = Bounds::empty();
    for t in &result.trajectories {
        for p in &t.points {
            b.include(p.sigma, p.omega);
        }
    }
    let plant = &result.plant;
    let visible = |z: &&num_complex::Complex64| z.re >= sigma0;
    for z in plant.poles().iter().chain(plant.zeros()).filter(visible) {
        b.include(z.re, z.im);
    }
    if !b.xmin.is_finite() {
        b.include(sigma0, 0.0);
    }
    b.include(sigma0, b.ymin);
    let b = b.padded();

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    svg.push_str(
        "<style>.trajectory{fill:none;stroke-width:1.5}.positive{stroke:#1f5fa8}.negative{stroke:#b8322a;stroke-dasharray:4 2}\
         .axis{stroke:#000}.grid{stroke:#ddd}text{font-family:sans-serif;font-size:12px}\
         .marker{font-size:16px}</style>\n",
    );
    let _ = writeln!(svg, r##"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="#fff"/>"##);

    let (left, right) = (MARGIN, WIDTH - MARGIN);
    let (top, bottom) = (MARGIN, HEIGHT - MARGIN);
    for tx in ticks(b.xmin, b.xmax) {
        let x = num(b.x(tx));
        let _ = writeln!(svg, r#"<line class="grid" x1="{x}" y1="{}" x2="{x}" y2="{}"/>"#, num(top), num(bottom));
        let _ = writeln!(
            svg,
            r#"<text class="tick" x="{x}" y="{}" text-anchor="middle">{}</text>"#,
            num(bottom + 18.0),
            label(tx)
        );
    }
    for ty in ticks(b.ymin, b.ymax) {
        let y = num(b.y(ty));
        let _ = writeln!(svg, r#"<line class="grid" x1="{}" y1="{y}" x2="{}" y2="{y}"/>"#, num(left), num(right));
        let _ = writeln!(
            svg,
            r#"<text class="tick" x="{}" y="{y}" text-anchor="end" dominant-baseline="middle">{}</text>"#,
            num(left - 6.0),
            label(ty)
        );
    }
    let _ = writeln!(
        svg,
        r#"<rect class="axis" x="{}" y="{}" width="{}" height="{}" fill="none"/>"#,
        num(left),
        num(top),
        num(right - left),
        num(bottom - top)
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">Re(s)</text>"#,
        num(0.5 * (left + right)),
        num(HEIGHT - 12.0)
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">Im(s)</text>"#,
        num(0.5 * (top + bottom)),
        num(0.5 * (top + bottom))
    );

    let xb = num(b.x(sigma0));
    let _ = writeln!(
        svg,
        r##"<line class="boundary" data-sigma0="{sigma0}" x1="{xb}" y1="{}" x2="{xb}" y2="{}" stroke="#555" stroke-dasharray="6 4"/>"##,
        num(top),
        num(bottom)
    );

    for (id, t) in result.trajectories.iter().enumerate() {
        let pts: Vec<String> = t
            .points
            .iter()
            .map(|p| format!("{},{}", num(b.x(p.sigma)), num(b.y(p.omega))))
            .collect();
        let sign = match t.sign {
            GainSign::Positive => "positive",
            GainSign::Negative => "negative",
        };
        let _ = writeln!(
            svg,
            r#"<polyline class="trajectory {sign}" data-id="{id}" points="{}"/>"#,
            pts.join(" ")
        );
    }

    let mut marker = |class: &str, glyph: &str, x: f64, y: f64| {
        let _ = writeln!(
            svg,
            r#"<text class="marker {class}" x="{}" y="{}" text-anchor="middle" dominant-baseline="central">{glyph}</text>"#,
            num(b.x(x)),
            num(b.y(y))
        );
    };
    for p in plant.poles().iter().filter(visible) {
        marker("pole", "×", p.re, p.im);
    }
    for z in plant.zeros().iter().filter(visible) {
        marker("zero", "○", z.re, z.im);
    }
    for bp in result.branch_points.iter().filter(|bp| bp.active) {
        marker("branch", "◆", bp.s.re, bp.s.im);
    }
    svg.push_str("</svg>\n");
    svg
}
