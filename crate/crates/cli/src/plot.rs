//! Static SVG heatmaps and line plots. Output depends only on the inputs, so
//! files are byte-stable.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 90.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 55.0;

/// Blue to yellow through teal and green, roughly perceptually even.
fn colour(p: f64) -> String {
    const STOPS: [(f64, [f64; 3]); 5] = [
        (0.0, [68.0, 1.0, 84.0]),
        (0.25, [59.0, 82.0, 139.0]),
        (0.5, [33.0, 145.0, 140.0]),
        (0.75, [94.0, 201.0, 98.0]),
        (1.0, [253.0, 231.0, 37.0]),
    ];
    let p = if p.is_finite() { p.clamp(0.0, 1.0) } else { 0.0 };
    let k = STOPS.iter().rposition(|s| s.0 <= p).unwrap().min(STOPS.len() - 2);
    let (a, b) = (STOPS[k], STOPS[k + 1]);
    let u = (p - a.0) / (b.0 - a.0);
    let c: Vec<u8> = (0..3).map(|i| (a.1[i] + u * (b.1[i] - a.1[i])).round() as u8).collect();
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = hi - lo;
    if !(span > 0.0) {
        return vec![lo];
    }
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap();
    let mut t = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while t <= hi + 1e-9 * span {
        out.push(if t.abs() < 1e-12 * span { 0.0 } else { t });
        t += step;
    }
    out
}

fn label(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x.0) / (self.x.1 - self.x.0).max(f64::MIN_POSITIVE) * (W - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        H - BOTTOM - (y - self.y.0) / (self.y.1 - self.y.0).max(f64::MIN_POSITIVE) * (H - TOP - BOTTOM)
    }

    fn axes(&self, svg: &mut String, xlabel: &str, ylabel: &str) {
        let (x0, x1, y0, y1) = (LEFT, W - RIGHT, TOP, H - BOTTOM);
        let _ = writeln!(svg, r#"<rect x="{x0}" y="{y0}" width="{}" height="{}" fill="none" stroke="black"/>"#, x1 - x0, y1 - y0);
        for t in ticks(self.x.0, self.x.1) {
            let x = self.px(t);
            let _ = writeln!(svg, r#"<line x1="{x:.2}" y1="{y1}" x2="{x:.2}" y2="{:.2}" stroke="black"/>"#, y1 + 5.0);
            let _ = writeln!(svg, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, y1 + 20.0, label(t));
        }
        for t in ticks(self.y.0, self.y.1) {
            let y = self.py(t);
            let _ = writeln!(svg, r#"<line x1="{:.2}" y1="{y:.2}" x2="{x0}" y2="{y:.2}" stroke="black"/>"#, x0 - 5.0);
            let _ = writeln!(svg, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, x0 - 8.0, y + 4.0, label(t));
        }
        let _ = writeln!(svg, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{xlabel}</text>"#, 0.5 * (x0 + x1), H - 12.0);
        let _ = writeln!(
            svg,
            r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">{ylabel}</text>"#,
            0.5 * (y0 + y1),
            0.5 * (y0 + y1)
        );
    }
}

fn open() -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\" font-family=\"sans-serif\" font-size=\"12\">\n<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n"
    )
}

fn edges(centres: &[f64]) -> Vec<f64> {
    if centres.len() == 1 {
        return vec![centres[0] - 0.5, centres[0] + 0.5];
    }
    let mut e = Vec::with_capacity(centres.len() + 1);
    e.push(centres[0] - 0.5 * (centres[1] - centres[0]));
    for w in centres.windows(2) {
        e.push(0.5 * (w[0] + w[1]));
    }
    let n = centres.len();
    e.push(centres[n - 1] + 0.5 * (centres[n - 1] - centres[n - 2]));
    e
}

/// Heatmap of `values[row][col]` with `x` along columns and `y` along rows.
pub fn heatmap(x: &[f64], y: &[f64], values: &[Vec<f64>], xlabel: &str, ylabel: &str) -> String {
    let (xe, ye) = (edges(x), edges(y));
    let frame = Frame {
        x: (xe[0], *xe.last().unwrap()),
        y: (ye[0].min(*ye.last().unwrap()), ye[0].max(*ye.last().unwrap())),
    };
    let mut svg = open();
    for (r, row) in values.iter().enumerate() {
        let (ya, yb) = (frame.py(ye[r]), frame.py(ye[r + 1]));
        for (c, &v) in row.iter().enumerate() {
            let (xa, xb) = (frame.px(xe[c]), frame.px(xe[c + 1]));
            let _ = writeln!(
                svg,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
                xa.min(xb),
                ya.min(yb),
                (xb - xa).abs() + 0.3,
                (yb - ya).abs() + 0.3,
                colour(v)
            );
        }
    }
    frame.axes(&mut svg, xlabel, ylabel);
    let (bx, by, bh) = (W - RIGHT + 20.0, TOP, H - TOP - BOTTOM);
    for k in 0..50 {
        let p = (k as f64 + 0.5) / 50.0;
        let _ = writeln!(
            svg,
            r#"<rect x="{bx}" y="{:.2}" width="15" height="{:.2}" fill="{}"/>"#,
            by + bh * (1.0 - (k + 1) as f64 / 50.0),
            bh / 50.0 + 0.3,
            colour(p)
        );
    }
    for (p, y) in [(0.0, by + bh), (0.5, by + 0.5 * bh), (1.0, by)] {
        let _ = writeln!(svg, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, bx + 20.0, y + 4.0, label(p));
    }
    let _ = writeln!(svg, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">P</text>"#, bx + 7.5, by - 8.0);
    svg.push_str("</svg>\n");
    svg
}

/// One or more curves sharing the axes.
pub fn lines(series: &[(String, Vec<f64>, Vec<f64>)], xlabel: &str, ylabel: &str) -> String {
    const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];
    let all_x = series.iter().flat_map(|s| s.1.iter().copied());
    let all_y = series.iter().flat_map(|s| s.2.iter().copied());
    let (xmin, xmax) = all_x.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    let ymax = all_y.fold(0.0f64, f64::max).max(1e-12);
    let frame = Frame {
        x: (xmin, if xmax > xmin { xmax } else { xmin + 1.0 }),
        y: (0.0, if ymax <= 1.0 { 1.0 } else { ymax }),
    };
    let mut svg = open();
    frame.axes(&mut svg, xlabel, ylabel);
    for (k, (name, xs, ys)) in series.iter().enumerate() {
        let colour = PALETTE[k % PALETTE.len()];
        let points: Vec<String> = xs.iter().zip(ys).map(|(x, y)| format!("{:.2},{:.2}", frame.px(*x), frame.py(*y))).collect();
        let _ = writeln!(svg, r#"<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{}"/>"#, points.join(" "));
        let ly = TOP + 15.0 + 16.0 * k as f64;
        let _ = writeln!(svg, r#"<line x1="{:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{colour}" stroke-width="2"/>"#, W - RIGHT + 8.0, W - RIGHT + 24.0);
        let _ = writeln!(svg, r#"<text x="{:.2}" y="{:.2}">{name}</text>"#, W - RIGHT + 28.0, ly + 4.0);
    }
    svg.push_str("</svg>\n");
    svg
}
