//! Minimal SVG line plot of rate against SNR.

use std::fmt::Write as _;

use hybridsim::RateCurve;

const WIDTH: f64 = 760.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 230.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 55.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// Step of roughly `span / 6` drawn from {1, 2, 5}·10^k.
fn tick_step(span: f64) -> f64 {
    let raw = (span / 6.0).max(f64::MIN_POSITIVE);
    let mag = 10f64.powf(raw.log10().floor());
    [1.0, 2.0, 5.0, 10.0].into_iter().map(|m| m * mag).find(|&s| s >= raw).unwrap_or(10.0 * mag)
}

fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let step = tick_step(hi - lo);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// One `<polyline>` per curve; points whose mean is undefined are skipped.
pub fn rates_svg(curves: &[RateCurve], title: &str) -> String {
    let xs: Vec<f64> = curves.iter().flat_map(|c| c.points.iter().map(|p| p.snr_db)).collect();
    let ys: Vec<f64> = curves.iter().flat_map(|c| c.points.iter().filter_map(|p| p.mean_rate)).collect();
    let (x_lo, mut x_hi) = xs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    if !x_lo.is_finite() {
        return String::new();
    }
    if x_hi <= x_lo {
        x_hi = x_lo + 1.0;
    }
    let y_max = ys.iter().copied().fold(0.0, f64::max);
    let y_hi = if y_max > 0.0 { y_max * 1.05 } else { 1.0 };
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x_lo) / (x_hi - x_lo) * plot_w;
    let sy = |y: f64| TOP + plot_h - y / y_hi * plot_h;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="18" text-anchor="middle" font-size="14">{}</text>"#, LEFT + plot_w / 2.0, escape(title));
    for x in ticks(x_lo, x_hi) {
        let px = sx(x);
        let _ = writeln!(s, r##"<line x1="{px:.2}" y1="{TOP}" x2="{px:.2}" y2="{:.2}" stroke="#e0e0e0"/>"##, TOP + plot_h);
        let _ = writeln!(s, r#"<text x="{px:.2}" y="{:.2}" text-anchor="middle">{x}</text>"#, TOP + plot_h + 16.0);
    }
    for y in ticks(0.0, y_hi) {
        let py = sy(y);
        let _ = writeln!(s, r##"<line x1="{LEFT}" y1="{py:.2}" x2="{:.2}" y2="{py:.2}" stroke="#e0e0e0"/>"##, LEFT + plot_w);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{y}</text>"#, LEFT - 6.0, py + 4.0);
    }
    let _ = writeln!(s, r#"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#);
    let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">SNR (dB)</text>"#, LEFT + plot_w / 2.0, HEIGHT - 12.0);
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">Rate (bits/s/Hz)</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0
    );
    for (i, c) in curves.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let pts: Vec<String> = c
            .points
            .iter()
            .filter_map(|p| p.mean_rate.map(|m| format!("{:.2},{:.2}", sx(p.snr_db), sy(m))))
            .collect();
        let _ = writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#, pts.join(" "));
        let ly = TOP + 14.0 + 20.0 * i as f64;
        let lx = LEFT + plot_w + 15.0;
        let _ = writeln!(s, r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#, lx + 24.0);
        let note = if c.all_failed { " (all trials failed)" } else { "" };
        let _ = writeln!(s, r#"<text x="{}" y="{}">{}{note}</text>"#, lx + 30.0, ly + 4.0, c.method);
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use hybridsim::{Method, RatePoint};

    #[test]
    fn tick_steps() {
        assert_eq!(tick_step(60.0), 10.0);
        assert_eq!(tick_step(6.0), 1.0);
        assert_eq!(tick_step(12.0), 2.0);
        assert_eq!(ticks(-10.0, 50.0).len(), 7);
    }

    #[test]
    fn one_polyline_per_curve() {
        let curves: Vec<RateCurve> = [Method::OptimalSvd, Method::IdealHybrid]
            .into_iter()
            .map(|method| RateCurve {
                method,
                all_failed: false,
                points: (0..3)
                    .map(|k| RatePoint {
                        snr_db: 5.0 * k as f64,
                        mean_rate: Some(k as f64),
                        std_rate: Some(0.0),
                        trials: 1,
                        failed_trials: 0,
                    })
                    .collect(),
            })
            .collect();
        let svg = rates_svg(&curves, "a < b");
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("a &lt; b"));
        assert!(svg.contains("ideal-hybrid"));
    }
}
