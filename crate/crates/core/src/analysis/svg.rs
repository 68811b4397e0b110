//! Static SVG scatter plots: predictor on x, target on y, linear and
//! quadratic fitted curves overlaid. Output bytes are deterministic.

use super::report::ScatterPlot;
use std::fmt::Write as _;

const WIDTH: f64 = 560.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 54.0;

struct Range {
    lo: f64,
    hi: f64,
}

impl Range {
    fn of(values: impl Iterator<Item = f64>) -> Range {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for v in values {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() || !hi.is_finite() {
            return Range { lo: 0.0, hi: 1.0 };
        }
        if hi - lo < 1e-9 {
            lo -= 0.5;
            hi += 0.5;
        }
        let pad = (hi - lo) * 0.06;
        Range {
            lo: lo - pad,
            hi: hi + pad,
        }
    }

    fn scale(&self, v: f64, out_lo: f64, out_hi: f64) -> f64 {
        out_lo + (v - self.lo) / (self.hi - self.lo) * (out_hi - out_lo)
    }
}

fn eval_poly(coeffs: &[f64], x: f64) -> f64 {
    let mut acc = 0.0;
    for &c in coeffs.iter().rev() {
        acc = acc * x + c;
    }
    acc
}

/// Renders one metric pair as an SVG scatter with fitted curves.
pub fn scatter_svg(plot: &ScatterPlot) -> String {
    let xr = Range::of(plot.points.iter().map(|p| p.0));
    let yr = Range::of(plot.points.iter().map(|p| p.1));
    let sx = |v: f64| xr.scale(v, MARGIN, WIDTH - MARGIN / 2.0);
    let sy = |v: f64| yr.scale(v, HEIGHT - MARGIN, MARGIN / 2.0);

    let mut svg = String::new();
    writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
    )
    .unwrap();
    writeln!(svg, "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>").unwrap();
    writeln!(
        svg,
        "<text x=\"{:.1}\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">{} → {}</text>",
        WIDTH / 2.0,
        plot.predictor.name(),
        plot.target.name()
    )
    .unwrap();

    // axes
    writeln!(
        svg,
        "<line x1=\"{:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"black\"/>",
        MARGIN,
        HEIGHT - MARGIN,
        WIDTH - MARGIN / 2.0,
        HEIGHT - MARGIN
    )
    .unwrap();
    writeln!(
        svg,
        "<line x1=\"{:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"black\"/>",
        MARGIN,
        HEIGHT - MARGIN,
        MARGIN,
        MARGIN / 2.0
    )
    .unwrap();
    for tick in 0..=4 {
        let fx = xr.lo + (xr.hi - xr.lo) * tick as f64 / 4.0;
        let fy = yr.lo + (yr.hi - yr.lo) * tick as f64 / 4.0;
        writeln!(
            svg,
            "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"middle\">{:.2}</text>",
            sx(fx),
            HEIGHT - MARGIN + 16.0,
            fx
        )
        .unwrap();
        writeln!(
            svg,
            "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"end\">{:.2}</text>",
            MARGIN - 6.0,
            sy(fy) + 3.0,
            fy
        )
        .unwrap();
    }
    // axis labels
    writeln!(
        svg,
        "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">{}</text>",
        (MARGIN + WIDTH - MARGIN / 2.0) / 2.0,
        HEIGHT - 14.0,
        plot.predictor.name()
    )
    .unwrap();
    writeln!(
        svg,
        "<text x=\"16\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.1})\">{}</text>",
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        plot.target.name()
    )
    .unwrap();

    for &(x, y) in &plot.points {
        writeln!(
            svg,
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2.5\" fill=\"#4682b4\" fill-opacity=\"0.55\"/>",
            sx(x),
            sy(y)
        )
        .unwrap();
    }

    let mut draw_curve = |coeffs: &[f64], color: &str| {
        let mut path = String::new();
        for i in 0..=63 {
            let x = xr.lo + (xr.hi - xr.lo) * i as f64 / 63.0;
            let y = eval_poly(coeffs, x).clamp(yr.lo, yr.hi);
            write!(path, "{}{:.2},{:.2}", if i == 0 { "" } else { " " }, sx(x), sy(y)).unwrap();
        }
        writeln!(
            svg,
            "<polyline points=\"{path}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.8\"/>"
        )
        .unwrap();
    };
    if let Some(c) = &plot.linear {
        draw_curve(c, "#d2691e");
    }
    if let Some(c) = &plot.quadratic {
        draw_curve(c, "#2e8b57");
    }

    svg.push_str("</svg>\n");
    svg
}

/// Scatter points plus sampled fitted curves as CSV rows
/// (`kind,x,y` with kind ∈ {point, linear, quadratic}).
pub fn scatter_csv(plot: &ScatterPlot) -> String {
    let mut out = String::from("kind,x,y\n");
    for &(x, y) in &plot.points {
        writeln!(out, "point,{x:.6},{y:.6}").unwrap();
    }
    let xr = Range::of(plot.points.iter().map(|p| p.0));
    for (name, coeffs) in [("linear", &plot.linear), ("quadratic", &plot.quadratic)] {
        if let Some(c) = coeffs {
            for i in 0..=63 {
                let x = xr.lo + (xr.hi - xr.lo) * i as f64 / 63.0;
                writeln!(out, "{name},{x:.6},{:.6}", eval_poly(c, x)).unwrap();
            }
        }
    }
    out
}
