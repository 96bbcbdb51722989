//! Minimal SVG line plot for gain traces: measured series plus the
//! 100%-aperture-efficiency ceiling, axes in GHz and dBi.

use std::fmt::Write as _;

use super::{aperture_gain_ceiling, GainTrace};

const WIDTH: f64 = 860.0;
const HEIGHT: f64 = 540.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 24.0;
const MARGIN_TOP: f64 = 24.0;
const MARGIN_BOTTOM: f64 = 58.0;

const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

/// Renders gain traces over `band` as a standalone SVG document. When
/// `ceiling_diameter` is given, the 100%-aperture-efficiency line for that
/// diameter is drawn dashed. Output is deterministic for identical inputs.
pub fn svg_gain_plot(traces: &[GainTrace], ceiling_diameter: Option<f64>, band: (f64, f64)) -> String {
    let (f_lo, f_hi) = (band.0 / 1e9, band.1 / 1e9);

    let mut g_lo = f64::INFINITY;
    let mut g_hi = f64::NEG_INFINITY;
    for trace in traces {
        for &(_, g) in trace.points() {
            g_lo = g_lo.min(g);
            g_hi = g_hi.max(g);
        }
    }
    if let Some(d) = ceiling_diameter {
        for f in [band.0, band.1] {
            if let Ok(c) = aperture_gain_ceiling(d, f) {
                g_lo = g_lo.min(c);
                g_hi = g_hi.max(c);
            }
        }
    }
    if !g_lo.is_finite() || !g_hi.is_finite() {
        g_lo = 0.0;
        g_hi = 30.0;
    }
    let g_lo = (g_lo / 5.0).floor() * 5.0;
    let g_hi = (g_hi / 5.0).ceil() * 5.0;
    let (g_lo, g_hi) = if g_hi - g_lo < 5.0 {
        (g_lo - 5.0, g_hi + 5.0)
    } else {
        (g_lo, g_hi)
    };

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let x = |f_ghz: f64| MARGIN_LEFT + (f_ghz - f_lo) / (f_hi - f_lo) * plot_w;
    let y = |g: f64| MARGIN_TOP + (g_hi - g) / (g_hi - g_lo) * plot_h;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" \
         font-family=\"sans-serif\" font-size=\"13\">"
    );
    let _ = writeln!(svg, "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>");

    // Grid and ticks: 2 GHz on x, 5 dBi on y.
    let mut f_tick = (f_lo / 2.0).ceil() * 2.0;
    while f_tick <= f_hi + 1e-9 {
        let px = x(f_tick);
        let _ = writeln!(
            svg,
            "<line x1=\"{px:.2}\" y1=\"{:.2}\" x2=\"{px:.2}\" y2=\"{:.2}\" \
             stroke=\"#dddddd\"/>",
            MARGIN_TOP,
            MARGIN_TOP + plot_h
        );
        let _ = writeln!(
            svg,
            "<text x=\"{px:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{f_tick:.0}</text>",
            MARGIN_TOP + plot_h + 20.0
        );
        f_tick += 2.0;
    }
    let mut g_tick = g_lo;
    while g_tick <= g_hi + 1e-9 {
        let py = y(g_tick);
        let _ = writeln!(
            svg,
            "<line x1=\"{:.2}\" y1=\"{py:.2}\" x2=\"{:.2}\" y2=\"{py:.2}\" stroke=\"#dddddd\"/>",
            MARGIN_LEFT,
            MARGIN_LEFT + plot_w
        );
        let _ = writeln!(
            svg,
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{g_tick:.0}</text>",
            MARGIN_LEFT - 8.0,
            py + 4.0
        );
        g_tick += 5.0;
    }

    // Axes and labels.
    let _ = writeln!(
        svg,
        "<rect x=\"{MARGIN_LEFT}\" y=\"{MARGIN_TOP}\" width=\"{plot_w}\" height=\"{plot_h}\" \
         fill=\"none\" stroke=\"#333333\"/>"
    );
    let _ = writeln!(
        svg,
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">frequency (GHz)</text>",
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 14.0
    );
    let _ = writeln!(
        svg,
        "<text x=\"18\" y=\"{:.2}\" text-anchor=\"middle\" \
         transform=\"rotate(-90 18 {:.2})\">gain (dBi)</text>",
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0
    );

    // Ceiling line, sampled densely across the band.
    if let Some(d) = ceiling_diameter {
        let mut pts = String::new();
        let n = 96;
        for i in 0..=n {
            let f_ghz = f_lo + (f_hi - f_lo) * i as f64 / n as f64;
            let c = aperture_gain_ceiling(d, f_ghz * 1e9).expect("band frequencies are positive");
            let _ = write!(pts, "{:.2},{:.2} ", x(f_ghz), y(c));
        }
        let _ = writeln!(
            svg,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"#000000\" \
             stroke-dasharray=\"6 4\" stroke-width=\"1.5\"/>",
            pts.trim_end()
        );
        let _ = writeln!(
            svg,
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\" font-style=\"italic\">\
             100% aperture efficiency</text>",
            MARGIN_LEFT + plot_w - 8.0,
            y(aperture_gain_ceiling(d, f_hi * 1e9).unwrap()) - 6.0
        );
    }

    // Measured traces and legend.
    for (i, trace) in traces.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut pts = String::new();
        for &(f, g) in trace.points() {
            let _ = write!(pts, "{:.2},{:.2} ", x(f / 1e9), y(g));
        }
        let _ = writeln!(
            svg,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"2\"/>",
            pts.trim_end()
        );
        let ly = MARGIN_TOP + 18.0 + 18.0 * i as f64;
        let _ = writeln!(
            svg,
            "<line x1=\"{:.2}\" y1=\"{ly:.2}\" x2=\"{:.2}\" y2=\"{ly:.2}\" \
             stroke=\"{color}\" stroke-width=\"2\"/>",
            MARGIN_LEFT + 10.0,
            MARGIN_LEFT + 34.0
        );
        let _ = writeln!(
            svg,
            "<text x=\"{:.2}\" y=\"{:.2}\">{}</text>",
            MARGIN_LEFT + 40.0,
            ly + 4.0,
            xml_escape(trace.label())
        );
    }

    svg.push_str("</svg>\n");
    svg
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::GainTrace;

    const GHZ: f64 = 1e9;

    fn sample_trace(label: &str, offset: f64) -> GainTrace {
        let points: Vec<(f64, f64)> = (0..23)
            .map(|i| (18.0 * GHZ + i as f64 * GHZ, 20.0 + offset + 0.2 * i as f64))
            .collect();
        GainTrace::new(label, (18.0 * GHZ, 40.0 * GHZ), points).unwrap()
    }

    #[test]
    fn plot_contains_series_ceiling_and_labels() {
        let traces = [sample_trace("lens_a", 0.0), sample_trace("lens_b", 1.5)];
        let svg = svg_gain_plot(&traces, Some(0.1), (18.0 * GHZ, 40.0 * GHZ));
        assert!(svg.starts_with("<svg"));
        assert_eq!(svg.matches("<polyline").count(), 3, "two traces + ceiling");
        assert!(svg.contains("frequency (GHz)"));
        assert!(svg.contains("gain (dBi)"));
        assert!(svg.contains("lens_a") && svg.contains("lens_b"));
        assert!(svg.contains("100% aperture efficiency"));
    }

    #[test]
    fn plot_is_deterministic() {
        let traces = [sample_trace("lens", 0.0)];
        let a = svg_gain_plot(&traces, Some(0.1), (18.0 * GHZ, 40.0 * GHZ));
        let b = svg_gain_plot(&traces, Some(0.1), (18.0 * GHZ, 40.0 * GHZ));
        assert_eq!(a, b);
    }

    #[test]
    fn labels_are_escaped() {
        let mut trace = sample_trace("a<b&c", 0.0);
        trace = GainTrace::new("a<b&c", trace.band(), trace.points().to_vec()).unwrap();
        let svg = svg_gain_plot(&[trace], None, (18.0 * GHZ, 40.0 * GHZ));
        assert!(svg.contains("a&lt;b&amp;c"));
        assert!(!svg.contains("a<b"));
    }
}
