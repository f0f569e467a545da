//! Minimal deterministic SVG line plots. No external renderer: a polyline
//! with point markers, optional error bars, axes with five ticks, and
//! labels. Output depends only on the data.

use crate::report::{ExperimentReport, Rows};

const W: f64 = 640.0;
const H: f64 = 420.0;
const ML: f64 = 72.0; // left margin
const MR: f64 = 24.0;
const MT: f64 = 44.0;
const MB: f64 = 56.0;

struct Frame {
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
}

impl Frame {
    fn around(points: &[(f64, f64)]) -> Frame {
        let mut x_min = f64::INFINITY;
        let mut x_max = f64::NEG_INFINITY;
        let mut y_min = f64::INFINITY;
        let mut y_max = f64::NEG_INFINITY;
        for &(x, y) in points {
            x_min = x_min.min(x);
            x_max = x_max.max(x);
            y_min = y_min.min(y);
            y_max = y_max.max(y);
        }
        if !x_min.is_finite() {
            (x_min, x_max, y_min, y_max) = (0.0, 1.0, 0.0, 1.0);
        }
        // pad degenerate and regular ranges alike
        let x_pad = ((x_max - x_min) * 0.05).max(1e-9);
        let y_pad = ((y_max - y_min) * 0.05).max(1e-9);
        Frame {
            x_min: x_min - x_pad,
            x_max: x_max + x_pad,
            y_min: y_min - y_pad,
            y_max: y_max + y_pad,
        }
    }

    fn sx(&self, x: f64) -> f64 {
        ML + (x - self.x_min) / (self.x_max - self.x_min) * (W - ML - MR)
    }

    fn sy(&self, y: f64) -> f64 {
        H - MB - (y - self.y_min) / (self.y_max - self.y_min) * (H - MT - MB)
    }
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let a = v.abs();
    if (1e-3..1e5).contains(&a) {
        let s = format!("{v:.4}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        s.to_string()
    } else {
        format!("{v:.2e}")
    }
}

/// One x/y line chart with optional symmetric error bars.
pub fn line_plot(
    title: &str,
    x_label: &str,
    y_label: &str,
    points: &[(f64, f64)],
    errors: Option<&[f64]>,
) -> String {
    let frame = Frame::around(points);
    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {W} {H}\" \
         font-family=\"monospace\" font-size=\"12\">\n"
    ));
    svg.push_str(&format!(
        "<rect x=\"0\" y=\"0\" width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n"
    ));
    svg.push_str(&format!(
        "<text x=\"{:.1}\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n",
        W / 2.0,
        xml(title)
    ));

    // axes
    svg.push_str(&format!(
        "<line x1=\"{ML}\" y1=\"{MT}\" x2=\"{ML}\" y2=\"{:.1}\" stroke=\"black\"/>\n",
        H - MB
    ));
    svg.push_str(&format!(
        "<line x1=\"{ML}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"black\"/>\n",
        H - MB,
        W - MR,
        H - MB
    ));

    // five ticks per axis
    for i in 0..=4 {
        let t = i as f64 / 4.0;
        let xv = frame.x_min + t * (frame.x_max - frame.x_min);
        let yv = frame.y_min + t * (frame.y_max - frame.y_min);
        let sx = frame.sx(xv);
        let sy = frame.sy(yv);
        svg.push_str(&format!(
            "<line x1=\"{sx:.1}\" y1=\"{:.1}\" x2=\"{sx:.1}\" y2=\"{:.1}\" stroke=\"black\"/>\n",
            H - MB,
            H - MB + 5.0
        ));
        svg.push_str(&format!(
            "<text x=\"{sx:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>\n",
            H - MB + 20.0,
            tick_label(xv)
        ));
        svg.push_str(&format!(
            "<line x1=\"{:.1}\" y1=\"{sy:.1}\" x2=\"{ML}\" y2=\"{sy:.1}\" stroke=\"black\"/>\n",
            ML - 5.0
        ));
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{}</text>\n",
            ML - 9.0,
            sy + 4.0,
            tick_label(yv)
        ));
    }

    // axis labels
    svg.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>\n",
        ML + (W - ML - MR) / 2.0,
        H - 12.0,
        xml(x_label)
    ));
    svg.push_str(&format!(
        "<text x=\"16\" y=\"{:.1}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.1})\">{}</text>\n",
        MT + (H - MT - MB) / 2.0,
        MT + (H - MT - MB) / 2.0,
        xml(y_label)
    ));

    if points.is_empty() {
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">no data</text>\n",
            W / 2.0,
            H / 2.0
        ));
        svg.push_str("</svg>\n");
        return svg;
    }

    // error bars under the line
    if let Some(errs) = errors {
        for (&(x, y), &e) in points.iter().zip(errs) {
            if e > 0.0 {
                let sx = frame.sx(x);
                svg.push_str(&format!(
                    "<line x1=\"{sx:.1}\" y1=\"{:.1}\" x2=\"{sx:.1}\" y2=\"{:.1}\" stroke=\"steelblue\"/>\n",
                    frame.sy(y - e),
                    frame.sy(y + e)
                ));
            }
        }
    }

    let path: Vec<String> = points
        .iter()
        .map(|&(x, y)| format!("{:.1},{:.1}", frame.sx(x), frame.sy(y)))
        .collect();
    svg.push_str(&format!(
        "<polyline points=\"{}\" fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\"/>\n",
        path.join(" ")
    ));
    for &(x, y) in points {
        svg.push_str(&format!(
            "<circle cx=\"{:.1}\" cy=\"{:.1}\" r=\"3\" fill=\"steelblue\"/>\n",
            frame.sx(x),
            frame.sy(y)
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

fn xml(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// The plot defined for this report's command, if any: the mean curve over
/// q, the variance scan on log-log axes, or the coupling-path level means.
pub fn render(report: &ExperimentReport) -> Option<String> {
    match &report.rows {
        Rows::GammaCurve(points) => {
            let xy: Vec<(f64, f64)> = points.iter().map(|p| (p.q, p.gamma_hat)).collect();
            let errs: Vec<f64> = points.iter().map(|p| p.stderr).collect();
            Some(line_plot(
                "mean LCS/n against length asymmetry",
                "q",
                "mean LCS / n",
                &xy,
                Some(&errs),
            ))
        }
        Rows::VarianceScan(points) => {
            let xy: Vec<(f64, f64)> = points
                .iter()
                .map(|p| ((p.n as f64).log10(), p.var_hat.max(f64::MIN_POSITIVE).log10()))
                .collect();
            Some(line_plot(
                "LCS variance against length",
                "log10(n)",
                "log10(var)",
                &xy,
                None,
            ))
        }
        Rows::CouplingPath(points) => {
            let xy: Vec<(f64, f64)> = points
                .iter()
                .map(|p| (p.level as f64, p.mean))
                .collect();
            let errs: Vec<f64> = points.iter().map(|p| p.stderr).collect();
            Some(line_plot(
                "mean score along the revert chain",
                "runs present",
                "mean LCS",
                &xy,
                Some(&errs),
            ))
        }
        _ => None,
    }
}
