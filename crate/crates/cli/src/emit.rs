//! Trace serialization: CSV rows, standalone SVG charts, and the `%.17g`
//! float formatting both share.

use std::fs;
use std::io;
use std::path::Path;

use mascope_core::RunTrace;

/// Format like C's `printf("%.17g", v)`: 17 significant digits, trailing
/// zeros trimmed, scientific notation once the decimal exponent leaves
/// `[-4, 17)`, two-digit exponent field. Round-trips every finite double.
pub fn format_g17(v: f64) -> String {
    if v == 0.0 {
        return if v.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if !v.is_finite() {
        return if v.is_nan() {
            "nan".into()
        } else if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{:.16e}", v);
    let (mantissa, exp_str) = sci.split_once('e').expect("exponential format");
    let exponent: i32 = exp_str.parse().expect("numeric exponent");
    if exponent < -4 || exponent >= 17 {
        let mantissa = trim_trailing_zeros(mantissa);
        let sign = if exponent < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exponent.abs())
    } else {
        let decimals = (16 - exponent).max(0) as usize;
        let fixed = format!("{:.*}", decimals, v);
        trim_trailing_zeros(&fixed).to_string()
    }
}

fn trim_trailing_zeros(s: &str) -> &str {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.')
}

/// Pinned CSV header for traces.
pub const CSV_HEADER: &str =
    "k,consensus_residual,dist_to_opt,rel_gap_iter,rel_gap_ravg,epsilon,max_err";

/// Render a trace as CSV text: header line then one row per logged k.
pub fn trace_to_csv(trace: &RunTrace) -> String {
    let mut out = String::with_capacity(64 * (trace.rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for row in &trace.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            row.k,
            format_g17(row.consensus_residual),
            format_g17(row.dist_to_opt),
            format_g17(row.rel_obj_gap_iterates),
            format_g17(row.rel_obj_gap_running_avg),
            format_g17(row.epsilon_k),
            format_g17(row.max_error_norm),
        ));
    }
    out
}

pub fn emit_csv(trace: &RunTrace, path: &Path) -> io::Result<()> {
    fs::write(path, trace_to_csv(trace))
}

/// One chart series: label plus (k, value) samples.
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

impl Series {
    /// Extract a metric column from a trace; rows with `k = 0` or
    /// non-positive values are skipped since the chart is log-log.
    pub fn from_trace(
        label: impl Into<String>,
        trace: &RunTrace,
        value: impl Fn(&mascope_core::MetricRow) -> f64,
    ) -> Series {
        let points = trace
            .rows
            .iter()
            .filter(|r| r.k >= 1)
            .map(|r| (r.k as f64, value(r)))
            .filter(|&(_, v)| v > 0.0)
            .collect();
        Series {
            label: label.into(),
            points,
        }
    }
}

const SVG_WIDTH: f64 = 800.0;
const SVG_HEIGHT: f64 = 600.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 20.0;
const MARGIN_BOTTOM: f64 = 50.0;
const PALETTE: [&str; 6] = [
    "#c0392b", "#2980b9", "#27ae60", "#8e44ad", "#e67e22", "#16a085",
];

fn fmt2(v: f64) -> String {
    format!("{:.2}", v)
}

/// Render a log-log polyline chart into a standalone 800x600 SVG string.
/// Deterministic: same series, same bytes.
pub fn render_svg(series: &[Series], y_label: &str) -> String {
    let drawable: Vec<&Series> = series.iter().filter(|s| !s.points.is_empty()).collect();
    let mut x_min = f64::INFINITY;
    let mut x_max = f64::NEG_INFINITY;
    let mut y_min = f64::INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    for s in &drawable {
        for &(x, y) in &s.points {
            x_min = x_min.min(x);
            x_max = x_max.max(x);
            y_min = y_min.min(y);
            y_max = y_max.max(y);
        }
    }
    if drawable.is_empty() {
        x_min = 1.0;
        x_max = 10.0;
        y_min = 0.1;
        y_max = 1.0;
    }
    // pad to whole decades
    let x_lo = x_min.log10().floor();
    let x_hi = (x_max.log10().ceil()).max(x_lo + 1.0);
    let y_lo = y_min.log10().floor();
    let y_hi = (y_max.log10().ceil()).max(y_lo + 1.0);

    let plot_w = SVG_WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = SVG_HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let sx = |v: f64| MARGIN_LEFT + (v.log10() - x_lo) / (x_hi - x_lo) * plot_w;
    let sy = |v: f64| MARGIN_TOP + (y_hi - v.log10()) / (y_hi - y_lo) * plot_h;

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SVG_WIDTH}\" height=\"{SVG_HEIGHT}\" viewBox=\"0 0 {SVG_WIDTH} {SVG_HEIGHT}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");

    // grid and tick labels at decade lines
    let mut exp = x_lo as i64;
    while exp <= x_hi as i64 {
        let x = sx(10f64.powi(exp as i32));
        svg.push_str(&format!(
            "<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n",
            fmt2(x),
            fmt2(MARGIN_TOP),
            fmt2(MARGIN_TOP + plot_h)
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"12\" text-anchor=\"middle\">1e{}</text>\n",
            fmt2(x),
            fmt2(MARGIN_TOP + plot_h + 18.0),
            exp
        ));
        exp += 1;
    }
    let mut exp = y_lo as i64;
    while exp <= y_hi as i64 {
        let y = sy(10f64.powi(exp as i32));
        svg.push_str(&format!(
            "<line x1=\"{1}\" y1=\"{0}\" x2=\"{2}\" y2=\"{0}\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n",
            fmt2(y),
            fmt2(MARGIN_LEFT),
            fmt2(MARGIN_LEFT + plot_w)
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"12\" text-anchor=\"end\">1e{}</text>\n",
            fmt2(MARGIN_LEFT - 6.0),
            fmt2(y + 4.0),
            exp
        ));
        exp += 1;
    }
    // frame
    svg.push_str(&format!(
        "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"/>\n",
        fmt2(MARGIN_LEFT),
        fmt2(MARGIN_TOP),
        fmt2(plot_w),
        fmt2(plot_h)
    ));
    // axis labels
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"13\" text-anchor=\"middle\">iteration k</text>\n",
        fmt2(MARGIN_LEFT + plot_w / 2.0),
        fmt2(SVG_HEIGHT - 10.0)
    ));
    svg.push_str(&format!(
        "<text x=\"16\" y=\"{}\" font-family=\"monospace\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">{}</text>\n",
        fmt2(MARGIN_TOP + plot_h / 2.0),
        fmt2(MARGIN_TOP + plot_h / 2.0),
        xml_escape(y_label)
    ));

    for (idx, s) in drawable.iter().enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        let pts: Vec<String> = s
            .points
            .iter()
            .map(|&(x, y)| format!("{},{}", fmt2(sx(x)), fmt2(sy(y))))
            .collect();
        svg.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            color,
            pts.join(" ")
        ));
    }

    // legend, top right of the plot area
    for (idx, s) in drawable.iter().enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        let y = MARGIN_TOP + 16.0 + 18.0 * idx as f64;
        let x = MARGIN_LEFT + plot_w - 220.0;
        svg.push_str(&format!(
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{}\" stroke-width=\"2\"/>\n",
            fmt2(x),
            fmt2(y - 4.0),
            fmt2(x + 24.0),
            fmt2(y - 4.0),
            color
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"12\">{}</text>\n",
            fmt2(x + 30.0),
            fmt2(y),
            xml_escape(&s.label)
        ));
    }

    svg.push_str("</svg>\n");
    svg
}

pub fn emit_svg(series: &[Series], y_label: &str, path: &Path) -> io::Result<()> {
    fs::write(path, render_svg(series, y_label))
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
