//! Reliability diagrams and confidence histograms as standalone SVG 1.1
//! documents, plus per-class tables as CSV — all emitted as plain text with
//! no plotting dependencies, so outputs are diffable in tests.
//!
//! Rendering is a pure function of its inputs: identical report + style give
//! byte-identical SVG. Coordinates are printed with 2 decimals; metric
//! annotations (the ECE text, marker values) with 4, matching the precision
//! calibration results are usually quoted at.

use crate::error::{Error, Result};
use crate::metrics::{bin_index, CalibrationReport};

/// Plot margins inside the SVG canvas, in pixels.
const MARGIN_LEFT: f64 = 60.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 50.0;

/// Visual parameters for both chart kinds.
#[derive(Debug, Clone)]
pub struct DiagramStyle {
    pub width_px: f64,
    pub height_px: f64,
    pub bar_color: String,
    pub diagonal_color: String,
    /// Fill of the shaded gap between bar top and the diagonal.
    pub gap_color: String,
    /// Whether the reliability diagram carries an "ECE = ..." annotation.
    pub annotate_ece: bool,
}

impl Default for DiagramStyle {
    fn default() -> Self {
        Self {
            width_px: 600.0,
            height_px: 600.0,
            bar_color: "#5b8cb8".into(),
            diagonal_color: "#444444".into(),
            gap_color: "#c85050".into(),
            annotate_ece: true,
        }
    }
}

/// Optional dashed vertical markers for the histogram.
#[derive(Debug, Clone, Default)]
pub struct HistogramMarkers {
    pub mean_confidence: Option<f64>,
    pub accuracy: Option<f64>,
}

/// The drawable area inside the margins as (x, y, width, height).
pub fn plot_rect(style: &DiagramStyle) -> (f64, f64, f64, f64) {
    assert!(
        style.width_px > MARGIN_LEFT + MARGIN_RIGHT && style.height_px > MARGIN_TOP + MARGIN_BOTTOM,
        "diagram dimensions must leave room inside the margins"
    );
    (
        MARGIN_LEFT,
        MARGIN_TOP,
        style.width_px - MARGIN_LEFT - MARGIN_RIGHT,
        style.height_px - MARGIN_TOP - MARGIN_BOTTOM,
    )
}

fn svg_open(style: &DiagramStyle) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{w:.0}\" height=\"{h:.0}\" viewBox=\"0 0 {w:.0} {h:.0}\">\n",
        w = style.width_px,
        h = style.height_px
    )
}

/// Axis lines, tick marks, and tick labels shared by both charts. The y
/// ticks are drawn only when `y_fraction_ticks` is set (the reliability
/// diagram's accuracy axis); the histogram labels its own count axis.
fn axes(out: &mut String, style: &DiagramStyle, y_fraction_ticks: bool) {
    let (px, py, pw, ph) = plot_rect(style);
    let x_end = px + pw;
    let y_end = py + ph;
    out.push_str(&format!(
        "<line x1=\"{px:.2}\" y1=\"{y_end:.2}\" x2=\"{x_end:.2}\" y2=\"{y_end:.2}\" stroke=\"#222222\" stroke-width=\"1\"/>\n"
    ));
    out.push_str(&format!(
        "<line x1=\"{px:.2}\" y1=\"{py:.2}\" x2=\"{px:.2}\" y2=\"{y_end:.2}\" stroke=\"#222222\" stroke-width=\"1\"/>\n"
    ));
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let x = px + f * pw;
        out.push_str(&format!(
            "<line x1=\"{x:.2}\" y1=\"{y_end:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"#222222\" stroke-width=\"1\"/>\n",
            y_end + 5.0
        ));
        out.push_str(&format!(
            "<text x=\"{x:.2}\" y=\"{:.2}\" font-size=\"12\" text-anchor=\"middle\" fill=\"#222222\">{f:.2}</text>\n",
            y_end + 20.0
        ));
        if y_fraction_ticks {
            let y = y_end - f * ph;
            out.push_str(&format!(
                "<line x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{px:.2}\" y2=\"{y:.2}\" stroke=\"#222222\" stroke-width=\"1\"/>\n",
                px - 5.0
            ));
            out.push_str(&format!(
                "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\" text-anchor=\"end\" fill=\"#222222\">{f:.2}</text>\n",
                px - 8.0,
                y + 4.0
            ));
        }
    }
}

/// Renders the reliability diagram: one bar per confidence bin at the bin's
/// empirical accuracy (zero-height when the bin is empty), the identity
/// diagonal, and a shaded gap between each nonempty bar top and the diagonal
/// at the bin midpoint.
pub fn render_reliability_svg(report: &CalibrationReport, style: &DiagramStyle) -> String {
    let (px, py, pw, ph) = plot_rect(style);
    let y_end = py + ph;
    let mut out = svg_open(style);
    out.push_str("<title>Reliability diagram</title>\n");

    for b in &report.bins {
        let x = px + b.lo * pw;
        let w = (b.hi - b.lo) * pw;
        let h = b.acc * ph;
        out.push_str(&format!(
            "<rect class=\"bar\" x=\"{x:.2}\" y=\"{:.2}\" width=\"{w:.2}\" height=\"{h:.2}\" fill=\"{}\" stroke=\"#ffffff\" stroke-width=\"1\"/>\n",
            y_end - h,
            style.bar_color
        ));
    }
    for b in &report.bins {
        if b.count == 0 {
            continue;
        }
        let x = px + b.lo * pw;
        let w = (b.hi - b.lo) * pw;
        let bar_top = y_end - b.acc * ph;
        let mid = 0.5 * (b.lo + b.hi);
        let diag = y_end - mid * ph;
        let top = bar_top.min(diag);
        let gap = (bar_top - diag).abs();
        out.push_str(&format!(
            "<rect class=\"gap\" x=\"{x:.2}\" y=\"{top:.2}\" width=\"{w:.2}\" height=\"{gap:.2}\" fill=\"{}\" fill-opacity=\"0.35\"/>\n",
            style.gap_color
        ));
    }
    out.push_str(&format!(
        "<line class=\"diagonal\" x1=\"{px:.2}\" y1=\"{y_end:.2}\" x2=\"{:.2}\" y2=\"{py:.2}\" stroke=\"{}\" stroke-width=\"1.5\" stroke-dasharray=\"5 4\"/>\n",
        px + pw,
        style.diagonal_color
    ));
    axes(&mut out, style, true);
    out.push_str(&format!(
        "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"13\" text-anchor=\"middle\" fill=\"#222222\">confidence</text>\n",
        px + pw / 2.0,
        y_end + 38.0
    ));
    out.push_str(&format!(
        "<text x=\"18\" y=\"{:.2}\" font-size=\"13\" text-anchor=\"middle\" fill=\"#222222\" transform=\"rotate(-90 18 {:.2})\">accuracy</text>\n",
        py + ph / 2.0,
        py + ph / 2.0
    ));
    if style.annotate_ece {
        out.push_str(&format!(
            "<text class=\"ece\" x=\"{:.2}\" y=\"{:.2}\" font-size=\"14\" fill=\"#222222\">ECE = {:.4}</text>\n",
            px + 10.0,
            py + 18.0,
            report.ece
        ));
    }
    out.push_str("</svg>\n");
    out
}

/// Bins raw confidences and renders their frequency histogram.
pub fn render_histogram_svg(
    confidences: &[f64],
    bins: usize,
    markers: &HistogramMarkers,
    style: &DiagramStyle,
) -> Result<String> {
    if bins < 1 {
        return Err(Error::InvalidArgument(
            "bin count must be at least 1".into(),
        ));
    }
    if confidences.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut counts = vec![0usize; bins];
    for (i, &c) in confidences.iter().enumerate() {
        if !c.is_finite() || !(0.0..=1.0).contains(&c) {
            return Err(Error::ConfidenceOutOfRange { index: i, value: c });
        }
        counts[bin_index(c, bins)] += 1;
    }
    Ok(render_histogram_from_counts(&counts, markers, style))
}

/// Histogram straight from per-bin counts (the form a saved report's bins
/// provide), with optional dashed markers at mean confidence and accuracy.
pub fn render_histogram_from_counts(
    counts: &[usize],
    markers: &HistogramMarkers,
    style: &DiagramStyle,
) -> String {
    assert!(!counts.is_empty(), "histogram needs at least one bin");
    let (px, py, pw, ph) = plot_rect(style);
    let y_end = py + ph;
    let max_count = counts.iter().copied().max().unwrap().max(1);
    let k = counts.len();
    let mut out = svg_open(style);
    out.push_str("<title>Confidence histogram</title>\n");

    for (i, &count) in counts.iter().enumerate() {
        let x = px + (i as f64 / k as f64) * pw;
        let w = pw / k as f64;
        let h = count as f64 / max_count as f64 * ph;
        out.push_str(&format!(
            "<rect class=\"bar\" x=\"{x:.2}\" y=\"{:.2}\" width=\"{w:.2}\" height=\"{h:.2}\" fill=\"{}\" stroke=\"#ffffff\" stroke-width=\"1\"/>\n",
            y_end - h,
            style.bar_color
        ));
    }
    let marker = |out: &mut String, value: f64, class: &str, label: &str, label_y: f64| {
        let x = px + value.clamp(0.0, 1.0) * pw;
        out.push_str(&format!(
            "<line class=\"{class}\" x1=\"{x:.2}\" y1=\"{py:.2}\" x2=\"{x:.2}\" y2=\"{y_end:.2}\" stroke=\"{}\" stroke-width=\"1.5\" stroke-dasharray=\"4 3\"/>\n",
            style.diagonal_color
        ));
        out.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{label_y:.2}\" font-size=\"12\" fill=\"#222222\">{label} {value:.4}</text>\n",
            x + 5.0
        ));
    };
    if let Some(mc) = markers.mean_confidence {
        marker(&mut out, mc, "marker-conf", "mean conf", py + 14.0);
    }
    if let Some(acc) = markers.accuracy {
        marker(&mut out, acc, "marker-acc", "accuracy", py + 30.0);
    }
    axes(&mut out, style, false);
    out.push_str(&format!(
        "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\" text-anchor=\"end\" fill=\"#222222\">{max_count}</text>\n",
        px - 8.0,
        py + 4.0
    ));
    out.push_str(&format!(
        "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\" text-anchor=\"end\" fill=\"#222222\">0</text>\n",
        px - 8.0,
        y_end + 4.0
    ));
    out.push_str(&format!(
        "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"13\" text-anchor=\"middle\" fill=\"#222222\">confidence</text>\n",
        px + pw / 2.0,
        y_end + 38.0
    ));
    out.push_str("</svg>\n");
    out
}

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Per-class table as CSV, sorted by support descending (index ascending on
/// ties). Classes nobody was labeled with render blank metric cells rather
/// than zeros, to avoid implying measured values.
pub fn render_class_table(report: &CalibrationReport) -> String {
    let mut rows: Vec<_> = report.per_class.iter().collect();
    rows.sort_by(|a, b| b.support.cmp(&a.support).then(a.index.cmp(&b.index)));
    let mut out = String::from("class,support,accuracy,avg_confidence,delta_acc,ece\n");
    for row in rows {
        let class = match &row.name {
            Some(name) => csv_field(name),
            None => row.index.to_string(),
        };
        if row.support == 0 {
            out.push_str(&format!("{class},0,,,,\n"));
        } else {
            out.push_str(&format!(
                "{class},{},{},{},{},{}\n",
                row.support, row.acc, row.avg_conf, row.delta_acc, row.ece
            ));
        }
    }
    out
}
