//! Grouped-bar chart of per-ranker metric means, as SVG or as CSV.
//!
//! One group per ranker, one bar per [`Metric`]. Values are rounded to four
//! decimals in both formats, so the CSV is a faithful twin of the chart.

use std::fmt::Write as _;

use fairrag_core::experiment::{Aggregates, Metric};

/// Output format, chosen by file extension.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    /// `.svg`
    Svg,
    /// `.csv`
    Csv,
}

impl ReportFormat {
    /// Format for a path's extension (case-insensitive).
    pub fn from_path(path: &std::path::Path) -> Option<Self> {
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        match ext.as_str() {
            "svg" => Some(Self::Svg),
            "csv" => Some(Self::Csv),
            _ => None,
        }
    }
}

/// One bar.
#[derive(Debug, Clone, PartialEq)]
pub struct Bar {
    /// Ranker (group).
    pub ranker: String,
    /// Metric (bar within the group).
    pub metric: Metric,
    /// Mean rounded to 4 decimals; `None` when the metric had no statistics.
    pub mean: Option<f64>,
}

fn round4(x: f64) -> f64 {
    (x * 1e4).round() / 1e4
}

/// Bars in ranker order, metrics in [`Metric::ALL`] order.
pub fn bars(aggregates: &Aggregates) -> Vec<Bar> {
    let mut out = Vec::with_capacity(aggregates.rankers.len() * Metric::ALL.len());
    for r in &aggregates.rankers {
        for metric in Metric::ALL {
            out.push(Bar {
                ranker: r.ranker.clone(),
                metric,
                mean: r.metric(metric).and_then(|m| m.stats).map(|s| round4(s.mean)),
            });
        }
    }
    out
}

fn fmt_mean(mean: Option<f64>) -> String {
    mean.map(|m| format!("{m:.4}")).unwrap_or_default()
}

/// `ranker,metric,mean`, one row per bar.
pub fn report_csv(aggregates: &Aggregates) -> String {
    let mut out = String::from("ranker,metric,mean\n");
    for b in bars(aggregates) {
        let _ = writeln!(out, "{},{},{}", b.ranker, b.metric, fmt_mean(b.mean));
    }
    out
}

const COLORS: [&str; 4] = ["#4e79a7", "#f28e2b", "#59a14f", "#e15759"];
const BAR_W: f64 = 22.0;
const GROUP_GAP: f64 = 30.0;
const PLOT_H: f64 = 240.0;
const LEFT: f64 = 50.0;
const TOP: f64 = 20.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Self-contained grouped-bar SVG on a fixed `[0, 1]` axis.
///
/// Each bar is a `<rect class="bar">` carrying `data-ranker`, `data-metric`
/// and `data-value` attributes.
pub fn report_svg(aggregates: &Aggregates) -> String {
    let n_metrics = Metric::ALL.len() as f64;
    let group_w = n_metrics * BAR_W;
    let groups = aggregates.rankers.len() as f64;
    let width = LEFT + groups * (group_w + GROUP_GAP) + GROUP_GAP + 170.0;
    let height = TOP + PLOT_H + 50.0;
    let base_y = TOP + PLOT_H;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for tick in 0..=4 {
        let v = f64::from(tick) * 0.25;
        let y = base_y - v * PLOT_H;
        let _ = writeln!(
            s,
            r##"<line x1="{LEFT}" y1="{y}" x2="{}" y2="{y}" stroke="#ddd"/><text x="{}" y="{}" text-anchor="end">{v:.2}</text>"##,
            width - 170.0,
            LEFT - 6.0,
            y + 4.0
        );
    }
    for (g, r) in aggregates.rankers.iter().enumerate() {
        let x0 = LEFT + GROUP_GAP + g as f64 * (group_w + GROUP_GAP);
        let _ = writeln!(s, r#"<g class="group" data-ranker="{}">"#, escape(&r.ranker));
        for (i, metric) in Metric::ALL.into_iter().enumerate() {
            let mean = r.metric(metric).and_then(|m| m.stats).map(|st| round4(st.mean));
            let h = mean.unwrap_or(0.0).clamp(0.0, 1.0) * PLOT_H;
            let _ = writeln!(
                s,
                r#"<rect class="bar" data-ranker="{}" data-metric="{metric}" data-value="{}" x="{}" y="{}" width="{BAR_W}" height="{h}" fill="{}"><title>{} {metric}: {}</title></rect>"#,
                escape(&r.ranker),
                fmt_mean(mean),
                x0 + i as f64 * BAR_W,
                base_y - h,
                COLORS[i % COLORS.len()],
                escape(&r.ranker),
                fmt_mean(mean),
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text></g>"#,
            x0 + group_w / 2.0,
            base_y + 16.0,
            escape(&r.ranker)
        );
    }
    let legend_x = width - 160.0;
    for (i, metric) in Metric::ALL.into_iter().enumerate() {
        let y = TOP + 10.0 + i as f64 * 18.0;
        let _ = writeln!(
            s,
            r#"<rect x="{legend_x}" y="{}" width="12" height="12" fill="{}"/><text x="{}" y="{}">{metric}</text>"#,
            y - 10.0,
            COLORS[i % COLORS.len()],
            legend_x + 18.0,
            y
        );
    }
    s.push_str("</svg>\n");
    s
}
