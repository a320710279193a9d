//! Deterministic SVG charts and raw distribution export.
//!
//! Every renderer is a pure function from data to SVG text: fixed canvas
//! geometry, fixed fonts, a fixed 12-color palette assigned by sorted series
//! name, no timestamps. Identical inputs produce identical bytes, which
//! makes the output directly usable in golden tests.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::csvutil;
use crate::pca::ScatterPoint;
use crate::results::Summary;

#[derive(Debug, Error)]
pub enum PlotError {
    #[error("nothing to plot: empty series")]
    EmptySeries,
    #[error("values must be positive and finite, found {0}")]
    NonPositiveValue(f64),
}

/// Fixed palette; series get colors by their position in sorted name order.
pub const PALETTE: [&str; 12] = [
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc949",
    "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac", "#86bcb6", "#d37295",
];

const WIDTH: f64 = 900.0;
const HEIGHT: f64 = 420.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 30.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 80.0;
const FONT: &str = "monospace";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueKind {
    Score,
    TimeNs,
    Rss,
    Vms,
    Generic,
}

impl ValueKind {
    fn axis_label(self, mode: PlotMode) -> &'static str {
        match (self, mode) {
            (ValueKind::Score, PlotMode::Normalized) => "score / best score",
            (ValueKind::Score, PlotMode::Absolute) => "score",
            (ValueKind::TimeNs, PlotMode::Normalized) => "time / best time",
            (ValueKind::TimeNs, PlotMode::Absolute) => "wall time (ns)",
            (ValueKind::Rss, PlotMode::Normalized) => "peak RSS / best",
            (ValueKind::Rss, PlotMode::Absolute) => "peak RSS (bytes)",
            (ValueKind::Vms, PlotMode::Normalized) => "peak VMS / best",
            (ValueKind::Vms, PlotMode::Absolute) => "peak VMS (bytes)",
            (ValueKind::Generic, _) => "value",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotMode {
    Normalized,
    Absolute,
}

/// Grouped bar-chart data: one value (or a gap) per benchmark per series.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotSeries {
    /// X-axis categories (benchmark labels).
    pub labels: Vec<String>,
    /// (series name, one optional value per label), sorted by series name.
    pub series: Vec<(String, Vec<Option<f64>>)>,
    pub value_kind: ValueKind,
    pub mode: PlotMode,
}

/// Normalized when at least one benchmark has summaries from two or more
/// distinct runtime labels; absolute otherwise.
pub fn select_mode(summaries: &[Summary]) -> PlotMode {
    let mut per_bench: BTreeMap<(&str, &str), std::collections::BTreeSet<String>> = BTreeMap::new();
    for s in summaries {
        per_bench
            .entry((s.group.as_str(), s.benchmark_id.as_str()))
            .or_default()
            .insert(s.runtime_label());
    }
    if per_bench.values().any(|set| set.len() >= 2) {
        PlotMode::Normalized
    } else {
        PlotMode::Absolute
    }
}

fn check_positive(values: &[f64]) -> Result<(), PlotError> {
    for &v in values {
        if !(v.is_finite() && v > 0.0) {
            return Err(PlotError::NonPositiveValue(v));
        }
    }
    Ok(())
}

/// Normalize score values by the highest (best = 1.0).
pub fn normalize_scores(values: &[f64]) -> Result<Vec<f64>, PlotError> {
    if values.is_empty() {
        return Err(PlotError::EmptySeries);
    }
    check_positive(values)?;
    let max = values.iter().cloned().fold(f64::MIN, f64::max);
    Ok(values.iter().map(|v| v / max).collect())
}

/// Normalize time-like values by the lowest (best = 1.0, others ≥ 1).
pub fn normalize_times(values: &[f64]) -> Result<Vec<f64>, PlotError> {
    if values.is_empty() {
        return Err(PlotError::EmptySeries);
    }
    check_positive(values)?;
    let min = values.iter().cloned().fold(f64::MAX, f64::min);
    Ok(values.iter().map(|v| v / min).collect())
}

/// Assemble a grouped-bar dataset from summaries: one category per
/// benchmark, one series per runtime label, normalizing within each
/// benchmark when the mode asks for it. Scores normalize by the highest
/// value, everything else by the lowest.
pub fn series_from_summaries(
    summaries: &[Summary],
    value_kind: ValueKind,
    mode: PlotMode,
) -> Result<PlotSeries, PlotError> {
    let value_of = |s: &Summary| -> Option<f64> {
        match value_kind {
            ValueKind::Score => s.mean_score,
            ValueKind::TimeNs => s.mean_time_ns,
            ValueKind::Rss => s.mean_rss_bytes,
            ValueKind::Vms => s.mean_vms_bytes,
            ValueKind::Generic => s.mean_time_ns,
        }
    };

    let mut labels: Vec<String> = summaries
        .iter()
        .map(|s| format!("{}/{}", s.group, s.benchmark_id))
        .collect();
    labels.sort();
    labels.dedup();
    let mut names: Vec<String> = summaries.iter().map(|s| s.runtime_label()).collect();
    names.sort();
    names.dedup();

    let mut cells: BTreeMap<(String, String), f64> = BTreeMap::new();
    for s in summaries {
        if let Some(v) = value_of(s) {
            cells.insert(
                (format!("{}/{}", s.group, s.benchmark_id), s.runtime_label()),
                v,
            );
        }
    }

    let mut columns: Vec<Vec<Option<f64>>> = Vec::with_capacity(labels.len());
    for label in &labels {
        let mut column: Vec<Option<f64>> = names
            .iter()
            .map(|name| cells.get(&(label.clone(), name.clone())).copied())
            .collect();
        if mode == PlotMode::Normalized {
            let present: Vec<f64> = column.iter().flatten().copied().collect();
            if !present.is_empty() {
                let normalized = match value_kind {
                    ValueKind::Score => normalize_scores(&present)?,
                    _ => normalize_times(&present)?,
                };
                let mut it = normalized.into_iter();
                for slot in column.iter_mut() {
                    if slot.is_some() {
                        *slot = it.next();
                    }
                }
            }
        }
        columns.push(column);
    }

    let series = names
        .iter()
        .enumerate()
        .map(|(si, name)| {
            (
                name.clone(),
                columns.iter().map(|col| col[si]).collect::<Vec<_>>(),
            )
        })
        .collect();

    Ok(PlotSeries {
        labels,
        series,
        value_kind,
        mode,
    })
}

fn fmt(v: f64) -> String {
    format!("{v:.2}")
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn svg_open(out: &mut String, title: &str) {
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    out.push_str(&format!(
        "<rect x=\"0\" y=\"0\" width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"#ffffff\"/>\n"
    ));
    out.push_str(&format!(
        "<text x=\"{}\" y=\"24\" font-family=\"{FONT}\" font-size=\"16\" text-anchor=\"middle\">{}</text>\n",
        fmt(WIDTH / 2.0),
        xml_escape(title)
    ));
}

fn axis_frame(out: &mut String) {
    let x0 = MARGIN_LEFT;
    let y0 = HEIGHT - MARGIN_BOTTOM;
    let x1 = WIDTH - MARGIN_RIGHT;
    let y1 = MARGIN_TOP;
    out.push_str(&format!(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#333333\" stroke-width=\"1\"/>\n",
        fmt(x0), fmt(y0), fmt(x1), fmt(y0)
    ));
    out.push_str(&format!(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#333333\" stroke-width=\"1\"/>\n",
        fmt(x0), fmt(y0), fmt(x0), fmt(y1)
    ));
}

fn y_axis_label(out: &mut String, label: &str) {
    out.push_str(&format!(
        "<text x=\"16\" y=\"{}\" font-family=\"{FONT}\" font-size=\"11\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">{}</text>\n",
        fmt(HEIGHT / 2.0),
        fmt(HEIGHT / 2.0),
        xml_escape(label)
    ));
}

/// Legend swatches down the right-hand top corner, one per name in order.
fn legend(out: &mut String, names: &[String], colors: &[&str], footnote: Option<&str>) {
    for (i, name) in names.iter().enumerate() {
        let y = MARGIN_TOP + 14.0 * i as f64;
        out.push_str(&format!(
            "<rect x=\"{}\" y=\"{}\" width=\"10\" height=\"10\" fill=\"{}\" class=\"legend\"/>\n",
            fmt(WIDTH - MARGIN_RIGHT - 150.0),
            fmt(y),
            colors[i % colors.len()]
        ));
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"{FONT}\" font-size=\"11\">{}</text>\n",
            fmt(WIDTH - MARGIN_RIGHT - 136.0),
            fmt(y + 9.0),
            xml_escape(name)
        ));
    }
    if let Some(note) = footnote {
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"{FONT}\" font-size=\"10\" fill=\"#666666\">{}</text>\n",
            fmt(MARGIN_LEFT),
            fmt(HEIGHT - 8.0),
            xml_escape(note)
        ));
    }
}

/// Render a grouped bar chart. With `log_scale`, bar heights are
/// proportional to log10 of the value (subunit values clamp to zero height).
pub fn render_grouped_bars(
    series: &PlotSeries,
    title: &str,
    log_scale: bool,
) -> Result<String, PlotError> {
    if series.labels.is_empty() || series.series.is_empty() {
        return Err(PlotError::EmptySeries);
    }
    let mut max_value = f64::MIN;
    let mut any_value = false;
    let mut any_gap = false;
    for (_, values) in &series.series {
        for v in values {
            match v {
                Some(v) => {
                    if !(v.is_finite() && *v > 0.0) {
                        return Err(PlotError::NonPositiveValue(*v));
                    }
                    max_value = max_value.max(*v);
                    any_value = true;
                }
                None => any_gap = true,
            }
        }
    }
    if !any_value {
        return Err(PlotError::EmptySeries);
    }

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let base_y = HEIGHT - MARGIN_BOTTOM;
    let n_groups = series.labels.len() as f64;
    let n_series = series.series.len() as f64;
    let group_w = plot_w / n_groups;
    let bar_w = group_w * 0.8 / n_series;

    let use_log = log_scale && max_value > 1.0;
    let height_of = |v: f64| -> f64 {
        if use_log {
            let h = v.log10().max(0.0) / max_value.log10();
            plot_h * h
        } else {
            plot_h * v / max_value
        }
    };

    let mut out = String::new();
    svg_open(&mut out, title);
    axis_frame(&mut out);
    let scale_note = if use_log { " (log10 scale)" } else { "" };
    y_axis_label(&mut out, &format!("{}{}", series.value_kind.axis_label(series.mode), scale_note));

    for (si, (name, values)) in series.series.iter().enumerate() {
        let color = PALETTE[si % PALETTE.len()];
        let _ = name;
        for (gi, value) in values.iter().enumerate() {
            let Some(v) = value else { continue };
            let h = height_of(*v);
            let x = MARGIN_LEFT + group_w * gi as f64 + group_w * 0.1 + bar_w * si as f64;
            out.push_str(&format!(
                "<rect class=\"bar\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\"/>\n",
                fmt(x),
                fmt(base_y - h),
                fmt(bar_w),
                fmt(h),
                color
            ));
        }
    }

    for (gi, label) in series.labels.iter().enumerate() {
        let x = MARGIN_LEFT + group_w * (gi as f64 + 0.5);
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"{FONT}\" font-size=\"10\" text-anchor=\"end\" transform=\"rotate(-45 {} {})\">{}</text>\n",
            fmt(x),
            fmt(base_y + 14.0),
            fmt(x),
            fmt(base_y + 14.0),
            xml_escape(label)
        ));
    }

    let names: Vec<String> = series.series.iter().map(|(n, _)| n.clone()).collect();
    let colors: Vec<&str> = (0..names.len()).map(|i| PALETTE[i % PALETTE.len()]).collect();
    let footnote = any_gap.then_some("missing bars: no measurement for that benchmark/runtime");
    legend(&mut out, &names, &colors, footnote);

    out.push_str("</svg>\n");
    Ok(out)
}

/// Render a PCA score scatter plot, markers colored by group.
pub fn render_scatter(
    points: &[ScatterPoint],
    title: &str,
    x_label: &str,
    y_label: &str,
) -> Result<String, PlotError> {
    if points.is_empty() {
        return Err(PlotError::EmptySeries);
    }
    let (mut min_x, mut max_x) = (f64::MAX, f64::MIN);
    let (mut min_y, mut max_y) = (f64::MAX, f64::MIN);
    for p in points {
        min_x = min_x.min(p.x);
        max_x = max_x.max(p.x);
        min_y = min_y.min(p.y);
        max_y = max_y.max(p.y);
    }
    // Symmetric padding; degenerate ranges widen to a unit box.
    let pad = |min: &mut f64, max: &mut f64| {
        let span = *max - *min;
        if span == 0.0 {
            *min -= 1.0;
            *max += 1.0;
        } else {
            *min -= span * 0.08;
            *max += span * 0.08;
        }
    };
    pad(&mut min_x, &mut max_x);
    pad(&mut min_y, &mut max_y);

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let sx = |x: f64| MARGIN_LEFT + (x - min_x) / (max_x - min_x) * plot_w;
    let sy = |y: f64| HEIGHT - MARGIN_BOTTOM - (y - min_y) / (max_y - min_y) * plot_h;

    let mut groups: Vec<String> = points.iter().map(|p| p.group.clone()).collect();
    groups.sort();
    groups.dedup();

    let mut out = String::new();
    svg_open(&mut out, title);
    axis_frame(&mut out);
    y_axis_label(&mut out, y_label);
    out.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-family=\"{FONT}\" font-size=\"11\" text-anchor=\"middle\">{}</text>\n",
        fmt(MARGIN_LEFT + plot_w / 2.0),
        fmt(HEIGHT - MARGIN_BOTTOM + 32.0),
        xml_escape(x_label)
    ));

    for p in points {
        let gi = groups.binary_search(&p.group).unwrap_or(0);
        out.push_str(&format!(
            "<circle class=\"pt\" cx=\"{}\" cy=\"{}\" r=\"4\" fill=\"{}\" fill-opacity=\"0.8\"><title>{}</title></circle>\n",
            fmt(sx(p.x)),
            fmt(sy(p.y)),
            PALETTE[gi % PALETTE.len()],
            xml_escape(&p.label)
        ));
    }

    let colors: Vec<&str> = (0..groups.len()).map(|i| PALETTE[i % PALETTE.len()]).collect();
    legend(&mut out, &groups, &colors, None);
    out.push_str("</svg>\n");
    Ok(out)
}

/// Render a CDF polyline from nondecreasing unit-square points.
pub fn render_cdf(points: &[(f64, f64)], title: &str) -> Result<String, PlotError> {
    if points.is_empty() {
        return Err(PlotError::EmptySeries);
    }
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let sx = |x: f64| MARGIN_LEFT + x * plot_w;
    let sy = |y: f64| HEIGHT - MARGIN_BOTTOM - y * plot_h;

    let mut out = String::new();
    svg_open(&mut out, title);
    axis_frame(&mut out);
    y_axis_label(&mut out, "fraction of execution");
    out.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-family=\"{FONT}\" font-size=\"11\" text-anchor=\"middle\">fraction of executed functions</text>\n",
        fmt(MARGIN_LEFT + plot_w / 2.0),
        fmt(HEIGHT - MARGIN_BOTTOM + 32.0)
    ));

    let mut coords: Vec<String> = Vec::with_capacity(points.len() + 1);
    coords.push(format!("{},{}", fmt(sx(0.0)), fmt(sy(0.0))));
    for (x, y) in points {
        coords.push(format!("{},{}", fmt(sx(*x)), fmt(sy(*y))));
    }
    out.push_str(&format!(
        "<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"2\"/>\n",
        coords.join(" "),
        PALETTE[0]
    ));
    out.push_str("</svg>\n");
    Ok(out)
}

/// Raw per-engine values as `engine,value` CSV, engines in sorted order.
pub fn export_distribution(values: &BTreeMap<String, Vec<f64>>) -> Result<String, PlotError> {
    if values.values().all(|v| v.is_empty()) {
        return Err(PlotError::EmptySeries);
    }
    let mut out = String::new();
    out.push_str("engine,value\n");
    for (engine, vs) in values {
        for v in vs {
            csvutil::push_record(&mut out, &[engine.clone(), v.to_string()]);
        }
    }
    Ok(out)
}
