use std::collections::BTreeMap;

use serde_json::json;

use super::svg::{Anchor, Scale, Svg, GRID, INK};
use super::{PlotSpec, RenderedFigure};
use crate::stats::AdjustedResultSet;

const BAR_FILL: &str = "#4c72b0";

/// Significant lipid partners per fundus feature, sorted by count descending
/// then name. Every feature in `features` or in the result set gets a bar.
pub fn significant_counts(set: &AdjustedResultSet, features: &[String]) -> Vec<(String, usize)> {
    let mut counts: BTreeMap<&str, usize> = features.iter().map(|f| (f.as_str(), 0)).collect();
    for r in &set.results {
        counts.entry(r.x_name.as_str()).or_default();
    }
    for i in set.significant_indices() {
        *counts.get_mut(set.results[i].x_name.as_str()).expect("inserted") += 1;
    }
    let mut out: Vec<(String, usize)> = counts.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
    out.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    out
}

pub fn render_count_bars(set: &AdjustedResultSet, features: &[String], spec: &PlotSpec) -> RenderedFigure {
    let counts = significant_counts(set, features);
    let (label_w, row_h, top) = (230.0, 22.0, 56.0);
    let plot_w = (spec.width - label_w - 60.0).max(100.0);
    let max = counts.iter().map(|c| c.1).max().unwrap_or(0).max(1);
    let x = Scale::new((0.0, max as f64), (label_w, label_w + plot_w));
    let height = top + counts.len().max(1) as f64 * row_h + 30.0;
    let mut svg = Svg::new(spec.width, height, &spec.title);

    svg.line(
        label_w,
        top - 4.0,
        label_w,
        top + counts.len() as f64 * row_h,
        "axis",
        INK,
        1.0,
    );
    svg.open_group("bars");
    for (i, (name, n)) in counts.iter().enumerate() {
        let y = top + i as f64 * row_h;
        svg.text(label_w - 8.0, y + row_h / 2.0 + 4.0, Anchor::End, "label", name);
        if *n > 0 {
            svg.rect(
                label_w,
                y + 3.0,
                x.map(*n as f64) - label_w,
                row_h - 6.0,
                "bar",
                BAR_FILL,
            );
        } else {
            svg.line(
                label_w,
                y + row_h / 2.0,
                label_w + 2.0,
                y + row_h / 2.0,
                "bar-empty",
                GRID,
                1.0,
            );
        }
        svg.text(
            x.map(*n as f64) + 6.0,
            y + row_h / 2.0 + 4.0,
            Anchor::Start,
            "count",
            &n.to_string(),
        );
    }
    svg.close_group();

    RenderedFigure {
        kind: spec.kind,
        svg: svg.finish(),
        data: json!({
            "title": spec.title,
            "bars": counts.iter().map(|(f, n)| json!({"feature": f, "count": n})).collect::<Vec<_>>(),
            "total_significant": set.significant_count(),
        }),
        warnings: Vec::new(),
    }
}
