use serde_json::json;

use super::svg::{num, round4, sig4, sign_style, ticks, Anchor, Scale, Svg, GRID, INK};
use super::{PlotSpec, RenderedFigure};
use crate::pipeline::RankedAssociation;

/// One row per association with a point at r and a whisker over its
/// confidence interval; rows run from largest |r| down.
pub fn render_forest(top: &[RankedAssociation], spec: &PlotSpec) -> RenderedFigure {
    let mut rows: Vec<&RankedAssociation> = top.iter().collect();
    rows.sort_by(|a, b| b.result.r.abs().total_cmp(&a.result.r.abs()));

    let lo = rows.iter().map(|a| round4(a.result.ci_lower)).fold(0.0, f64::min);
    let hi = rows.iter().map(|a| round4(a.result.ci_upper)).fold(0.0, f64::max);
    let pad = ((hi - lo) * 0.08).max(0.01);
    let (label_w, annot_w, row_h, top_m) = (330.0, 220.0, 22.0, 56.0);
    let plot_w = (spec.width - label_w - annot_w).max(200.0);
    let width = label_w + plot_w + annot_w;
    let x = Scale::new((lo - pad, hi + pad), (label_w, label_w + plot_w));
    let body_h = (rows.len().max(1)) as f64 * row_h;
    let height = top_m + body_h + 50.0;
    let mut svg = Svg::new(width, height, &spec.title);

    let tick_values = ticks(lo - pad, hi + pad, 6);
    svg.open_group("axis");
    for &t in &tick_values {
        let px = x.map(t);
        svg.line(px, top_m - 4.0, px, top_m + body_h, "gridline", GRID, 0.5);
        svg.text(px, top_m + body_h + 16.0, Anchor::Middle, "tick", &num(t));
    }
    svg.text(
        label_w + plot_w / 2.0,
        top_m + body_h + 36.0,
        Anchor::Middle,
        "axis-label",
        "partial r (95% CI)",
    );
    svg.close_group();
    let zero = x.map(0.0);
    svg.line(zero, top_m - 8.0, zero, top_m + body_h + 4.0, "zero", INK, 1.2);

    let mut data_rows = Vec::with_capacity(rows.len());
    svg.open_group("rows");
    for (i, a) in rows.iter().enumerate() {
        let res = &a.result;
        let (r, lo, hi) = (round4(res.r), round4(res.ci_lower), round4(res.ci_upper));
        let p_adj = sig4(a.p_adjusted);
        let y = top_m + (i as f64 + 0.5) * row_h;
        let (color, class) = sign_style(r);
        let label = format!("{} ~ {}", res.x_name, res.y_name);
        svg.text(label_w - 10.0, y + 4.0, Anchor::End, "label", &label);
        svg.line(x.map(lo), y, x.map(hi), y, &format!("whisker {class}"), color, 1.6);
        svg.line(
            x.map(lo),
            y - 4.0,
            x.map(lo),
            y + 4.0,
            &format!("cap {class}"),
            color,
            1.2,
        );
        svg.line(
            x.map(hi),
            y - 4.0,
            x.map(hi),
            y + 4.0,
            &format!("cap {class}"),
            color,
            1.2,
        );
        svg.circle(x.map(r), y, 4.0, &format!("point {class}"), color);
        let annot = format!("{} [{}, {}]  q = {}", num(r), num(lo), num(hi), num(p_adj));
        svg.text(label_w + plot_w + 12.0, y + 4.0, Anchor::Start, "annotation", &annot);
        data_rows.push(json!({
            "fundus": res.x_name,
            "lipid": res.y_name,
            "r": r,
            "ci_lower": lo,
            "ci_upper": hi,
            "p_adjusted": p_adj,
            "n": res.n_used,
        }));
    }
    svg.close_group();

    RenderedFigure {
        kind: spec.kind,
        svg: svg.finish(),
        data: json!({
            "title": spec.title,
            "ticks": tick_values,
            "rows": data_rows,
        }),
        warnings: Vec::new(),
    }
}
