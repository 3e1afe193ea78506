use std::collections::{BTreeMap, HashMap};

use serde_json::json;

use super::svg::{num, round4, sig4, sign_style, Anchor, Svg, GRID, INK};
use super::{PlotSpec, RenderedFigure, ReportError, ReportWarning};
use crate::stats::AdjustedResultSet;

fn round2(v: f64) -> f64 {
    (v * 100.0).round() / 100.0
}

/// Default grid axes: the `n_fundus` features with the most significant lipid
/// partners, then the `n_lipid` lipids most often significant against those
/// features (ties by largest |r|, then name).
pub fn bubble_axes(set: &AdjustedResultSet, n_fundus: usize, n_lipid: usize) -> (Vec<String>, Vec<String>) {
    let mut count: BTreeMap<&str, usize> = BTreeMap::new();
    for r in &set.results {
        count.entry(r.x_name.as_str()).or_default();
    }
    for i in set.significant_indices() {
        *count.get_mut(set.results[i].x_name.as_str()).expect("inserted") += 1;
    }
    let mut fundus: Vec<(&str, usize)> = count.into_iter().collect();
    fundus.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
    let fundus: Vec<String> = fundus.into_iter().take(n_fundus).map(|(n, _)| n.to_string()).collect();

    let mut lipid: BTreeMap<&str, (usize, f64)> = BTreeMap::new();
    for (i, r) in set.results.iter().enumerate() {
        if !fundus.contains(&r.x_name) {
            continue;
        }
        let e = lipid.entry(r.y_name.as_str()).or_insert((0, 0.0));
        e.0 += usize::from(set.significant[i]);
        e.1 = e.1.max(r.r.abs());
    }
    let mut lipid: Vec<(&str, (usize, f64))> = lipid.into_iter().collect();
    lipid.sort_by(|a, b| b.1 .0.cmp(&a.1 .0).then(b.1 .1.total_cmp(&a.1 .1)).then(a.0.cmp(b.0)));
    let lipids = lipid.into_iter().take(n_lipid).map(|(n, _)| n.to_string()).collect();
    (fundus, lipids)
}

/// Lipids as rows, fundus features as columns, in the order given. Dot radius
/// grows linearly with |r| from `min_radius` (r = 0) to `max_radius` (largest
/// |r| in the grid); significant cells carry an asterisk.
pub fn render_bubble(
    set: &AdjustedResultSet,
    fundus: &[String],
    lipids: &[String],
    spec: &PlotSpec,
) -> Result<RenderedFigure, ReportError> {
    if fundus.is_empty() {
        return Err(ReportError::EmptyAxis("fundus"));
    }
    if lipids.is_empty() {
        return Err(ReportError::EmptyAxis("lipid"));
    }
    let lookup: HashMap<(&str, &str), usize> = set
        .results
        .iter()
        .enumerate()
        .map(|(i, r)| ((r.x_name.as_str(), r.y_name.as_str()), i))
        .collect();

    let mut warnings = Vec::new();
    let mut cells: Vec<Option<usize>> = Vec::with_capacity(fundus.len() * lipids.len());
    for l in lipids {
        for f in fundus {
            let hit = lookup.get(&(f.as_str(), l.as_str())).copied();
            if hit.is_none() {
                warnings.push(ReportWarning::MissingCell {
                    fundus: f.clone(),
                    lipid: l.clone(),
                });
            }
            cells.push(hit);
        }
    }
    let r_ref = cells
        .iter()
        .flatten()
        .map(|&i| round4(set.results[i].r).abs())
        .fold(0.0, f64::max);
    let r_ref = if r_ref > 0.0 { r_ref } else { 1.0 };
    let radius = |r: f64| spec.min_radius + (spec.max_radius - spec.min_radius) * r.abs() / r_ref;

    let cell = 2.0 * spec.max_radius + 8.0;
    let (left, top) = (230.0, 200.0);
    let legend_w = 180.0;
    let width = if spec.width > 0.0 {
        spec.width
    } else {
        left + fundus.len() as f64 * cell + legend_w
    };
    let grid_h = lipids.len() as f64 * cell;
    let height = (top + grid_h + 40.0).max(top + 200.0);
    let mut svg = Svg::new(width, height, &spec.title);

    svg.open_group("column-labels");
    for (j, f) in fundus.iter().enumerate() {
        svg.vertical_text(left + (j as f64 + 0.5) * cell + 4.0, top - 8.0, "label", f);
    }
    svg.close_group();
    svg.open_group("row-labels");
    for (i, l) in lipids.iter().enumerate() {
        svg.text(left - 8.0, top + (i as f64 + 0.5) * cell + 4.0, Anchor::End, "label", l);
    }
    svg.close_group();
    svg.outline_rect(left, top, fundus.len() as f64 * cell, grid_h, "frame", GRID);

    let mut data_cells = Vec::new();
    svg.open_group("cells");
    for (k, hit) in cells.iter().enumerate() {
        let (i, j) = (k / fundus.len(), k % fundus.len());
        let Some(idx) = *hit else { continue };
        let res = &set.results[idx];
        let r = round4(res.r);
        let (cx, cy) = (left + (j as f64 + 0.5) * cell, top + (i as f64 + 0.5) * cell);
        let rad = round2(radius(r));
        let (fill, class) = sign_style(r);
        svg.circle(cx, cy, rad, &format!("dot {class}"), fill);
        if set.significant[idx] {
            svg.text(cx + rad * 0.6, cy - rad * 0.4, Anchor::Start, "sig", "*");
        }
        data_cells.push(json!({
            "fundus": res.x_name,
            "lipid": res.y_name,
            "r": r,
            "p_adjusted": sig4(set.p_adjusted[idx]),
            "significant": set.significant[idx],
            "radius": rad,
        }));
    }
    svg.close_group();

    let lx = left + fundus.len() as f64 * cell + 30.0;
    let legend_r: Vec<f64> = vec![round4(r_ref), round4(r_ref / 2.0)];
    svg.open_group("legend");
    svg.text(lx, top + 4.0, Anchor::Start, "legend-title", "|r|");
    for (k, &r) in legend_r.iter().enumerate() {
        let y = top + 24.0 + k as f64 * (cell + 6.0);
        svg.circle(lx + spec.max_radius, y, round2(radius(r)), "legend-dot", INK);
        svg.text(
            lx + 2.0 * spec.max_radius + 8.0,
            y + 4.0,
            Anchor::Start,
            "legend-label",
            &num(r),
        );
    }
    let y0 = top + 40.0 + 2.0 * (cell + 6.0);
    for (k, (label, r)) in [("r < 0", -1.0), ("r \u{2265} 0", 1.0)].iter().enumerate() {
        let (fill, class) = sign_style(*r);
        let y = y0 + k as f64 * 20.0;
        svg.circle(lx + spec.max_radius, y, 6.0, &format!("legend-swatch {class}"), fill);
        svg.text(
            lx + 2.0 * spec.max_radius + 8.0,
            y + 4.0,
            Anchor::Start,
            "legend-label",
            label,
        );
    }
    svg.text(lx + spec.max_radius, y0 + 48.0, Anchor::Middle, "legend-sig", "*");
    svg.text(
        lx + 2.0 * spec.max_radius + 8.0,
        y0 + 48.0,
        Anchor::Start,
        "legend-label",
        "FDR-significant",
    );
    svg.close_group();

    let data = json!({
        "title": spec.title,
        "columns": fundus,
        "rows": lipids,
        "r_scale": round4(r_ref),
        "min_radius": spec.min_radius,
        "max_radius": spec.max_radius,
        "legend_r": legend_r,
        "cells": data_cells,
    });
    Ok(RenderedFigure {
        kind: spec.kind,
        svg: svg.finish(),
        data,
        warnings,
    })
}
