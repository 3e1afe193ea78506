use serde_json::{json, Value};

use super::distribution::{age_bins, box_summary, gaussian_kde, quantile_sorted, silverman_bandwidth, sorted_finite};
use super::svg::{num, round4, sig4, ticks, Anchor, Scale, Svg, GRID, INK};
use super::{PlotSpec, RenderedFigure, ReportWarning};
use crate::cohort::{Column, FundusFeatureTable, MergedCohort, Sex};
use crate::pipeline::{DemographicProfile, FeatureProfile};
use crate::stats::CorrelationResult;

const BAND: &str = "#7f9cc4";
const MALE: &str = "#5b8db8";
const FEMALE: &str = "#c9736f";

/// Age, sex and fundus columns, the part of a cohort the panels draw from.
#[derive(Debug, Clone, PartialEq)]
pub struct CohortView {
    pub age: Vec<Option<f64>>,
    pub sex: Vec<Option<Sex>>,
    pub fundus: Vec<Column>,
}

impl From<&MergedCohort> for CohortView {
    fn from(c: &MergedCohort) -> Self {
        Self {
            age: c.age.clone(),
            sex: c.sex.clone(),
            fundus: c.fundus.clone(),
        }
    }
}

impl From<&FundusFeatureTable> for CohortView {
    fn from(t: &FundusFeatureTable) -> Self {
        Self {
            age: t.rows.iter().map(|r| r.record.age).collect(),
            sex: t.rows.iter().map(|r| r.record.sex).collect(),
            fundus: t.columns(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DemographicOptions {
    /// Panels to draw, in order; all profiled features when `None`.
    pub features: Option<Vec<String>>,
    pub bin_width: f64,
    pub min_bin_rows: usize,
    /// Adds an age density curve per sex (Gaussian KDE, Silverman bandwidth).
    pub age_density: bool,
    pub columns: usize,
}

impl Default for DemographicOptions {
    fn default() -> Self {
        Self {
            features: None,
            bin_width: 5.0,
            min_bin_rows: 20,
            age_density: false,
            columns: 3,
        }
    }
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    let span = hi - lo;
    if span > 0.0 {
        (lo - 0.05 * span, hi + 0.05 * span)
    } else {
        let d = lo.abs().max(1.0) * 0.05;
        (lo - d, hi + d)
    }
}

fn association_json(r: &CorrelationResult, p_adj: f64) -> Value {
    json!({
        "r": round4(r.r),
        "ci_lower": round4(r.ci_lower),
        "ci_upper": round4(r.ci_upper),
        "p_adjusted": sig4(p_adj),
        "n": r.n_used,
    })
}

fn annotation(label: &str, r: &CorrelationResult, p_adj: f64) -> String {
    format!(
        "{label} r = {} [{}, {}], q = {}",
        num(round4(r.r)),
        num(round4(r.ci_lower)),
        num(round4(r.ci_upper)),
        num(sig4(p_adj))
    )
}

const PANEL_W: f64 = 370.0;
const PANEL_H: f64 = 270.0;

/// Per feature: 10th/50th/90th percentile band over 5-year age bins, male and
/// female box summaries (whiskers at 1.5 IQR), and the age and sex partial
/// correlations from the profile.
pub fn render_demographic_panels(
    profile: &DemographicProfile,
    cohort: &CohortView,
    spec: &PlotSpec,
    options: &DemographicOptions,
) -> RenderedFigure {
    let chosen: Vec<&FeatureProfile> = match &options.features {
        Some(names) => names.iter().filter_map(|n| profile.get(n)).collect(),
        None => profile.features.iter().collect(),
    };
    let cols = options.columns.max(1);
    let rows = chosen.len().div_ceil(cols).max(1);
    let width = spec.width.max(cols as f64 * PANEL_W + 20.0);
    let height = 50.0 + rows as f64 * PANEL_H;
    let mut svg = Svg::new(width, height, &spec.title);
    let mut warnings = Vec::new();
    let mut panels = Vec::with_capacity(chosen.len());

    for (k, fp) in chosen.iter().enumerate() {
        let Some(col) = cohort.fundus.iter().find(|c| c.name == fp.feature) else {
            continue;
        };
        let (px, py) = (10.0 + (k % cols) as f64 * PANEL_W, 40.0 + (k / cols) as f64 * PANEL_H);
        svg.open_group_at("panel", px, py);
        let panel = draw_panel(&mut svg, fp, col, cohort, options, &mut warnings);
        svg.close_group();
        panels.push(panel);
    }

    RenderedFigure {
        kind: spec.kind,
        svg: svg.finish(),
        data: json!({
            "title": spec.title,
            "quantile_rule": "linear interpolation between order statistics",
            "bin_width": options.bin_width,
            "min_bin_rows": options.min_bin_rows,
            "panels": panels,
        }),
        warnings,
    }
}

fn draw_panel(
    svg: &mut Svg,
    fp: &FeatureProfile,
    col: &Column,
    cohort: &CohortView,
    options: &DemographicOptions,
    warnings: &mut Vec<ReportWarning>,
) -> Value {
    svg.text(8.0, 14.0, Anchor::Start, "panel-title", &fp.feature);
    svg.text(
        8.0,
        30.0,
        Anchor::Start,
        "annotation",
        &annotation("age", &fp.age, fp.age_p_adjusted),
    );
    svg.text(
        8.0,
        44.0,
        Anchor::Start,
        "annotation",
        &annotation("sex", &fp.sex, fp.sex_p_adjusted),
    );

    // Age trend.
    let pairs: Vec<(usize, f64)> = (0..col.values.len())
        .filter_map(|i| match (cohort.age[i], col.values[i]) {
            (Some(a), Some(v)) if a.is_finite() && v.is_finite() => Some((i, a)),
            _ => None,
        })
        .collect();
    let (bins, merged) = age_bins(&pairs, options.bin_width, options.min_bin_rows);
    warnings.extend(merged.iter().map(|m| ReportWarning::BinTooSmall {
        feature: fp.feature.clone(),
        start: m.start,
        end: m.end,
        rows: m.rows,
    }));
    let bin_stats: Vec<(f64, f64, usize, [f64; 3])> = bins
        .iter()
        .map(|b| {
            let v = sorted_finite(b.rows.iter().filter_map(|&i| col.values[i]));
            let q = [0.1, 0.5, 0.9].map(|p| sig4(quantile_sorted(&v, p).expect("bins are non-empty")));
            (b.start, b.end, v.len(), q)
        })
        .collect();

    let (tx0, tx1, ty0, ty1) = (44.0, 232.0, 62.0, 228.0);
    let mut bins_json = Vec::new();
    let mut trend_ticks = Vec::new();
    if let (Some(first), Some(last)) = (bin_stats.first(), bin_stats.last()) {
        let lo = bin_stats.iter().map(|b| b.3[0]).fold(f64::INFINITY, f64::min);
        let hi = bin_stats.iter().map(|b| b.3[2]).fold(f64::NEG_INFINITY, f64::max);
        let (lo, hi) = padded(lo, hi);
        let x = Scale::new((first.0, last.1), (tx0, tx1));
        let y = Scale::new((lo, hi), (ty1, ty0));
        svg.outline_rect(tx0, ty0, tx1 - tx0, ty1 - ty0, "frame", GRID);
        trend_ticks = ticks(lo, hi, 4);
        for &t in &trend_ticks {
            svg.text(tx0 - 4.0, y.map(t) + 3.0, Anchor::End, "tick", &num(t));
        }
        let mids: Vec<f64> = bin_stats.iter().map(|b| x.map((b.0 + b.1) / 2.0)).collect();
        let mut band: Vec<(f64, f64)> = mids.iter().zip(&bin_stats).map(|(&m, b)| (m, y.map(b.3[2]))).collect();
        band.extend(mids.iter().zip(&bin_stats).rev().map(|(&m, b)| (m, y.map(b.3[0]))));
        svg.polygon(&band, "band", BAND, 0.35);
        let median: Vec<(f64, f64)> = mids.iter().zip(&bin_stats).map(|(&m, b)| (m, y.map(b.3[1]))).collect();
        svg.polyline(&median, "median", INK, 1.5);
        let mut edges: Vec<f64> = bin_stats.iter().map(|b| b.0).collect();
        edges.push(last.1);
        for &e in &edges {
            svg.text(x.map(e), ty1 + 14.0, Anchor::Middle, "tick", &num(e));
        }
        svg.text(
            (tx0 + tx1) / 2.0,
            ty1 + 28.0,
            Anchor::Middle,
            "axis-label",
            "age (years)",
        );
        for b in &bin_stats {
            bins_json.push(json!({"start": b.0, "end": b.1, "n": b.2, "p10": b.3[0], "p50": b.3[1], "p90": b.3[2]}));
        }

        if options.age_density {
            draw_age_density(svg, cohort, &pairs, &x, ty1);
        }
    }

    // Sex boxes.
    let by_sex = |s: Sex| {
        sorted_finite(
            (0..col.values.len())
                .filter(|&i| cohort.sex[i] == Some(s))
                .filter_map(|i| col.values[i]),
        )
    };
    let boxes: Vec<(Sex, Option<super::BoxSummary>)> = [Sex::Male, Sex::Female]
        .into_iter()
        .map(|s| (s, box_summary(&by_sex(s))))
        .collect();
    let rounded = |b: &super::BoxSummary| super::BoxSummary {
        n: b.n,
        q1: sig4(b.q1),
        median: sig4(b.median),
        q3: sig4(b.q3),
        whisker_low: sig4(b.whisker_low),
        whisker_high: sig4(b.whisker_high),
        outliers: b.outliers,
    };
    let boxes: Vec<(Sex, Option<super::BoxSummary>)> =
        boxes.into_iter().map(|(s, b)| (s, b.as_ref().map(rounded))).collect();
    let (bx0, bx1) = (282.0, 362.0);
    let mut box_ticks = Vec::new();
    let present: Vec<&super::BoxSummary> = boxes.iter().filter_map(|(_, b)| b.as_ref()).collect();
    if !present.is_empty() {
        let lo = present.iter().map(|b| b.whisker_low).fold(f64::INFINITY, f64::min);
        let hi = present.iter().map(|b| b.whisker_high).fold(f64::NEG_INFINITY, f64::max);
        let (lo, hi) = padded(lo, hi);
        let y = Scale::new((lo, hi), (ty1, ty0));
        svg.outline_rect(bx0, ty0, bx1 - bx0, ty1 - ty0, "frame", GRID);
        box_ticks = ticks(lo, hi, 4);
        for &t in &box_ticks {
            svg.text(bx0 - 4.0, y.map(t) + 3.0, Anchor::End, "tick", &num(t));
        }
        for (j, (s, b)) in boxes.iter().enumerate() {
            let cx = bx0 + (j as f64 + 0.5) * (bx1 - bx0) / 2.0;
            let fill = if *s == Sex::Male { MALE } else { FEMALE };
            svg.text(cx, ty1 + 14.0, Anchor::Middle, "tick", s.label());
            let Some(b) = b else { continue };
            svg.line(cx, y.map(b.whisker_low), cx, y.map(b.q1), "whisker", INK, 1.0);
            svg.line(cx, y.map(b.q3), cx, y.map(b.whisker_high), "whisker", INK, 1.0);
            svg.rect(cx - 12.0, y.map(b.q3), 24.0, y.map(b.q1) - y.map(b.q3), "box", fill);
            svg.line(
                cx - 12.0,
                y.map(b.median),
                cx + 12.0,
                y.map(b.median),
                "box-median",
                INK,
                1.5,
            );
            svg.text(cx, ty1 + 28.0, Anchor::Middle, "tick", &format!("n={}", b.n));
        }
    }

    json!({
        "feature": fp.feature,
        "retained": fp.retained,
        "age": association_json(&fp.age, fp.age_p_adjusted),
        "sex": association_json(&fp.sex, fp.sex_p_adjusted),
        "bins": bins_json,
        "trend_ticks": trend_ticks,
        "boxes": boxes.iter().map(|(s, b)| json!({"sex": s.label(), "summary": b})).collect::<Vec<_>>(),
        "box_ticks": box_ticks,
    })
}

fn draw_age_density(svg: &mut Svg, cohort: &CohortView, pairs: &[(usize, f64)], x: &Scale, base: f64) {
    let grid: Vec<f64> = (0..=60).map(|i| x.d0 + (x.d1 - x.d0) * i as f64 / 60.0).collect();
    for (s, color) in [(Sex::Male, MALE), (Sex::Female, FEMALE)] {
        let ages = sorted_finite(pairs.iter().filter(|(i, _)| cohort.sex[*i] == Some(s)).map(|p| p.1));
        let Some(h) = silverman_bandwidth(&ages) else { continue };
        let dens = gaussian_kde(&ages, h, &grid);
        let peak = dens.iter().copied().fold(0.0, f64::max);
        if peak <= 0.0 {
            continue;
        }
        let pts: Vec<(f64, f64)> = grid
            .iter()
            .zip(&dens)
            .map(|(&g, &d)| (x.map(g), base - 30.0 * d / peak))
            .collect();
        svg.polyline(&pts, "age-density", color, 1.0);
    }
}
