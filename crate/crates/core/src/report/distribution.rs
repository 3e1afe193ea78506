//! Quantiles, box summaries, age binning and kernel density estimates.

use serde::{Deserialize, Serialize};

/// Quantile of sorted data by linear interpolation between order statistics
/// (position (n − 1)·p). `None` for empty input.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let h = (sorted.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    Some(sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo]))
}

pub fn sorted_finite(values: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.into_iter().filter(|x| x.is_finite()).collect();
    v.sort_by(f64::total_cmp);
    v
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxSummary {
    pub n: usize,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    /// Most extreme observations within 1.5 IQR of the box.
    pub whisker_low: f64,
    pub whisker_high: f64,
    pub outliers: usize,
}

pub fn box_summary(sorted: &[f64]) -> Option<BoxSummary> {
    let q1 = quantile_sorted(sorted, 0.25)?;
    let median = quantile_sorted(sorted, 0.5)?;
    let q3 = quantile_sorted(sorted, 0.75)?;
    let iqr = q3 - q1;
    let (lo_fence, hi_fence) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);
    let inside: Vec<f64> = sorted
        .iter()
        .copied()
        .filter(|v| *v >= lo_fence && *v <= hi_fence)
        .collect();
    Some(BoxSummary {
        n: sorted.len(),
        q1,
        median,
        q3,
        whisker_low: inside.first().copied().unwrap_or(q1),
        whisker_high: inside.last().copied().unwrap_or(q3),
        outliers: sorted.len() - inside.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgeBin {
    pub start: f64,
    pub end: f64,
    /// Row indices falling in `[start, end)`.
    pub rows: Vec<usize>,
}

/// A bin that held fewer than the minimum rows and was merged into a neighbour.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MergedBin {
    pub start: f64,
    pub end: f64,
    pub rows: usize,
}

/// Fixed-width age bins aligned to multiples of `width`. A bin with fewer than
/// `min_rows` rows is merged into the next bin (the previous one for the last bin)
/// until every bin qualifies or only one remains.
pub fn age_bins(ages: &[(usize, f64)], width: f64, min_rows: usize) -> (Vec<AgeBin>, Vec<MergedBin>) {
    if ages.is_empty() {
        return (Vec::new(), Vec::new());
    }
    let lo = ages.iter().map(|a| a.1).fold(f64::INFINITY, f64::min);
    let hi = ages.iter().map(|a| a.1).fold(f64::NEG_INFINITY, f64::max);
    let first = (lo / width).floor() as i64;
    let last = (hi / width).floor() as i64;
    let mut bins: Vec<AgeBin> = (first..=last)
        .map(|k| AgeBin {
            start: k as f64 * width,
            end: (k + 1) as f64 * width,
            rows: Vec::new(),
        })
        .collect();
    for &(row, age) in ages {
        let k = ((age / width).floor() as i64 - first) as usize;
        bins[k].rows.push(row);
    }
    let mut merged = Vec::new();
    while bins.len() > 1 {
        let Some(i) = bins.iter().position(|b| b.rows.len() < min_rows) else {
            break;
        };
        let small = bins.remove(i);
        merged.push(MergedBin {
            start: small.start,
            end: small.end,
            rows: small.rows.len(),
        });
        let target = if i < bins.len() { i } else { i - 1 };
        let t = &mut bins[target];
        t.start = t.start.min(small.start);
        t.end = t.end.max(small.end);
        t.rows.extend(small.rows);
        t.rows.sort_unstable();
    }
    (bins, merged)
}

/// Silverman's rule of thumb, 0.9·min(sd, IQR/1.34)·n^(−1/5).
pub fn silverman_bandwidth(sorted: &[f64]) -> Option<f64> {
    let n = sorted.len();
    if n < 2 {
        return None;
    }
    let mean = sorted.iter().sum::<f64>() / n as f64;
    let sd = (sorted.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
    let iqr = quantile_sorted(sorted, 0.75)? - quantile_sorted(sorted, 0.25)?;
    let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    (spread > 0.0).then(|| 0.9 * spread * (n as f64).powf(-0.2))
}

/// Gaussian kernel density estimate evaluated at `grid`.
pub fn gaussian_kde(values: &[f64], bandwidth: f64, grid: &[f64]) -> Vec<f64> {
    let norm = 1.0 / (values.len() as f64 * bandwidth * (2.0 * std::f64::consts::PI).sqrt());
    grid.iter()
        .map(|&g| {
            values
                .iter()
                .map(|&v| {
                    let u = (g - v) / bandwidth;
                    (-0.5 * u * u).exp()
                })
                .sum::<f64>()
                * norm
        })
        .collect()
}
