//! Per-segment tortuosity measures.
//!
//! Curvature is estimated on a resampled, Gaussian-smoothed copy of the
//! segment: the polyline is resampled to (near) unit arc-length spacing,
//! x(s) and y(s) are smoothed independently, and κ comes from central
//! differences. Samples whose smoothing window would run past either end are
//! not evaluated; their curvature is held at the nearest evaluated value.

use serde::{Deserialize, Serialize};

use super::segments::{CenterlineSegment, Point};
use super::MorphometryError;

/// Minimum number of resampled points needed for a curvature estimate.
pub const MIN_CURVATURE_SAMPLES: usize = 7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum GrisanVariant {
    /// τ = ((N−1)/N) · (1/L) · Σ (Lᵢ/Cᵢ − 1)
    #[default]
    InflectionFraction,
    /// τ = ((N−1)/L) · Σ (Lᵢ/Cᵢ − 1)
    InflectionCount,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum HartNormalization {
    /// ∫κ² ds divided by arc length.
    #[default]
    PerLength,
    /// ∫κ² ds.
    RawIntegral,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvatureParams {
    pub sigma_samples: f64,
    /// |κ| at or below this is treated as zero when looking for inflections.
    pub inflection_threshold: f64,
}

impl Default for CurvatureParams {
    fn default() -> Self {
        Self {
            sigma_samples: 2.0,
            inflection_threshold: 1e-3,
        }
    }
}

/// Arc length over chord length.
pub fn distance_tortuosity(segment: &CenterlineSegment) -> Result<f64, MorphometryError> {
    let chord = segment.chord_length();
    if chord <= f64::EPSILON * segment.arc_length().max(1.0) {
        return Err(MorphometryError::ZeroChord);
    }
    Ok(segment.arc_length() / chord)
}

/// Resampled polyline with its signed curvature profile.
#[derive(Debug, Clone)]
pub struct CurvatureProfile {
    /// Resampled (unsmoothed) points, evenly spaced in arc length.
    pub samples: Vec<Point>,
    /// Spacing between consecutive samples along the original polyline.
    pub step: f64,
    /// Signed curvature per sample.
    pub curvature: Vec<f64>,
}

impl CurvatureProfile {
    pub fn compute(segment: &CenterlineSegment, params: &CurvatureParams) -> Result<Self, MorphometryError> {
        let length = segment.arc_length();
        let n = length.round() as usize + 1;
        if n < MIN_CURVATURE_SAMPLES {
            return Err(MorphometryError::TooShortForCurvature { samples: n });
        }
        let samples = resample(segment.points(), n);
        let step = length / (n - 1) as f64;

        let wanted = (3.0 * params.sigma_samples).ceil().max(0.0) as usize;
        let radius = wanted.min((n - 3) / 2);
        let kernel = gaussian_kernel(params.sigma_samples, radius);
        let xs: Vec<f64> = samples.iter().map(|p| p.x).collect();
        let ys: Vec<f64> = samples.iter().map(|p| p.y).collect();
        let sx = convolve_truncated(&xs, &kernel);
        let sy = convolve_truncated(&ys, &kernel);

        let first = radius + 1;
        let last = n - 2 - radius;
        let mut curvature = vec![0.0; n];
        for i in first..=last {
            let dx = (sx[i + 1] - sx[i - 1]) / (2.0 * step);
            let dy = (sy[i + 1] - sy[i - 1]) / (2.0 * step);
            let ddx = (sx[i + 1] - 2.0 * sx[i] + sx[i - 1]) / (step * step);
            let ddy = (sy[i + 1] - 2.0 * sy[i] + sy[i - 1]) / (step * step);
            let speed2 = dx * dx + dy * dy;
            curvature[i] = if speed2 > 0.0 {
                (dx * ddy - dy * ddx) / speed2.powf(1.5)
            } else {
                0.0
            };
        }
        for i in 0..first {
            curvature[i] = curvature[first];
        }
        for i in last + 1..n {
            curvature[i] = curvature[last];
        }
        Ok(Self {
            samples,
            step,
            curvature,
        })
    }

    /// Trapezoidal ∫κ² ds over the whole segment.
    pub fn squared_curvature_integral(&self) -> f64 {
        let k2: Vec<f64> = self.curvature.iter().map(|k| k * k).collect();
        k2.windows(2).map(|w| 0.5 * (w[0] + w[1]) * self.step).sum()
    }

    /// Sample indices splitting the segment into runs of constant curvature
    /// sign, including both ends.
    pub fn inflection_boundaries(&self, threshold: f64) -> Vec<usize> {
        let mut bounds = vec![0];
        let mut last: Option<(usize, f64)> = None;
        for (i, &k) in self.curvature.iter().enumerate() {
            if k.abs() <= threshold {
                continue;
            }
            let sign = k.signum();
            if let Some((j, s)) = last {
                if s != sign {
                    bounds.push((i + j).div_ceil(2));
                }
            }
            last = Some((i, sign));
        }
        bounds.push(self.samples.len() - 1);
        bounds.dedup();
        bounds
    }
}

/// `n` points evenly spaced by arc length along `points`.
fn resample(points: &[Point], n: usize) -> Vec<Point> {
    let mut cumulative = Vec::with_capacity(points.len());
    let mut acc = 0.0;
    cumulative.push(0.0);
    for w in points.windows(2) {
        acc += w[0].distance(w[1]);
        cumulative.push(acc);
    }
    let total = acc;
    let mut out = Vec::with_capacity(n);
    let mut seg = 0;
    for j in 0..n {
        let target = if j == n - 1 {
            total
        } else {
            total * j as f64 / (n - 1) as f64
        };
        while seg + 1 < points.len() - 1 && cumulative[seg + 1] < target {
            seg += 1;
        }
        let span = cumulative[seg + 1] - cumulative[seg];
        let t = if span > 0.0 {
            ((target - cumulative[seg]) / span).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let (a, b) = (points[seg], points[seg + 1]);
        out.push(Point::new(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)));
    }
    out
}

fn gaussian_kernel(sigma: f64, radius: usize) -> Vec<f64> {
    if sigma <= 0.0 || radius == 0 {
        return vec![1.0];
    }
    let raw: Vec<f64> = (0..=2 * radius)
        .map(|i| {
            let d = i as f64 - radius as f64;
            (-0.5 * d * d / (sigma * sigma)).exp()
        })
        .collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

/// Convolution with weights renormalised where the window leaves the signal.
fn convolve_truncated(signal: &[f64], kernel: &[f64]) -> Vec<f64> {
    let radius = kernel.len() / 2;
    let n = signal.len() as isize;
    (0..signal.len())
        .map(|i| {
            let mut acc = 0.0;
            let mut weight = 0.0;
            for (k, &w) in kernel.iter().enumerate() {
                let j = i as isize + k as isize - radius as isize;
                if (0..n).contains(&j) {
                    acc += w * signal[j as usize];
                    weight += w;
                }
            }
            acc / weight
        })
        .collect()
}

/// Squared-curvature tortuosity (Hart).
pub fn squared_curvature_tortuosity(
    segment: &CenterlineSegment,
    params: &CurvatureParams,
    normalization: HartNormalization,
) -> Result<f64, MorphometryError> {
    let profile = CurvatureProfile::compute(segment, params)?;
    let integral = profile.squared_curvature_integral();
    Ok(match normalization {
        HartNormalization::PerLength => integral / segment.arc_length(),
        HartNormalization::RawIntegral => integral,
    })
}

/// Inflection-based tortuosity density (Grisan).
pub fn tortuosity_density(
    segment: &CenterlineSegment,
    params: &CurvatureParams,
    variant: GrisanVariant,
) -> Result<f64, MorphometryError> {
    let profile = CurvatureProfile::compute(segment, params)?;
    let bounds = profile.inflection_boundaries(params.inflection_threshold);
    let pieces = bounds.len() - 1;
    if pieces <= 1 {
        return Ok(0.0);
    }
    let mut total_arc = 0.0;
    let mut sum = 0.0;
    for w in bounds.windows(2) {
        let run = &profile.samples[w[0]..=w[1]];
        let arc: f64 = run.windows(2).map(|p| p[0].distance(p[1])).sum();
        let chord = run[0].distance(run[run.len() - 1]);
        total_arc += arc;
        if chord > 0.0 {
            sum += arc / chord - 1.0;
        }
    }
    let n = pieces as f64;
    Ok(match variant {
        GrisanVariant::InflectionFraction => (n - 1.0) / n / total_arc * sum,
        GrisanVariant::InflectionCount => (n - 1.0) / total_arc * sum,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn segment(points: Vec<(f64, f64)>) -> CenterlineSegment {
        CenterlineSegment::from_points(points.into_iter().map(|(x, y)| Point::new(x, y)).collect()).unwrap()
    }

    fn arc(radius: f64, sweep: f64, steps: usize) -> CenterlineSegment {
        segment(
            (0..=steps)
                .map(|i| {
                    let t = sweep * i as f64 / steps as f64;
                    (radius * t.cos(), radius * t.sin())
                })
                .collect(),
        )
    }

    #[test]
    fn straight_is_one() {
        let s = segment((0..40).map(|i| (i as f64, 3.0)).collect());
        assert_eq!(distance_tortuosity(&s).unwrap(), 1.0);
        for slope in [0.5, -1.7, 1e-3] {
            let s = segment(
                (0..=80)
                    .map(|i| (0.37 * i as f64, slope * 0.37 * i as f64 + 2.0))
                    .collect(),
            );
            assert_eq!(distance_tortuosity(&s).unwrap(), 1.0, "slope {slope}");
        }
        let back = segment(vec![(0.0, 0.0), (4.0, 0.0), (2.0, 0.0), (6.0, 0.0)]);
        assert_eq!(distance_tortuosity(&back).unwrap(), 10.0 / 6.0);
    }

    #[test]
    fn closed_loop_has_zero_chord() {
        let s = segment(vec![(0.0, 0.0), (5.0, 0.0), (5.0, 5.0), (0.0, 0.0)]);
        assert!(matches!(distance_tortuosity(&s), Err(MorphometryError::ZeroChord)));
    }

    #[test]
    fn semicircle_is_half_pi() {
        let t = distance_tortuosity(&arc(100.0, PI, 2000)).unwrap();
        assert!((t - PI / 2.0).abs() < 0.01, "{t}");
    }

    #[test]
    fn straight_has_no_curvature() {
        let s = segment((0..60).map(|i| (i as f64 * 0.8, i as f64 * 0.6)).collect());
        let p = CurvatureParams::default();
        assert!(squared_curvature_tortuosity(&s, &p, HartNormalization::PerLength).unwrap() < 1e-6);
        assert_eq!(
            tortuosity_density(&s, &p, GrisanVariant::InflectionFraction).unwrap(),
            0.0
        );
    }

    #[test]
    fn quarter_circle_hart() {
        let r = 50.0;
        let v = squared_curvature_tortuosity(
            &arc(r, PI / 2.0, 400),
            &CurvatureParams::default(),
            HartNormalization::PerLength,
        )
        .unwrap();
        let expect = 1.0 / (r * r);
        assert!((v - expect).abs() / expect < 0.10, "{v} vs {expect}");
    }

    #[test]
    fn single_arc_has_zero_density() {
        let v = tortuosity_density(
            &arc(50.0, PI / 2.0, 400),
            &CurvatureParams::default(),
            GrisanVariant::InflectionFraction,
        )
        .unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn too_short_segment() {
        let s = segment(vec![(0.0, 0.0), (2.0, 0.0), (4.0, 1.0)]);
        assert!(matches!(
            squared_curvature_tortuosity(&s, &CurvatureParams::default(), HartNormalization::PerLength),
            Err(MorphometryError::TooShortForCurvature { .. })
        ));
    }

    #[test]
    fn raw_integral_is_per_length_times_length() {
        let s = arc(40.0, PI / 2.0, 300);
        let p = CurvatureParams::default();
        let a = squared_curvature_tortuosity(&s, &p, HartNormalization::PerLength).unwrap();
        let b = squared_curvature_tortuosity(&s, &p, HartNormalization::RawIntegral).unwrap();
        assert!((a * s.arc_length() - b).abs() < 1e-12);
    }

    #[test]
    fn resample_hits_both_ends() {
        let pts = vec![Point::new(0.0, 0.0), Point::new(3.0, 0.0), Point::new(3.0, 4.0)];
        let r = resample(&pts, 8);
        assert_eq!(r[0], pts[0]);
        assert_eq!(r[7], pts[2]);
        assert!((r[3].x - 3.0).abs() < 1e-12);
    }
}
