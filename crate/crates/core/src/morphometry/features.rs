use serde::{Deserialize, Serialize};

use super::config::MorphometryConfig;
use super::metrics::{raster_average_width, raster_density, raster_fractal_dimension};
use super::raster::{Eye, SegmentationMask, VesselClass};
use super::segments::decompose_segments;
use super::skeleton::skeletonize;
use super::tortuosity::{distance_tortuosity, squared_curvature_tortuosity, tortuosity_density};
use super::MorphometryError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Metric {
    AverageWidth,
    VesselDensity,
    FractalDimension,
    DistanceTortuosity,
    SquaredCurvatureTortuosity,
    TortuosityDensity,
}

impl Metric {
    pub const ALL: [Metric; 6] = [
        Metric::AverageWidth,
        Metric::VesselDensity,
        Metric::FractalDimension,
        Metric::DistanceTortuosity,
        Metric::SquaredCurvatureTortuosity,
        Metric::TortuosityDensity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::AverageWidth => "average_width",
            Metric::VesselDensity => "vessel_density",
            Metric::FractalDimension => "fractal_dimension",
            Metric::DistanceTortuosity => "distance_tortuosity",
            Metric::SquaredCurvatureTortuosity => "squared_curvature_tortuosity",
            Metric::TortuosityDensity => "tortuosity_density",
        }
    }
}

/// One of the 18 (vessel class × metric) features.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FeatureId {
    pub class: VesselClass,
    pub metric: Metric,
}

pub const FEATURE_COUNT: usize = 18;

impl FeatureId {
    pub fn index(self) -> usize {
        let c = VesselClass::ALL.iter().position(|&c| c == self.class).unwrap();
        let m = Metric::ALL.iter().position(|&m| m == self.metric).unwrap();
        c * Metric::ALL.len() + m
    }

    pub fn from_index(i: usize) -> FeatureId {
        FeatureId {
            class: VesselClass::ALL[i / Metric::ALL.len()],
            metric: Metric::ALL[i % Metric::ALL.len()],
        }
    }

    /// Column name, e.g. `artery_average_width` or `fractal_dimension`.
    pub fn name(self) -> String {
        format!("{}{}", self.class.prefix(), self.metric.name())
    }

    pub fn parse(name: &str) -> Option<FeatureId> {
        let lower = name.trim().to_ascii_lowercase();
        (0..FEATURE_COUNT)
            .map(FeatureId::from_index)
            .find(|f| f.name() == lower)
    }
}

/// The 18 canonical feature column names in table order.
pub fn canonical_feature_names() -> Vec<String> {
    (0..FEATURE_COUNT).map(|i| FeatureId::from_index(i).name()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EyeTag {
    Single(Eye),
    BilateralAveraged,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvalidFeature {
    pub feature: String,
    pub reason: String,
}

/// Segment bookkeeping for one vessel class.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ClassDiagnostics {
    pub segments: usize,
    pub zero_chord: usize,
    pub too_short_for_curvature: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MorphometricFeatureSet {
    pub participant_id: String,
    pub eye: EyeTag,
    values: [Option<f64>; FEATURE_COUNT],
    pub invalid: Vec<InvalidFeature>,
    pub diagnostics: Vec<(VesselClass, ClassDiagnostics)>,
}

impl MorphometricFeatureSet {
    pub fn empty(participant_id: impl Into<String>, eye: EyeTag) -> Self {
        Self {
            participant_id: participant_id.into(),
            eye,
            values: [None; FEATURE_COUNT],
            invalid: Vec::new(),
            diagnostics: Vec::new(),
        }
    }

    pub fn get(&self, feature: FeatureId) -> Option<f64> {
        self.values[feature.index()]
    }

    pub fn get_by_name(&self, name: &str) -> Option<f64> {
        FeatureId::parse(name).and_then(|f| self.get(f))
    }

    pub fn set(&mut self, feature: FeatureId, value: Option<f64>) {
        self.values[feature.index()] = value;
    }

    pub fn values(&self) -> &[Option<f64>; FEATURE_COUNT] {
        &self.values
    }

    pub fn is_complete(&self) -> bool {
        self.values.iter().all(Option::is_some)
    }

    fn mark_invalid(&mut self, feature: FeatureId, reason: impl Into<String>) {
        self.values[feature.index()] = None;
        self.invalid.push(InvalidFeature {
            feature: feature.name(),
            reason: reason.into(),
        });
    }
}

/// Computes the 6 metrics for each of the 3 vessel classes.
///
/// A class whose raster is empty gets all 6 of its features marked invalid;
/// other classes are unaffected.
pub fn extract_features(mask: &SegmentationMask, config: &MorphometryConfig) -> MorphometricFeatureSet {
    let mut out = MorphometricFeatureSet::empty(mask.participant_id.clone(), EyeTag::Single(mask.eye));
    let params = config.curvature_params();
    for class in VesselClass::ALL {
        let id = |metric| FeatureId { class, metric };
        let raster = mask.class_raster(class);
        if raster.is_empty() {
            for metric in Metric::ALL {
                out.mark_invalid(id(metric), MorphometryError::EmptyVesselClass(Some(class)).to_string());
            }
            continue;
        }

        out.set(id(Metric::VesselDensity), Some(raster_density(&raster)));
        match raster_fractal_dimension(&raster, config.box_ladder_max_divisor) {
            Ok(v) => out.set(id(Metric::FractalDimension), Some(v)),
            Err(e) => out.mark_invalid(id(Metric::FractalDimension), e.to_string()),
        }
        match raster_average_width(&raster, config.width_scale_factor) {
            Ok(v) => out.set(id(Metric::AverageWidth), Some(v)),
            Err(e) => out.mark_invalid(id(Metric::AverageWidth), e.for_class(class).to_string()),
        }

        let skeleton = skeletonize(&raster);
        let segments = decompose_segments(&skeleton, config.min_segment_length_px);
        let mut diag = ClassDiagnostics {
            segments: segments.len(),
            ..Default::default()
        };
        let mut dist = WeightedMean::default();
        let mut hart = WeightedMean::default();
        let mut grisan = WeightedMean::default();
        for seg in &segments {
            let w = seg.arc_length();
            match distance_tortuosity(seg) {
                Ok(v) => dist.push(v, w),
                Err(_) => diag.zero_chord += 1,
            }
            match (
                squared_curvature_tortuosity(seg, &params, config.hart_normalization),
                tortuosity_density(seg, &params, config.grisan_variant),
            ) {
                (Ok(h), Ok(g)) => {
                    hart.push(h, w);
                    grisan.push(g, w);
                }
                _ => diag.too_short_for_curvature += 1,
            }
        }
        for (metric, acc) in [
            (Metric::DistanceTortuosity, dist),
            (Metric::SquaredCurvatureTortuosity, hart),
            (Metric::TortuosityDensity, grisan),
        ] {
            match acc.mean() {
                Some(v) => out.set(id(metric), Some(v)),
                None => out.mark_invalid(id(metric), "no qualifying centreline segments"),
            }
        }
        out.diagnostics.push((class, diag));
    }
    out
}

#[derive(Default)]
struct WeightedMean {
    sum: f64,
    weight: f64,
}

impl WeightedMean {
    fn push(&mut self, value: f64, weight: f64) {
        self.sum += value * weight;
        self.weight += weight;
    }

    fn mean(&self) -> Option<f64> {
        (self.weight > 0.0).then(|| self.sum / self.weight)
    }
}

/// Fieldwise mean over the available eyes. A feature missing in one eye takes
/// the other eye's value.
pub fn average_bilateral(
    left: Option<&MorphometricFeatureSet>,
    right: Option<&MorphometricFeatureSet>,
) -> Result<MorphometricFeatureSet, MorphometryError> {
    let eyes: Vec<&MorphometricFeatureSet> = left.into_iter().chain(right).collect();
    let first = eyes.first().ok_or(MorphometryError::NoEyesAvailable)?;
    if let Some(other) = eyes.iter().find(|e| e.participant_id != first.participant_id) {
        return Err(MorphometryError::ParticipantMismatch {
            left: first.participant_id.clone(),
            right: other.participant_id.clone(),
        });
    }
    let mut out = MorphometricFeatureSet::empty(first.participant_id.clone(), EyeTag::BilateralAveraged);
    for i in 0..FEATURE_COUNT {
        let present: Vec<f64> = eyes.iter().filter_map(|e| e.values[i]).collect();
        if present.is_empty() {
            let reason = eyes
                .iter()
                .flat_map(|e| e.invalid.iter())
                .find(|f| f.feature == FeatureId::from_index(i).name())
                .map(|f| f.reason.clone())
                .unwrap_or_else(|| "missing in every eye".to_string());
            out.mark_invalid(FeatureId::from_index(i), reason);
        } else {
            out.values[i] = Some(present.iter().sum::<f64>() / present.len() as f64);
        }
    }
    Ok(out)
}
