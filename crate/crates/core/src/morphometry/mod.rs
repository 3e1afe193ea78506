//! Vessel morphometry from binary artery/vein masks.

use std::path::PathBuf;

use thiserror::Error;

pub mod config;
pub mod features;
pub mod io;
pub mod metrics;
pub mod raster;
pub mod segments;
pub mod skeleton;
pub mod synthetic;
pub mod tortuosity;

pub use config::{MaskLayout, MorphometryConfig};
pub use features::{
    average_bilateral, canonical_feature_names, extract_features, ClassDiagnostics, EyeTag, FeatureId, InvalidFeature,
    Metric, MorphometricFeatureSet, FEATURE_COUNT,
};
pub use metrics::{average_width, box_ladder, fractal_dimension, vessel_density};
pub use raster::{BitRaster, Eye, SegmentationMask, VesselClass};
pub use segments::{decompose_segments, CenterlineSegment, Point};
pub use skeleton::skeletonize;
pub use tortuosity::{
    distance_tortuosity, squared_curvature_tortuosity, tortuosity_density, CurvatureParams, GrisanVariant,
    HartNormalization,
};

#[derive(Debug, Error)]
pub enum MorphometryError {
    #[error("raster dimensions must be positive, got {width}x{height}")]
    InvalidDimensions { width: usize, height: usize },
    #[error("raster has {actual} cells, expected {expected}")]
    RasterSizeMismatch { expected: usize, actual: usize },
    #[error("{} vessel raster is empty", class_label(.0))]
    EmptyVesselClass(Option<VesselClass>),
    #[error("only {sizes} box sizes fit the raster, need at least 3")]
    DegenerateLadder { sizes: usize },
    #[error("segment endpoints coincide")]
    ZeroChord,
    #[error("segment has {samples} samples after resampling, need at least 7")]
    TooShortForCurvature { samples: usize },
    #[error("no eye available for bilateral averaging")]
    NoEyesAvailable,
    #[error("left eye belongs to {left}, right eye to {right}")]
    ParticipantMismatch { left: String, right: String },
    #[error("{}: {message}", .path.display())]
    Io { path: PathBuf, message: String },
    #[error("{}: {message}", .path.display())]
    Image { path: PathBuf, message: String },
}

fn class_label(class: &Option<VesselClass>) -> &'static str {
    match class {
        Some(VesselClass::Artery) => "artery",
        Some(VesselClass::Vein) => "vein",
        Some(VesselClass::Combined) => "combined",
        None => "class",
    }
}

impl MorphometryError {
    /// Attaches the vessel class to a class-agnostic empty-raster error.
    pub fn for_class(self, class: VesselClass) -> Self {
        match self {
            MorphometryError::EmptyVesselClass(None) => MorphometryError::EmptyVesselClass(Some(class)),
            other => other,
        }
    }
}
