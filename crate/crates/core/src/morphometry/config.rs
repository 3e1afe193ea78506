use serde::{Deserialize, Serialize};

use super::tortuosity::{CurvatureParams, GrisanVariant, HartNormalization};

/// How mask files are laid out on disk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MaskLayout {
    /// `<id>_<L|R>_artery.png` plus `<id>_<L|R>_vein.png`, 8-bit grey.
    #[default]
    Pair,
    /// `<id>_<L|R>.png` with artery and vein in separate colour channels.
    Combined,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MorphometryConfig {
    pub min_segment_length_px: f64,
    pub gaussian_sigma_samples: f64,
    pub box_ladder_max_divisor: usize,
    pub width_scale_factor: f64,
    pub grisan_variant: GrisanVariant,
    pub hart_normalization: HartNormalization,
    pub inflection_threshold: f64,
    pub mask_layout: MaskLayout,
    /// Channel index (0=R, 1=G, 2=B) holding arteries in combined masks.
    pub artery_channel: usize,
    /// Channel index holding veins in combined masks.
    pub vein_channel: usize,
}

impl Default for MorphometryConfig {
    fn default() -> Self {
        Self {
            min_segment_length_px: 10.0,
            gaussian_sigma_samples: 2.0,
            box_ladder_max_divisor: 4,
            width_scale_factor: 1.0,
            grisan_variant: GrisanVariant::InflectionFraction,
            hart_normalization: HartNormalization::PerLength,
            inflection_threshold: 1e-3,
            mask_layout: MaskLayout::Pair,
            artery_channel: 0,
            vein_channel: 2,
        }
    }
}

impl MorphometryConfig {
    pub fn curvature_params(&self) -> CurvatureParams {
        CurvatureParams {
            sigma_samples: self.gaussian_sigma_samples,
            inflection_threshold: self.inflection_threshold,
        }
    }
}
