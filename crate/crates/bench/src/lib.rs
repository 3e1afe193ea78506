//! Fixtures shared by the benchmarks.

use oculolipid::cohort::MergedCohort;
use oculolipid::morphometry::synthetic::{synthetic_mask, TreeParams};
use oculolipid::morphometry::{Eye, SegmentationMask};
use oculolipid::pipeline::{simulate_cohort, PlantedEffectSpec};

/// A square synthetic artery/vein mask of side `size`.
pub fn mask(size: usize, seed: u64) -> SegmentationMask {
    let params = TreeParams {
        width: size,
        height: size,
        branch_length: size as f64 * 0.2,
        ..TreeParams::default()
    };
    synthetic_mask("bench", Eye::Left, &params, seed).expect("valid tree parameters")
}

/// The default simulated cohort with `n` participants.
pub fn cohort(n: usize, seed: u64) -> MergedCohort {
    let spec = PlantedEffectSpec {
        n,
        ..PlantedEffectSpec::default()
    };
    simulate_cohort(&spec, seed).expect("default spec is valid")
}

/// Deterministic p-values in (0, 1].
pub fn p_values(m: usize) -> Vec<f64> {
    (0..m)
        .map(|i| ((i * 7919) % m + 1) as f64 / m as f64)
        .map(|u| u * u)
        .collect()
}
