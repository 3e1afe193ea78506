use super::raster::{BitRaster, SegmentationMask, VesselClass};
use super::segments::total_arc_length;
use super::skeleton::skeletonize;
use super::MorphometryError;

/// Foreground fraction of the class raster.
pub fn vessel_density(mask: &SegmentationMask, class: VesselClass) -> f64 {
    raster_density(&mask.class_raster(class))
}

pub fn raster_density(raster: &BitRaster) -> f64 {
    raster.count_ones() as f64 / raster.len() as f64
}

/// Vessel pixel count divided by skeleton length, times `scale`.
pub fn average_width(mask: &SegmentationMask, class: VesselClass, scale: f64) -> Result<f64, MorphometryError> {
    raster_average_width(&mask.class_raster(class), scale).map_err(|e| e.for_class(class))
}

pub fn raster_average_width(raster: &BitRaster, scale: f64) -> Result<f64, MorphometryError> {
    let area = raster.count_ones();
    if area == 0 {
        return Err(MorphometryError::EmptyVesselClass(None));
    }
    let length = total_arc_length(&skeletonize(raster));
    if length <= 0.0 {
        return Err(MorphometryError::EmptyVesselClass(None));
    }
    Ok(area as f64 / length * scale)
}

/// Dyadic box sizes 2, 4, 8, … up to `min(W, H) / max_divisor`.
pub fn box_ladder(width: usize, height: usize, max_divisor: usize) -> Vec<usize> {
    let limit = width.min(height) / max_divisor.max(1);
    std::iter::successors(Some(2usize), |&e| e.checked_mul(2))
        .take_while(|&e| e <= limit)
        .collect()
}

/// Number of origin-anchored `size`×`size` boxes holding any foreground.
/// Partial boxes at the right and bottom edges count.
pub fn occupied_boxes(raster: &BitRaster, size: usize) -> usize {
    let cols = raster.width().div_ceil(size);
    let rows = raster.height().div_ceil(size);
    let mut occupied = vec![false; cols * rows];
    for (x, y) in raster.foreground() {
        occupied[(y / size) * cols + x / size] = true;
    }
    occupied.iter().filter(|&&b| b).count()
}

/// Box-counting (Minkowski–Bouligand) dimension of the class raster.
pub fn fractal_dimension(
    mask: &SegmentationMask,
    class: VesselClass,
    max_divisor: usize,
) -> Result<f64, MorphometryError> {
    raster_fractal_dimension(&mask.class_raster(class), max_divisor).map_err(|e| e.for_class(class))
}

pub fn raster_fractal_dimension(raster: &BitRaster, max_divisor: usize) -> Result<f64, MorphometryError> {
    if raster.is_empty() {
        return Err(MorphometryError::EmptyVesselClass(None));
    }
    let ladder = box_ladder(raster.width(), raster.height(), max_divisor);
    if ladder.len() < 3 {
        return Err(MorphometryError::DegenerateLadder { sizes: ladder.len() });
    }
    let points: Vec<(f64, f64)> = ladder
        .iter()
        .map(|&e| ((1.0 / e as f64).ln(), (occupied_boxes(raster, e) as f64).ln()))
        .collect();
    Ok(ols_slope(&points).clamp(0.0, 2.0))
}

fn ols_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}
