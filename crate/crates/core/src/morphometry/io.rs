//! Mask files on disk.
//!
//! Pair layout: `<participant_id>_<L|R>_<artery|vein>.png`, 8-bit greyscale,
//! any nonzero value is foreground. Combined layout: `<participant_id>_<L|R>.png`
//! with arteries and veins in two colour channels.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use image::{GrayImage, ImageReader, Luma};

use super::config::{MaskLayout, MorphometryConfig};
use super::raster::{BitRaster, Eye, SegmentationMask};
use super::MorphometryError;

#[derive(Debug, Default)]
pub struct MaskScan {
    pub masks: Vec<SegmentationMask>,
    /// Files or file groups that could not be turned into a mask.
    pub errors: Vec<(PathBuf, String)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Channel {
    Artery,
    Vein,
    Both,
}

fn parse_eye(code: &str) -> Option<Eye> {
    match code {
        "L" | "l" => Some(Eye::Left),
        "R" | "r" => Some(Eye::Right),
        _ => None,
    }
}

/// Splits a mask file stem into (participant id, eye, channel).
fn parse_stem(stem: &str, layout: MaskLayout) -> Option<(String, Eye, Channel)> {
    match layout {
        MaskLayout::Pair => {
            let mut parts = stem.rsplitn(3, '_');
            let channel = match parts.next()?.to_ascii_lowercase().as_str() {
                "artery" => Channel::Artery,
                "vein" => Channel::Vein,
                _ => return None,
            };
            let eye = parse_eye(parts.next()?)?;
            let id = parts.next().filter(|s| !s.is_empty())?;
            Some((id.to_string(), eye, channel))
        }
        MaskLayout::Combined => {
            let mut parts = stem.rsplitn(2, '_');
            let eye = parse_eye(parts.next()?)?;
            let id = parts.next().filter(|s| !s.is_empty())?;
            Some((id.to_string(), eye, Channel::Both))
        }
    }
}

fn image_error(path: &Path, e: impl std::fmt::Display) -> MorphometryError {
    MorphometryError::Image {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

pub fn load_gray_raster(path: &Path) -> Result<BitRaster, MorphometryError> {
    let img = ImageReader::open(path)
        .map_err(|e| image_error(path, e))?
        .with_guessed_format()
        .map_err(|e| image_error(path, e))?
        .decode()
        .map_err(|e| image_error(path, e))?
        .into_luma8();
    BitRaster::from_cells(
        img.width() as usize,
        img.height() as usize,
        img.pixels().map(|p| p.0[0] != 0).collect(),
    )
}

fn load_channels(path: &Path, artery: usize, vein: usize) -> Result<(BitRaster, BitRaster), MorphometryError> {
    if artery > 2 || vein > 2 {
        return Err(image_error(path, "channel index must be 0, 1 or 2"));
    }
    let img = ImageReader::open(path)
        .map_err(|e| image_error(path, e))?
        .with_guessed_format()
        .map_err(|e| image_error(path, e))?
        .decode()
        .map_err(|e| image_error(path, e))?
        .into_rgb8();
    let (w, h) = (img.width() as usize, img.height() as usize);
    let a = BitRaster::from_cells(w, h, img.pixels().map(|p| p.0[artery] != 0).collect())?;
    let v = BitRaster::from_cells(w, h, img.pixels().map(|p| p.0[vein] != 0).collect())?;
    Ok((a, v))
}

pub fn save_gray_raster(raster: &BitRaster, path: &Path) -> Result<(), MorphometryError> {
    let img = GrayImage::from_fn(raster.width() as u32, raster.height() as u32, |x, y| {
        Luma([if raster.get(x as usize, y as usize) { 255 } else { 0 }])
    });
    img.save(path).map_err(|e| image_error(path, e))
}

/// Writes a mask in the pair layout.
pub fn save_mask_pair(mask: &SegmentationMask, dir: &Path) -> Result<(), MorphometryError> {
    let base = format!("{}_{}", mask.participant_id, mask.eye.code());
    save_gray_raster(mask.artery(), &dir.join(format!("{base}_artery.png")))?;
    save_gray_raster(mask.vein(), &dir.join(format!("{base}_vein.png")))
}

/// Loads every mask in `dir`. Unreadable files and incomplete artery/vein
/// pairs are reported in `errors`, never fatal. Results are ordered by
/// (participant id, eye).
pub fn scan_mask_dir(dir: &Path, config: &MorphometryConfig) -> Result<MaskScan, MorphometryError> {
    let entries = std::fs::read_dir(dir).map_err(|e| MorphometryError::Io {
        path: dir.to_path_buf(),
        message: e.to_string(),
    })?;
    let mut groups: BTreeMap<(String, Eye), BTreeMap<Channel, PathBuf>> = BTreeMap::new();
    let mut scan = MaskScan::default();
    let mut paths: Vec<PathBuf> = entries.filter_map(|e| e.ok().map(|e| e.path())).collect();
    paths.sort();
    for path in paths {
        let is_png = path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| e.eq_ignore_ascii_case("png"));
        if !is_png {
            continue;
        }
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
        match parse_stem(stem, config.mask_layout) {
            Some((id, eye, ch)) => {
                groups.entry((id, eye)).or_default().insert(ch, path);
            }
            None => scan
                .errors
                .push((path, "file name does not follow the mask naming convention".into())),
        }
    }

    for ((id, eye), files) in groups {
        let loaded = match config.mask_layout {
            MaskLayout::Pair => match (files.get(&Channel::Artery), files.get(&Channel::Vein)) {
                (Some(a), Some(v)) => load_gray_raster(a)
                    .and_then(|a| Ok((a, load_gray_raster(v)?)))
                    .map_err(|e| (a.clone(), e.to_string())),
                (Some(p), None) | (None, Some(p)) => Err((p.clone(), "missing artery/vein partner file".to_string())),
                (None, None) => continue,
            },
            MaskLayout::Combined => {
                let p = &files[&Channel::Both];
                load_channels(p, config.artery_channel, config.vein_channel).map_err(|e| (p.clone(), e.to_string()))
            }
        };
        match loaded.and_then(|(a, v)| {
            SegmentationMask::new(id.clone(), eye, a, v).map_err(|e| (PathBuf::from(&id), e.to_string()))
        }) {
            Ok(mask) => scan.masks.push(mask),
            Err(err) => scan.errors.push(err),
        }
    }
    Ok(scan)
}
