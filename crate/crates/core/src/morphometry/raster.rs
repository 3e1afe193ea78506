use serde::{Deserialize, Serialize};

use super::MorphometryError;

/// Dense binary raster in row-major order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BitRaster {
    width: usize,
    height: usize,
    cells: Vec<bool>,
}

impl BitRaster {
    /// All-background raster. Zero dimensions are rejected.
    pub fn new(width: usize, height: usize) -> Result<Self, MorphometryError> {
        if width == 0 || height == 0 {
            return Err(MorphometryError::InvalidDimensions { width, height });
        }
        Ok(Self {
            width,
            height,
            cells: vec![false; width * height],
        })
    }

    pub fn from_cells(width: usize, height: usize, cells: Vec<bool>) -> Result<Self, MorphometryError> {
        if width == 0 || height == 0 {
            return Err(MorphometryError::InvalidDimensions { width, height });
        }
        if cells.len() != width * height {
            return Err(MorphometryError::RasterSizeMismatch {
                expected: width * height,
                actual: cells.len(),
            });
        }
        Ok(Self { width, height, cells })
    }

    /// Builds a raster from a predicate over `(x, y)`.
    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> bool,
    ) -> Result<Self, MorphometryError> {
        let mut raster = Self::new(width, height)?;
        for y in 0..height {
            for x in 0..width {
                raster.cells[y * width + x] = f(x, y);
            }
        }
        Ok(raster)
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.cells[y * self.width + x]
    }

    /// Out-of-bounds coordinates read as background.
    #[inline]
    pub fn get_signed(&self, x: isize, y: isize) -> bool {
        if x < 0 || y < 0 || x as usize >= self.width || y as usize >= self.height {
            false
        } else {
            self.cells[y as usize * self.width + x as usize]
        }
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.cells[y * self.width + x] = value;
    }

    /// Sets a pixel if it lies inside the raster; silently clips otherwise.
    #[inline]
    pub fn set_clipped(&mut self, x: isize, y: isize, value: bool) {
        if x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height {
            self.cells[y as usize * self.width + x as usize] = value;
        }
    }

    pub fn cells(&self) -> &[bool] {
        &self.cells
    }

    pub fn count_ones(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.cells.iter().any(|&c| c)
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    /// Cellwise OR. Dimensions must match.
    pub fn union(&self, other: &BitRaster) -> Result<BitRaster, MorphometryError> {
        if self.width != other.width || self.height != other.height {
            return Err(MorphometryError::RasterSizeMismatch {
                expected: self.len(),
                actual: other.len(),
            });
        }
        let cells = self.cells.iter().zip(&other.cells).map(|(&a, &b)| a || b).collect();
        Ok(BitRaster {
            width: self.width,
            height: self.height,
            cells,
        })
    }

    /// Iterator over foreground coordinates in raster order.
    pub fn foreground(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let w = self.width;
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, &c)| c)
            .map(move |(i, _)| (i % w, i / w))
    }

    /// Number of 8-connected foreground components.
    pub fn component_count(&self) -> usize {
        let mut label = vec![false; self.cells.len()];
        let mut count = 0;
        let mut stack = Vec::new();
        for start in 0..self.cells.len() {
            if !self.cells[start] || label[start] {
                continue;
            }
            count += 1;
            label[start] = true;
            stack.push(start);
            while let Some(i) = stack.pop() {
                let (x, y) = ((i % self.width) as isize, (i / self.width) as isize);
                for (dx, dy) in NEIGHBORS_8 {
                    let (nx, ny) = (x + dx, y + dy);
                    if self.get_signed(nx, ny) {
                        let j = ny as usize * self.width + nx as usize;
                        if !label[j] {
                            label[j] = true;
                            stack.push(j);
                        }
                    }
                }
            }
        }
        count
    }
}

/// 8-neighbourhood offsets in clockwise order starting at north
/// (image coordinates, y grows downwards).
pub const NEIGHBORS_8: [(isize, isize); 8] = [(0, -1), (1, -1), (1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1)];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Eye {
    Left,
    Right,
}

impl Eye {
    pub fn code(self) -> char {
        match self {
            Eye::Left => 'L',
            Eye::Right => 'R',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum VesselClass {
    Artery,
    Vein,
    Combined,
}

impl VesselClass {
    pub const ALL: [VesselClass; 3] = [VesselClass::Artery, VesselClass::Vein, VesselClass::Combined];

    /// Column-name prefix used in feature tables.
    pub fn prefix(self) -> &'static str {
        match self {
            VesselClass::Artery => "artery_",
            VesselClass::Vein => "vein_",
            VesselClass::Combined => "",
        }
    }
}

/// Per-eye artery/vein segmentation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentationMask {
    pub participant_id: String,
    pub eye: Eye,
    artery: BitRaster,
    vein: BitRaster,
}

impl SegmentationMask {
    pub fn new(
        participant_id: impl Into<String>,
        eye: Eye,
        artery: BitRaster,
        vein: BitRaster,
    ) -> Result<Self, MorphometryError> {
        if artery.width() != vein.width() || artery.height() != vein.height() {
            return Err(MorphometryError::RasterSizeMismatch {
                expected: artery.len(),
                actual: vein.len(),
            });
        }
        Ok(Self {
            participant_id: participant_id.into(),
            eye,
            artery,
            vein,
        })
    }

    pub fn width(&self) -> usize {
        self.artery.width()
    }

    pub fn height(&self) -> usize {
        self.artery.height()
    }

    pub fn artery(&self) -> &BitRaster {
        &self.artery
    }

    pub fn vein(&self) -> &BitRaster {
        &self.vein
    }

    /// Raster for a vessel class; `Combined` is the cellwise union.
    pub fn class_raster(&self, class: VesselClass) -> BitRaster {
        match class {
            VesselClass::Artery => self.artery.clone(),
            VesselClass::Vein => self.vein.clone(),
            VesselClass::Combined => self
                .artery
                .union(&self.vein)
                .expect("dimensions checked at construction"),
        }
    }
}
