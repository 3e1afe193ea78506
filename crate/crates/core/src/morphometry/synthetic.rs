//! Synthetic vessel trees for fixtures, benchmarks and simulated cohorts.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::raster::{BitRaster, Eye, SegmentationMask};
use super::segments::Point;
use super::MorphometryError;

/// Sets every pixel on the 8-connected Bresenham line from `a` to `b`.
pub fn draw_line(raster: &mut BitRaster, a: (isize, isize), b: (isize, isize)) {
    let (mut x, mut y) = a;
    let dx = (b.0 - a.0).abs();
    let dy = -(b.1 - a.1).abs();
    let sx = if a.0 < b.0 { 1 } else { -1 };
    let sy = if a.1 < b.1 { 1 } else { -1 };
    let mut err = dx + dy;
    loop {
        raster.set_clipped(x, y, true);
        if (x, y) == b {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x += sx;
        }
        if e2 <= dx {
            err += dx;
            y += sy;
        }
    }
}

/// Stamps a filled disc of the given diameter at every half pixel along the polyline.
pub fn draw_thick_polyline(raster: &mut BitRaster, points: &[Point], diameter: f64) {
    let r = (diameter / 2.0).max(0.5);
    let r2 = r * r;
    let reach = r.ceil() as isize;
    let mut stamp = |c: Point| {
        let (cx, cy) = (c.x.round() as isize, c.y.round() as isize);
        for dy in -reach..=reach {
            for dx in -reach..=reach {
                let (px, py) = (cx + dx, cy + dy);
                let (fx, fy) = (px as f64 - c.x, py as f64 - c.y);
                if fx * fx + fy * fy <= r2 {
                    raster.set_clipped(px, py, true);
                }
            }
        }
    };
    if let Some(&first) = points.first() {
        stamp(first);
    }
    for w in points.windows(2) {
        let steps = (w[0].distance(w[1]) * 2.0).ceil().max(1.0) as usize;
        for i in 1..=steps {
            let t = i as f64 / steps as f64;
            stamp(Point::new(
                w[0].x + t * (w[1].x - w[0].x),
                w[0].y + t * (w[1].y - w[0].y),
            ));
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeParams {
    pub width: usize,
    pub height: usize,
    /// Trunks leaving the root.
    pub trunks: usize,
    pub root_diameter: f64,
    pub min_diameter: f64,
    /// Length of a depth-0 branch in pixels.
    pub branch_length: f64,
    pub max_depth: usize,
    /// Standard deviation of the per-step heading change, radians.
    pub wiggle: f64,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self {
            width: 512,
            height: 512,
            trunks: 2,
            root_diameter: 7.0,
            min_diameter: 2.0,
            branch_length: 105.0,
            max_depth: 4,
            wiggle: 0.06,
        }
    }
}

const BORDER: f64 = 16.0;

struct Branch {
    start: Point,
    heading: f64,
    diameter: f64,
    depth: usize,
}

/// Grows a bifurcating tree from a root near the left third of the raster.
pub fn vessel_tree(params: &TreeParams, seed: u64) -> Result<BitRaster, MorphometryError> {
    let mut raster = BitRaster::new(params.width, params.height)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let turn = Normal::new(0.0, params.wiggle.max(0.0)).expect("finite sd");
    let root = Point::new(params.width as f64 * 0.3, params.height as f64 * 0.5);
    let spread = PI * 2.0 / params.trunks.max(1) as f64;

    let mut stack: Vec<Branch> = (0..params.trunks)
        .map(|i| Branch {
            start: root,
            heading: i as f64 * spread + rng.random_range(-0.4..0.4) - 0.6,
            diameter: params.root_diameter,
            depth: 0,
        })
        .collect();

    let (w, h) = (params.width as f64, params.height as f64);
    while let Some(b) = stack.pop() {
        let length = params.branch_length * 0.75f64.powi(b.depth as i32) * rng.random_range(0.8..1.2);
        let mut heading = b.heading;
        let mut p = b.start;
        let mut path = vec![p];
        let mut walked = 0.0;
        while walked < length {
            heading += turn.sample(&mut rng);
            // Near the border, bend back towards the centre.
            if p.x < BORDER || p.y < BORDER || p.x > w - BORDER || p.y > h - BORDER {
                let inward = (h / 2.0 - p.y).atan2(w / 2.0 - p.x);
                let diff = (inward - heading + PI).rem_euclid(2.0 * PI) - PI;
                heading += diff.clamp(-0.25, 0.25);
            }
            p = Point::new(
                (p.x + 2.0 * heading.cos()).clamp(0.0, w - 1.0),
                (p.y + 2.0 * heading.sin()).clamp(0.0, h - 1.0),
            );
            walked += 2.0;
            path.push(p);
        }
        draw_thick_polyline(&mut raster, &path, b.diameter);

        let child = b.diameter * 0.8;
        if b.depth < params.max_depth && child >= params.min_diameter {
            for sign in [-1.0, 1.0] {
                stack.push(Branch {
                    start: p,
                    heading: heading + sign * rng.random_range(0.35..0.7),
                    diameter: child,
                    depth: b.depth + 1,
                });
            }
        }
    }
    Ok(raster)
}

/// A mask with independent artery and vein trees derived from one seed.
pub fn synthetic_mask(
    participant_id: impl Into<String>,
    eye: Eye,
    params: &TreeParams,
    seed: u64,
) -> Result<SegmentationMask, MorphometryError> {
    let artery = vessel_tree(params, seed.wrapping_mul(2))?;
    let vein_params = TreeParams {
        root_diameter: params.root_diameter * 1.2,
        ..params.clone()
    };
    let vein = vessel_tree(&vein_params, seed.wrapping_mul(2).wrapping_add(1))?;
    SegmentationMask::new(participant_id, eye, artery, vein)
}
