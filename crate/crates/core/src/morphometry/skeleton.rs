//! Two-subiteration thinning (Zhang–Suen) followed by a staircase pass that
//! removes 4-connected corners, leaving an 8-connected, unit-width skeleton.
//!
//! Deletion candidates in each subiteration are gathered on a frozen copy of
//! the image and then confirmed one at a time against the live image. The
//! confirmation step is what keeps 2-pixel-thick blocks from vanishing, so
//! component count is preserved.

use super::raster::{BitRaster, NEIGHBORS_8};

/// Neighbour bits in Zhang–Suen order P2..P9 (N, NE, E, SE, S, SW, W, NW).
#[inline]
fn ring(raster: &BitRaster, x: usize, y: usize) -> [bool; 8] {
    let (x, y) = (x as isize, y as isize);
    let mut out = [false; 8];
    for (k, (dx, dy)) in NEIGHBORS_8.iter().enumerate() {
        out[k] = raster.get_signed(x + dx, y + dy);
    }
    out
}

#[inline]
fn count(ring: &[bool; 8]) -> usize {
    ring.iter().filter(|&&b| b).count()
}

/// Number of 0→1 transitions around the closed ring.
#[inline]
fn transitions(ring: &[bool; 8]) -> usize {
    (0..8).filter(|&k| !ring[k] && ring[(k + 1) % 8]).count()
}

const N: usize = 0;
const E: usize = 2;
const S: usize = 4;
const W: usize = 6;

fn zs_deletable(nb: &[bool; 8], first: bool) -> bool {
    let b = count(nb);
    if !(2..=6).contains(&b) || transitions(nb) != 1 {
        return false;
    }
    if first {
        !(nb[N] && nb[E] && nb[S]) && !(nb[E] && nb[S] && nb[W])
    } else {
        !(nb[N] && nb[E] && nb[W]) && !(nb[N] && nb[S] && nb[W])
    }
}

/// Thins a binary raster to a 1-pixel-wide, 8-connected centreline.
///
/// The skeleton is a subset of the input foreground and has the same number
/// of 8-connected components. An empty input yields an empty skeleton.
pub fn skeletonize(raster: &BitRaster) -> BitRaster {
    let mut img = raster.clone();
    let mut candidates = Vec::new();
    loop {
        let mut changed = false;
        for first in [true, false] {
            candidates.clear();
            for (x, y) in img.foreground() {
                if zs_deletable(&ring(&img, x, y), first) {
                    candidates.push((x, y));
                }
            }
            for &(x, y) in &candidates {
                if zs_deletable(&ring(&img, x, y), first) {
                    img.set(x, y, false);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    remove_staircases(&mut img);
    img
}

/// Whether removing the centre pixel leaves local topology unchanged
/// (8-connected foreground, 4-connected background).
pub(crate) fn is_simple(nb: &[bool; 8]) -> bool {
    foreground_components(nb) == 1 && background_components(nb) == 1
}

fn ring_pos(k: usize) -> (isize, isize) {
    NEIGHBORS_8[k]
}

fn foreground_components(nb: &[bool; 8]) -> usize {
    components(
        nb,
        true,
        |a, b| {
            let (pa, pb) = (ring_pos(a), ring_pos(b));
            (pa.0 - pb.0).abs() <= 1 && (pa.1 - pb.1).abs() <= 1
        },
        |_| true,
    )
}

fn background_components(nb: &[bool; 8]) -> usize {
    // Only background components touching a 4-neighbour of the centre count.
    components(
        nb,
        false,
        |a, b| {
            let (pa, pb) = (ring_pos(a), ring_pos(b));
            (pa.0 - pb.0).abs() + (pa.1 - pb.1).abs() == 1
        },
        |members| members.iter().any(|&k| k % 2 == 0),
    )
}

fn components(
    nb: &[bool; 8],
    value: bool,
    adjacent: impl Fn(usize, usize) -> bool,
    keep: impl Fn(&[usize]) -> bool,
) -> usize {
    let mut seen = [false; 8];
    let mut total = 0;
    for start in 0..8 {
        if nb[start] != value || seen[start] {
            continue;
        }
        let mut members = vec![start];
        seen[start] = true;
        let mut i = 0;
        while i < members.len() {
            let a = members[i];
            for b in 0..8 {
                if nb[b] == value && !seen[b] && adjacent(a, b) {
                    seen[b] = true;
                    members.push(b);
                }
            }
            i += 1;
        }
        if keep(&members) {
            total += 1;
        }
    }
    total
}

fn remove_staircases(img: &mut BitRaster) {
    loop {
        let mut changed = false;
        let pixels: Vec<_> = img.foreground().collect();
        for (x, y) in pixels {
            let nb = ring(img, x, y);
            if count(&nb) < 2 {
                continue;
            }
            let corner = (nb[N] && nb[E]) || (nb[E] && nb[S]) || (nb[S] && nb[W]) || (nb[W] && nb[N]);
            if corner && is_simple(&nb) {
                img.set(x, y, false);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
}

/// Number of 8-neighbours set for every pixel of `skeleton` (0 for background).
pub fn neighbor_counts(skeleton: &BitRaster) -> Vec<u8> {
    let mut out = vec![0u8; skeleton.len()];
    for (x, y) in skeleton.foreground() {
        out[y * skeleton.width() + x] = count(&ring(skeleton, x, y)) as u8;
    }
    out
}

/// Crossing number of every skeleton pixel: the count of separate foreground
/// runs around its 8-ring. 1 marks an endpoint, 2 a path pixel, 3 or more a
/// branch point. Background pixels read 0.
pub fn crossing_numbers(skeleton: &BitRaster) -> Vec<u8> {
    let mut out = vec![0u8; skeleton.len()];
    for (x, y) in skeleton.foreground() {
        let nb = ring(skeleton, x, y);
        let cn = if nb.iter().all(|&b| b) { 1 } else { transitions(&nb) };
        out[y * skeleton.width() + x] = cn as u8;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bar(w: usize, h: usize, thickness: usize) -> BitRaster {
        let top = (h - thickness) / 2;
        BitRaster::from_fn(w, h, |_, y| y >= top && y < top + thickness).unwrap()
    }

    fn is_unit_width(sk: &BitRaster) -> bool {
        // No 2x2 fully-set block survives.
        for y in 0..sk.height() - 1 {
            for x in 0..sk.width() - 1 {
                if sk.get(x, y) && sk.get(x + 1, y) && sk.get(x, y + 1) && sk.get(x + 1, y + 1) {
                    return false;
                }
            }
        }
        true
    }

    #[test]
    fn empty_raster_stays_empty() {
        let r = BitRaster::new(16, 16).unwrap();
        assert!(skeletonize(&r).is_empty());
    }

    #[test]
    fn horizontal_bar_becomes_single_chain() {
        let r = BitRaster::from_fn(110, 9, |x, y| (5..105).contains(&x) && (2..7).contains(&y)).unwrap();
        let sk = skeletonize(&r);
        let n = sk.count_ones();
        assert!((96..=100).contains(&n), "skeleton length {n}");
        // Single row.
        let rows: std::collections::BTreeSet<_> = sk.foreground().map(|(_, y)| y).collect();
        assert_eq!(rows.len(), 1);
        assert_eq!(sk.component_count(), 1);
    }

    #[test]
    fn two_by_two_block_keeps_a_pixel() {
        let r = BitRaster::from_fn(6, 6, |x, y| (2..4).contains(&x) && (2..4).contains(&y)).unwrap();
        let sk = skeletonize(&r);
        assert!(sk.count_ones() >= 1);
        assert_eq!(sk.component_count(), 1);
    }

    #[test]
    fn skeleton_is_subset_and_thin() {
        let r = bar(64, 20, 8);
        let sk = skeletonize(&r);
        for (x, y) in sk.foreground() {
            assert!(r.get(x, y));
        }
        assert!(is_unit_width(&sk));
    }

    #[test]
    fn simple_point_classification() {
        // Interior pixel of a filled block is not simple.
        assert!(!is_simple(&[true; 8]));
        // End of a line is simple.
        let mut nb = [false; 8];
        nb[E] = true;
        assert!(is_simple(&nb));
        // Middle of a line is not.
        nb[W] = true;
        assert!(!is_simple(&nb));
    }
}
