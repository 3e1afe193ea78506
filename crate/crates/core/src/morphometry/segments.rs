use serde::{Deserialize, Serialize};

use super::raster::{BitRaster, NEIGHBORS_8};
use super::skeleton::crossing_numbers;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// An ordered centreline path between two skeleton nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CenterlineSegment {
    points: Vec<Point>,
    arc_length: f64,
    chord_length: f64,
}

impl CenterlineSegment {
    /// Returns `None` for fewer than two points.
    pub fn from_points(points: Vec<Point>) -> Option<Self> {
        if points.len() < 2 {
            return None;
        }
        let first = points[0];
        let last = *points.last().unwrap();
        let chord_length = first.distance(last);
        let summed: f64 = points.windows(2).map(|w| w[0].distance(w[1])).sum();
        // Steps that all run forward along the chord cover exactly the chord;
        // summing them would only add rounding error.
        let (cx, cy) = (last.x - first.x, last.y - first.y);
        let forward = chord_length > 0.0
            && points.windows(2).all(|w| {
                let (dx, dy) = (w[1].x - w[0].x, w[1].y - w[0].y);
                let step = dx.hypot(dy);
                (dx * cy - dy * cx).abs() <= 1e-12 * step * chord_length && dx * cx + dy * cy >= 0.0
            });
        let arc_length = if forward {
            chord_length
        } else {
            summed.max(chord_length)
        };
        Some(Self {
            points,
            arc_length,
            chord_length,
        })
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn arc_length(&self) -> f64 {
        self.arc_length
    }

    pub fn chord_length(&self) -> f64 {
        self.chord_length
    }
}

/// Traces every skeleton path between nodes (endpoints or branch points),
/// plus closed loops with no node on them. No length filter is applied.
pub fn trace_segments(skeleton: &BitRaster) -> Vec<CenterlineSegment> {
    let w = skeleton.width();
    let degree = crossing_numbers(skeleton);
    let is_node = |i: usize| skeleton.cells()[i] && degree[i] != 2;
    let mut visited = vec![false; skeleton.len()];
    let mut node_links = std::collections::BTreeSet::new();
    let mut out = Vec::new();

    let neighbors = |i: usize| {
        let (x, y) = ((i % w) as isize, (i / w) as isize);
        NEIGHBORS_8.iter().filter_map(move |(dx, dy)| {
            let (nx, ny) = (x + dx, y + dy);
            skeleton.get_signed(nx, ny).then(|| ny as usize * w + nx as usize)
        })
    };
    let to_point = |i: usize| Point::new((i % w) as f64, (i / w) as f64);
    let touches = |a: usize, b: usize| {
        let (ax, ay) = ((a % w) as isize, (a / w) as isize);
        let (bx, by) = ((b % w) as isize, (b / w) as isize);
        (ax - bx).abs() <= 1 && (ay - by).abs() <= 1
    };

    for start in 0..skeleton.len() {
        if !is_node(start) {
            continue;
        }
        for first in neighbors(start).collect::<Vec<_>>() {
            if is_node(first) {
                let key = (start.min(first), start.max(first));
                if node_links.insert(key) {
                    out.extend(CenterlineSegment::from_points(vec![to_point(start), to_point(first)]));
                }
                continue;
            }
            if visited[first] {
                continue;
            }
            visited[first] = true;
            let mut path = vec![start, first];
            let (mut prev, mut cur) = (start, first);
            loop {
                // A node adjacent to the current pixel always terminates the
                // path, even when an unvisited path pixel is also adjacent.
                let next = neighbors(cur)
                    .find(|&n| n != prev && n != start && is_node(n))
                    .or_else(|| {
                        // Avoid cutting back across a corner next to `prev`.
                        let open = |n: usize| n != prev && !is_node(n) && !visited[n];
                        neighbors(cur)
                            .find(|&n| open(n) && !touches(n, prev))
                            .or_else(|| neighbors(cur).find(|&n| open(n)))
                    })
                    .or_else(|| (path.len() > 2 && neighbors(cur).any(|n| n == start)).then_some(start));
                match next {
                    Some(n) if is_node(n) => {
                        path.push(n);
                        break;
                    }
                    Some(n) => {
                        visited[n] = true;
                        path.push(n);
                        prev = cur;
                        cur = n;
                    }
                    None => break,
                }
            }
            out.extend(CenterlineSegment::from_points(path.into_iter().map(to_point).collect()));
        }
    }

    // Closed loops: every pixel has exactly two neighbours.
    for start in 0..skeleton.len() {
        if !skeleton.cells()[start] || degree[start] != 2 || visited[start] {
            continue;
        }
        visited[start] = true;
        let mut path = vec![start];
        let (mut prev, mut cur) = (usize::MAX, start);
        loop {
            let next = neighbors(cur).find(|&n| n != prev && (!visited[n] || (n == start && path.len() > 2)));
            match next {
                Some(n) if n == start => {
                    path.push(n);
                    break;
                }
                Some(n) => {
                    visited[n] = true;
                    path.push(n);
                    prev = cur;
                    cur = n;
                }
                None => break,
            }
        }
        out.extend(CenterlineSegment::from_points(path.into_iter().map(to_point).collect()));
    }
    out
}

/// Skeleton paths between endpoints and branch points with arc length of at
/// least `min_length` pixels.
pub fn decompose_segments(skeleton: &BitRaster, min_length: f64) -> Vec<CenterlineSegment> {
    trace_segments(skeleton)
        .into_iter()
        .filter(|s| s.arc_length() >= min_length)
        .collect()
}

/// Total centreline length in pixels (axial steps 1, diagonal steps √2).
pub fn total_arc_length(skeleton: &BitRaster) -> f64 {
    trace_segments(skeleton).iter().map(CenterlineSegment::arc_length).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raster_from(points: &[(usize, usize)], w: usize, h: usize) -> BitRaster {
        let mut r = BitRaster::new(w, h).unwrap();
        for &(x, y) in points {
            r.set(x, y, true);
        }
        r
    }

    #[test]
    fn straight_chain_is_one_segment() {
        let pts: Vec<_> = (5..55).map(|x| (x, 10)).collect();
        let segs = decompose_segments(&raster_from(&pts, 64, 20), 10.0);
        assert_eq!(segs.len(), 1);
        assert_eq!(segs[0].arc_length(), 49.0);
        assert_eq!(segs[0].chord_length(), 49.0);
        assert_eq!(segs[0].points().len(), 50);
    }

    #[test]
    fn short_chain_is_filtered() {
        let pts: Vec<_> = (5..10).map(|x| (x, 3)).collect();
        assert!(decompose_segments(&raster_from(&pts, 20, 8), 10.0).is_empty());
    }

    #[test]
    fn diagonal_steps_weigh_sqrt2() {
        let pts: Vec<_> = (0..11).map(|i| (i, i)).collect();
        let segs = trace_segments(&raster_from(&pts, 12, 12));
        assert_eq!(segs.len(), 1);
        assert!((segs[0].arc_length() - 10.0 * 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn closed_loop_has_zero_chord() {
        // Diamond ring.
        let mut pts = Vec::new();
        for i in 0..5 {
            pts.push((10 + i, 5 + i));
            pts.push((14 - i, 9 + i));
            pts.push((10 - i, 13 - i));
            pts.push((6 + i, 9 - i));
        }
        pts.sort();
        pts.dedup();
        let segs = trace_segments(&raster_from(&pts, 24, 24));
        assert_eq!(segs.len(), 1);
        assert_eq!(segs[0].chord_length(), 0.0);
        assert!((segs[0].arc_length() - 16.0 * 2f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn every_interior_pixel_in_one_segment() {
        // T shape.
        let mut pts: Vec<_> = (2..40).map(|x| (x, 5)).collect();
        pts.extend((6..30).map(|y| (20, y)));
        let sk = raster_from(&pts, 48, 32);
        let segs = trace_segments(&sk);
        assert_eq!(segs.len(), 3);
        let interior: usize = segs.iter().map(|s| s.points().len() - 2).sum();
        // 38 + 24 pixels minus the junction and the three endpoints.
        assert_eq!(interior, 38 + 24 - 4);
    }
}
