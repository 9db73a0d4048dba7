use std::collections::VecDeque;

use super::{BinaryMask, Point};
use crate::error::{Error, Result};

/// An 8-connected set of foreground pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    /// 1-based position in the area-descending ordering.
    pub label: usize,
    /// Member pixels in scan order (row-major).
    pub pixels: Vec<(usize, usize)>,
    pub area: usize,
    pub centroid: Point,
}

impl Region {
    /// First pixel in scan order, as `(x, y)`.
    pub fn top_left(&self) -> (usize, usize) {
        self.pixels[0]
    }

    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        self.pixels.iter().map(|&(x, y)| Point::new(x as f64, y as f64))
    }

    fn scan_key(&self) -> (usize, usize) {
        let (x, y) = self.top_left();
        (y, x)
    }
}

const NEIGHBORS_8: [(i64, i64); 8] =
    [(-1, -1), (0, -1), (1, -1), (-1, 0), (1, 0), (-1, 1), (0, 1), (1, 1)];

/// Labels 8-connected components.
///
/// Regions come back ordered by decreasing area; equal areas are ordered by
/// the scan position `(y, x)` of their first pixel. Labels follow that order.
pub fn connected_components(mask: &BinaryMask) -> Vec<Region> {
    let (w, h) = mask.dims();
    let mut seen = vec![false; w * h];
    let mut regions = Vec::new();
    let mut queue = VecDeque::new();

    for start in 0..w * h {
        if !mask.bits()[start] || seen[start] {
            continue;
        }
        seen[start] = true;
        queue.push_back(start);
        let mut members = Vec::new();
        while let Some(idx) = queue.pop_front() {
            members.push(idx);
            let (x, y) = ((idx % w) as i64, (idx / w) as i64);
            for (dx, dy) in NEIGHBORS_8 {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                    continue;
                }
                let n = ny as usize * w + nx as usize;
                if mask.bits()[n] && !seen[n] {
                    seen[n] = true;
                    queue.push_back(n);
                }
            }
        }
        members.sort_unstable();
        let area = members.len();
        let (sx, sy) = members
            .iter()
            .fold((0.0, 0.0), |(sx, sy), &i| (sx + (i % w) as f64, sy + (i / w) as f64));
        regions.push(Region {
            label: 0,
            pixels: members.into_iter().map(|i| (i % w, i / w)).collect(),
            area,
            centroid: Point::new(sx / area as f64, sy / area as f64),
        });
    }

    regions.sort_by(|a, b| b.area.cmp(&a.area).then_with(|| a.scan_key().cmp(&b.scan_key())));
    for (i, r) in regions.iter_mut().enumerate() {
        r.label = i + 1;
    }
    regions
}

/// Largest region; ties go to the earliest first pixel in scan order.
pub fn max_area_region(regions: &[Region]) -> Result<&Region> {
    regions
        .iter()
        .reduce(|best, r| {
            if r.area > best.area || (r.area == best.area && r.scan_key() < best.scan_key()) {
                r
            } else {
                best
            }
        })
        .ok_or(Error::NoForeground)
}
