use super::{BoundaryRange, LocalizationParams, ProbMapSet};
use crate::error::{Error, Result};
use crate::imaging::{
    connected_components, max_area_region, threshold_window, BinaryMask, Circle, GrayImage, Point,
    Region,
};

/// Cleaned boundary maps and the radial search range for each boundary.
#[derive(Debug, Clone)]
pub struct Denoised {
    pub inner: GrayImage,
    pub outer: GrayImage,
    pub inner_range: BoundaryRange,
    pub outer_range: BoundaryRange,
    /// Circle at the pupil center reaching the farthest iris-mask pixel.
    pub enclosing: Circle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Inside,
    Outside,
    Straddles,
}

fn side_of(region: &Region, center: Point, radius: f64) -> Side {
    let mut any_in = false;
    let mut any_out = false;
    for p in region.points() {
        let d = p.distance(center);
        any_in |= d < radius;
        any_out |= d > radius;
        if d == radius || (any_in && any_out) {
            return Side::Straddles;
        }
    }
    if any_in {
        Side::Inside
    } else {
        Side::Outside
    }
}

/// Removes boundary components that cannot belong to the iris and measures
/// the radial extent of what survives.
///
/// Outer-boundary components lying entirely inside or entirely outside the
/// enclosing circle are dropped; inner-boundary components are dropped only
/// when entirely outside. Surviving pixels keep their probabilities, all
/// other pixels become 0. When a map has no surviving pixels the range falls
/// back to a fixed fraction of the enclosing radius.
pub fn denoise_and_range(maps: &ProbMapSet, center: Point, params: &LocalizationParams) -> Result<Denoised> {
    let (lo, hi) = params.mask_window;
    let mask_regions = connected_components(&threshold_window(&maps.mask, lo, hi)?);
    let iris = max_area_region(&mask_regions)
        .map_err(|_| Error::NoIris("mask map is empty after thresholding".into()))?;
    let radius = iris.points().map(|p| p.distance(center)).fold(0.0, f64::max);
    if radius <= 0.0 {
        return Err(Error::NoIris("iris mask collapses onto the pupil center".into()));
    }
    let enclosing = Circle::new(center.x, center.y, radius)?;

    let (lo, hi) = params.boundary_window;
    let (w, h) = maps.dims();
    let filter = |map: &GrayImage, keep_inside: bool| -> Result<(GrayImage, Option<(f64, f64)>)> {
        let mut keep = BinaryMask::empty(w, h);
        let mut extent: Option<(f64, f64)> = None;
        for region in connected_components(&threshold_window(map, lo, hi)?) {
            let side = side_of(&region, center, radius);
            if side == Side::Outside || (side == Side::Inside && !keep_inside) {
                continue;
            }
            for &(x, y) in &region.pixels {
                keep.set(x, y, true);
                let d = Point::new(x as f64, y as f64).distance(center);
                extent = Some(extent.map_or((d, d), |(a, b)| (a.min(d), b.max(d))));
            }
        }
        Ok((map.masked(&keep)?, extent))
    };

    let (inner, inner_extent) = filter(&maps.inner_boundary, true)?;
    let (outer, outer_extent) = filter(&maps.outer_boundary, false)?;

    let to_range = |extent: Option<(f64, f64)>, fallback: (f64, f64)| {
        let (a, b) = extent.unwrap_or(fallback);
        let a = a.max(1.0);
        BoundaryRange::new(center, a, b.max(a))
    };
    Ok(Denoised {
        inner,
        outer,
        inner_range: to_range(inner_extent, (2.0, 0.8 * radius))?,
        outer_range: to_range(outer_extent, (0.5 * radius, 1.2 * radius))?,
        enclosing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const W: usize = 140;
    const C: Point = Point::new(70.0, 70.0);

    fn ring(r: f64, half_width: f64) -> BinaryMask {
        BinaryMask::from_fn(W, W, |x, y| (Point::new(x as f64, y as f64).distance(C) - r).abs() <= half_width)
    }

    fn blob(at: Point, r: f64) -> BinaryMask {
        BinaryMask::from_fn(W, W, |x, y| Point::new(x as f64, y as f64).distance(at) <= r)
    }

    fn union(a: &BinaryMask, b: &BinaryMask) -> BinaryMask {
        BinaryMask::from_fn(W, W, |x, y| a.get(x, y) || b.get(x, y))
    }

    fn annulus_mask(inner: f64, outer: f64) -> GrayImage {
        BinaryMask::from_fn(W, W, |x, y| {
            let d = Point::new(x as f64, y as f64).distance(C);
            d > inner && d <= outer
        })
        .to_gray()
    }

    fn setup(inner_map: BinaryMask, outer_map: BinaryMask, mask_outer: f64) -> Denoised {
        let maps = ProbMapSet::new(
            GrayImage::zeros(W, W),
            annulus_mask(20.0, mask_outer),
            inner_map.to_gray(),
            outer_map.to_gray(),
        )
        .unwrap();
        denoise_and_range(&maps, C, &LocalizationParams::default()).unwrap()
    }

    #[test]
    fn clean_rings_give_enclosing_ranges() {
        let w = 2.0;
        let d = setup(ring(20.0, w), ring(45.0, w), 45.0);
        assert!(d.enclosing.r <= 45.0 && d.enclosing.r > 44.0);
        assert!(d.inner_range.r_min <= 20.0 - w + 0.5 && d.inner_range.r_max >= 20.0 + w - 0.5);
        assert!(d.outer_range.r_min <= 45.0 - w + 0.5 && d.outer_range.r_max >= 45.0 + w - 0.5);
        assert!(d.inner_range.r_min >= 20.0 - w - 1e-9 && d.inner_range.r_max <= 20.0 + w + 1e-9);
    }

    #[test]
    fn far_blob_removed_from_both() {
        // enclosing radius ~50, blob at distance 100 with radius 4
        let spur = blob(Point::new(C.x + 60.0, C.y + 80.0), 4.0);
        let d = setup(union(&ring(20.0, 1.0), &spur), union(&ring(50.0, 1.0), &spur), 50.0);
        for (x, y) in spur.set_pixels() {
            assert_eq!(d.inner.get(x, y), 0.0);
            assert_eq!(d.outer.get(x, y), 0.0);
        }
        assert!(d.outer_range.r_max < 52.0 && d.inner_range.r_max < 22.0);
    }

    #[test]
    fn inner_blob_kept_only_in_inner_map() {
        let spur = blob(Point::new(C.x + 4.0, C.y - 3.0), 2.0);
        let d = setup(union(&ring(20.0, 1.0), &spur), union(&ring(50.0, 1.0), &spur), 50.0);
        for (x, y) in spur.set_pixels() {
            assert_eq!(d.inner.get(x, y), 1.0);
            assert_eq!(d.outer.get(x, y), 0.0);
        }
    }

    #[test]
    fn straddling_component_survives() {
        // a radial spoke crossing the enclosing circle must be kept in both maps
        let spoke = BinaryMask::from_fn(W, W, |x, y| y == 70 && (100..=130).contains(&x));
        let d = setup(spoke.clone(), spoke.clone(), 45.0);
        for (x, y) in spoke.set_pixels() {
            assert_eq!(d.inner.get(x, y), 1.0);
            assert_eq!(d.outer.get(x, y), 1.0);
        }
    }

    #[test]
    fn empty_boundaries_use_fallback_ranges() {
        let d = setup(BinaryMask::empty(W, W), BinaryMask::empty(W, W), 40.0);
        let r = d.enclosing.r;
        assert_eq!((d.inner_range.r_min, d.inner_range.r_max), (2.0, 0.8 * r));
        assert_eq!((d.outer_range.r_min, d.outer_range.r_max), (0.5 * r, 1.2 * r));
    }
}
