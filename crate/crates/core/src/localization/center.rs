use super::{LocalizationParams, ProbMapSet};
use crate::error::{Error, Result};
use crate::imaging::{connected_components, max_area_region, min_enclosing_circle, threshold_window, Point};

/// Pupil-center estimate from the mask and center maps.
///
/// The mask map is thresholded with `params.mask_window` and the enclosing
/// circle of its largest component gives a reference point. The center map
/// is thresholded with the looser `params.center_window`; the component whose
/// centroid is nearest the reference point wins and its centroid is returned.
/// With no center candidates at all, the reference point itself is returned.
pub fn locate_pupil_center(maps: &ProbMapSet, params: &LocalizationParams) -> Result<Point> {
    let (lo, hi) = params.mask_window;
    let mask_regions = connected_components(&threshold_window(&maps.mask, lo, hi)?);
    let iris = max_area_region(&mask_regions)
        .map_err(|_| Error::NoIris("mask map is empty after thresholding".into()))?;
    let reference = min_enclosing_circle(&iris.points().collect::<Vec<_>>())?.center();

    let (lo, hi) = params.center_window;
    let candidates = connected_components(&threshold_window(&maps.pupil_center, lo, hi)?);
    let nearest = candidates.iter().min_by(|a, b| {
        a.centroid
            .distance_squared(reference)
            .total_cmp(&b.centroid.distance_squared(reference))
            .then(a.label.cmp(&b.label))
    });
    Ok(nearest.map_or(reference, |r| r.centroid))
}
