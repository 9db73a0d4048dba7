//! Circle localization from the four probability maps.
//!
//! The chain is: pupil-center search ([`locate_pupil_center`]), edge
//! denoising and boundary range estimation ([`denoise_and_range`]), a
//! closed polar Viterbi contour per boundary ([`viterbi_contour`]) and an
//! algebraic least-squares circle fit ([`fit_circle`]). [`localize`] runs
//! the whole chain.

mod center;
mod denoise;
mod fit;
mod viterbi;

pub use center::locate_pupil_center;
pub use denoise::{denoise_and_range, Denoised};
pub use fit::{fit_circle, fit_circle_points};
pub use viterbi::{contour_score, emission_table, viterbi_contour};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{check_same_dims, Circle, GrayImage, Point};

/// The network's four aligned probability maps.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbMapSet {
    pub pupil_center: GrayImage,
    pub mask: GrayImage,
    pub inner_boundary: GrayImage,
    pub outer_boundary: GrayImage,
}

impl ProbMapSet {
    pub fn new(
        pupil_center: GrayImage,
        mask: GrayImage,
        inner_boundary: GrayImage,
        outer_boundary: GrayImage,
    ) -> Result<Self> {
        let d = pupil_center.dims();
        check_same_dims(d, mask.dims())?;
        check_same_dims(d, inner_boundary.dims())?;
        check_same_dims(d, outer_boundary.dims())?;
        Ok(Self { pupil_center, mask, inner_boundary, outer_boundary })
    }

    pub fn dims(&self) -> (usize, usize) {
        self.mask.dims()
    }

    /// Maps in channel order: pupil center, mask, inner, outer.
    pub fn channels(&self) -> [&GrayImage; 4] {
        [&self.pupil_center, &self.mask, &self.inner_boundary, &self.outer_boundary]
    }

    pub fn from_channels(maps: [GrayImage; 4]) -> Result<Self> {
        let [p, m, i, o] = maps;
        Self::new(p, m, i, o)
    }
}

/// Tunables for the post-processing chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalizationParams {
    /// 8-bit window applied to the mask map.
    pub mask_window: (u8, u8),
    /// 8-bit window applied to the pupil-center map.
    pub center_window: (u8, u8),
    /// 8-bit window applied to both boundary maps before denoising.
    pub boundary_window: (u8, u8),
    pub n_angles: usize,
    /// Largest radius change (pixels) between neighbouring angles.
    pub delta: usize,
}

impl Default for LocalizationParams {
    fn default() -> Self {
        Self {
            mask_window: (200, 255),
            center_window: (150, 255),
            boundary_window: (150, 255),
            n_angles: 360,
            delta: 2,
        }
    }
}

impl LocalizationParams {
    pub fn validate(&self) -> Result<()> {
        for (name, (lo, hi)) in [
            ("mask_window", self.mask_window),
            ("center_window", self.center_window),
            ("boundary_window", self.boundary_window),
        ] {
            if lo > hi {
                return Err(Error::Config(format!("{name} [{lo}, {hi}] has lo > hi")));
            }
        }
        if self.n_angles < 8 {
            return Err(Error::Config(format!("n_angles must be >= 8, got {}", self.n_angles)));
        }
        if self.delta < 1 {
            return Err(Error::Config("delta must be >= 1".into()));
        }
        Ok(())
    }
}

/// Radial search interval around a center.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryRange {
    pub center: Point,
    pub r_min: f64,
    pub r_max: f64,
}

impl BoundaryRange {
    pub fn new(center: Point, r_min: f64, r_max: f64) -> Result<Self> {
        if !(r_min > 0.0 && r_min <= r_max && r_max.is_finite()) {
            return Err(Error::InvalidRange(format!(
                "boundary range needs 0 < r_min <= r_max, got [{r_min}, {r_max}]"
            )));
        }
        Ok(Self { center, r_min, r_max })
    }
}

/// One radius per angle; angle `k` is `2πk / n_angles`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolarContour {
    pub center: Point,
    pub n_angles: usize,
    pub radii: Vec<f64>,
}

impl PolarContour {
    pub fn angle(&self, k: usize) -> f64 {
        std::f64::consts::TAU * k as f64 / self.n_angles as f64
    }

    pub fn points(&self) -> Vec<Point> {
        self.radii
            .iter()
            .enumerate()
            .map(|(k, &r)| {
                let t = self.angle(k);
                Point::new(self.center.x + r * t.cos(), self.center.y + r * t.sin())
            })
            .collect()
    }

    /// Largest circular step between neighbouring radii.
    pub fn max_step(&self) -> f64 {
        let n = self.radii.len();
        (0..n)
            .map(|k| (self.radii[(k + 1) % n] - self.radii[k]).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone)]
pub struct LocalizationResult {
    pub pupil_center: Point,
    pub inner: Circle,
    pub outer: Circle,
    pub inner_contour: PolarContour,
    pub outer_contour: PolarContour,
    pub denoised_inner: GrayImage,
    pub denoised_outer: GrayImage,
}

/// Full post-processing chain for one image.
pub fn localize(maps: &ProbMapSet, params: &LocalizationParams) -> Result<LocalizationResult> {
    params.validate()?;
    let center = locate_pupil_center(maps, params)?;
    let den = denoise_and_range(maps, center, params)?;
    let inner_contour = viterbi_contour(&den.inner, &den.inner_range, params.n_angles, params.delta)?;
    let outer_contour = viterbi_contour(&den.outer, &den.outer_range, params.n_angles, params.delta)?;
    let inner = fit_circle(&inner_contour)?;
    let outer = fit_circle(&outer_contour)?;
    if inner.r >= outer.r {
        return Err(Error::InconsistentGeometry(format!(
            "inner radius {:.3} is not smaller than outer radius {:.3}",
            inner.r, outer.r
        )));
    }
    let (w, h) = maps.dims();
    if !inner.center_inside(w, h) || !outer.center_inside(w, h) {
        return Err(Error::InconsistentGeometry("fitted circle center lies outside the image".into()));
    }
    Ok(LocalizationResult {
        pupil_center: center,
        inner,
        outer,
        inner_contour,
        outer_contour,
        denoised_inner: den.inner,
        denoised_outer: den.outer,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_zero_maps_have_no_iris() {
        let z = GrayImage::zeros(40, 30);
        let maps = ProbMapSet::new(z.clone(), z.clone(), z.clone(), z).unwrap();
        let err = localize(&maps, &LocalizationParams::default()).unwrap_err();
        assert!(matches!(err, Error::NoIris(_)), "{err}");
    }

    #[test]
    fn map_dims_must_agree() {
        let a = GrayImage::zeros(4, 4);
        let b = GrayImage::zeros(4, 5);
        assert!(ProbMapSet::new(a.clone(), a.clone(), a, b).is_err());
    }

    #[test]
    fn params_validate() {
        let mut p = LocalizationParams::default();
        assert!(p.validate().is_ok());
        p.n_angles = 4;
        assert!(p.validate().is_err());
        p = LocalizationParams { boundary_window: (200, 100), ..Default::default() };
        assert!(p.validate().is_err());
    }

    #[test]
    fn boundary_range_invariant() {
        assert!(BoundaryRange::new(Point::default(), 0.0, 3.0).is_err());
        assert!(BoundaryRange::new(Point::default(), 4.0, 3.0).is_err());
        assert!(BoundaryRange::new(Point::default(), 3.0, 3.0).is_ok());
    }
}
