//! Rubber-sheet normalization, log-Gabor iris codes, masked Hamming
//! matching and verification statistics.

mod encode;
mod matching;
mod stats;

pub use encode::{encode, EncodeParams};
pub use matching::{match_prepared, match_templates, IrisTemplate, MatchScore, PreparedTemplate};
pub use stats::{decidability, equal_error_rate, verification_stats, VerificationStats};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{check_same_dims, BinaryMask, Border, Circle, GrayImage, Point};

/// Unwrapped iris: `rows` radial samples by `cols` angular samples.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedIris {
    pub rows: usize,
    pub cols: usize,
    pub pixels: Vec<f64>,
    pub valid: Vec<bool>,
}

impl NormalizedIris {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.pixels[i * self.cols + j]
    }

    pub fn is_valid(&self, i: usize, j: usize) -> bool {
        self.valid[i * self.cols + j]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizeParams {
    pub rows: usize,
    pub cols: usize,
}

impl Default for NormalizeParams {
    fn default() -> Self {
        Self { rows: 64, cols: 512 }
    }
}

/// Samples the annulus between `inner` and `outer` along rays at angle
/// `2πj/cols`, at radial fraction `(i + 0.5)/rows`. The circles need not be
/// concentric; each ray's endpoints are taken on each circle independently.
pub fn normalize(
    img: &GrayImage,
    mask: &BinaryMask,
    inner: &Circle,
    outer: &Circle,
    rows: usize,
    cols: usize,
) -> Result<NormalizedIris> {
    check_same_dims(img.dims(), mask.dims())?;
    if rows == 0 || cols == 0 {
        return Err(Error::Config("normalized size must be positive".into()));
    }
    if inner.r >= outer.r {
        return Err(Error::InconsistentGeometry(format!("inner radius {} >= outer radius {}", inner.r, outer.r)));
    }
    let (w, h) = img.dims();
    if !inner.fits_inside(w, h) || !outer.fits_inside(w, h) {
        return Err(Error::InconsistentGeometry("circle extends outside the image".into()));
    }

    let mut pixels = Vec::with_capacity(rows * cols);
    let mut valid = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        let t = (i as f64 + 0.5) / rows as f64;
        for j in 0..cols {
            let theta = std::f64::consts::TAU * j as f64 / cols as f64;
            let a = inner.point_at(theta);
            let b = outer.point_at(theta);
            let p = Point::new(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y));
            pixels.push(img.bilinear(p.x, p.y, Border::Clamp));
            let (nx, ny) = (p.x.round(), p.y.round());
            let inside = nx >= 0.0 && ny >= 0.0 && (nx as usize) < w && (ny as usize) < h;
            valid.push(inside && mask.get(nx as usize, ny as usize));
        }
    }
    Ok(NormalizedIris { rows, cols, pixels, valid })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_image_is_constant() {
        let img = GrayImage::from_fn(64, 64, |_, _| 0.4);
        let mask = BinaryMask::full(64, 64);
        let c = |r| Circle::new(32.0, 32.0, r).unwrap();
        let n = normalize(&img, &mask, &c(5.0), &c(15.0), 4, 32).unwrap();
        assert_eq!(n.pixels.len(), 128);
        assert!(n.pixels.iter().all(|&v| (v - 0.4).abs() < 1e-12));
        assert!(n.valid.iter().all(|&v| v));
    }

    #[test]
    fn sampling_radii_follow_pixel_centres() {
        // image value encodes distance from the centre, so samples reveal radii
        let r_max = 40.0;
        let img = GrayImage::from_fn(81, 81, |x, y| Point::new(x as f64, y as f64).distance(Point::new(40.0, 40.0)) / r_max);
        let mask = BinaryMask::full(81, 81);
        let c = |r| Circle::new(40.0, 40.0, r).unwrap();
        let n = normalize(&img, &mask, &c(5.0), &c(15.0), 4, 16).unwrap();
        let expected = [6.25, 8.75, 11.25, 13.75];
        // exact on the axis-aligned rays
        for (i, r) in expected.iter().enumerate() {
            for j in [0, 4, 8, 12] {
                assert!((n.get(i, j) * r_max - r).abs() < 1e-9, "row {i} col {j}: {}", n.get(i, j) * r_max);
            }
        }
        // every row is near-constant and rows increase outward
        for i in 0..4 {
            for j in 0..16 {
                assert!((n.get(i, j) * r_max - expected[i]).abs() < 0.3);
            }
        }
    }

    #[test]
    fn mask_validity_uses_nearest_pixel() {
        let img = GrayImage::zeros(64, 64);
        let mask = BinaryMask::from_fn(64, 64, |x, _| x >= 32);
        let c = |r| Circle::new(32.0, 32.0, r).unwrap();
        let n = normalize(&img, &mask, &c(5.0), &c(15.0), 2, 8).unwrap();
        // column 0 points along +x, column 4 along -x
        assert!(n.is_valid(0, 0) && n.is_valid(1, 0));
        assert!(!n.is_valid(0, 4) && !n.is_valid(1, 4));
    }

    #[test]
    fn geometry_errors() {
        let img = GrayImage::zeros(40, 40);
        let mask = BinaryMask::full(40, 40);
        let c = |r| Circle::new(20.0, 20.0, r).unwrap();
        assert!(normalize(&img, &mask, &c(10.0), &c(10.0), 4, 8).is_err());
        assert!(normalize(&img, &mask, &c(5.0), &c(25.0), 4, 8).is_err());
        assert!(normalize(&img, &mask, &c(5.0), &c(10.0), 0, 8).is_err());
    }
}
