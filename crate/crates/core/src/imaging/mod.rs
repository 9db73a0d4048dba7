//! Pixel-grid primitives shared by every stage.

mod components;
mod enclosing;
mod morphology;
pub mod pgm;

pub use components::{connected_components, max_area_region, Region};
pub use enclosing::min_enclosing_circle;
pub use morphology::{dilate_disk, disk_offsets};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A sub-pixel location in image coordinates (x to the right, y down).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance_squared(self, other: Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    pub fn distance(self, other: Point) -> f64 {
        self.distance_squared(other).sqrt()
    }
}

impl From<(f64, f64)> for Point {
    fn from((x, y): (f64, f64)) -> Self {
        Self { x, y }
    }
}

/// A circle with sub-pixel center. Constructed through [`Circle::new`] the
/// radius is strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Circle {
    pub cx: f64,
    pub cy: f64,
    pub r: f64,
}

impl Circle {
    pub fn new(cx: f64, cy: f64, r: f64) -> Result<Self> {
        if !(cx.is_finite() && cy.is_finite() && r.is_finite()) || r <= 0.0 {
            return Err(Error::DegenerateGeometry(format!(
                "circle ({cx}, {cy}, r={r}) needs finite values and r > 0"
            )));
        }
        Ok(Self { cx, cy, r })
    }

    pub fn center(&self) -> Point {
        Point::new(self.cx, self.cy)
    }

    /// Boundary point at angle `theta` (radians, measured from +x towards +y).
    pub fn point_at(&self, theta: f64) -> Point {
        Point::new(self.cx + self.r * theta.cos(), self.cy + self.r * theta.sin())
    }

    /// `n` boundary points at equal angular steps starting at angle 0.
    pub fn densify(&self, n: usize) -> Vec<Point> {
        (0..n)
            .map(|k| self.point_at(std::f64::consts::TAU * k as f64 / n as f64))
            .collect()
    }

    pub fn contains(&self, p: Point, tol: f64) -> bool {
        self.center().distance(p) <= self.r + tol
    }

    /// True when the centre lies inside a `width`×`height` image.
    pub fn center_inside(&self, width: usize, height: usize) -> bool {
        self.cx >= 0.0 && self.cy >= 0.0 && self.cx < width as f64 && self.cy < height as f64
    }

    /// True when the whole disk lies within the pixel extent
    /// `[-0.5, width - 0.5] × [-0.5, height - 0.5]`.
    pub fn fits_inside(&self, width: usize, height: usize) -> bool {
        self.cx - self.r >= -0.5
            && self.cy - self.r >= -0.5
            && self.cx + self.r <= width as f64 - 0.5
            && self.cy + self.r <= height as f64 - 0.5
    }
}

/// How [`GrayImage::bilinear`] treats samples outside the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Border {
    /// Pixels outside the image read as 0.
    Zero,
    /// Coordinates are clamped to the nearest edge pixel.
    Clamp,
}

/// Row-major grid of values in `[0, 1]`.
///
/// The 8-bit view used by threshold windows is `round(255 * value)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::Shape(format!(
                "gray image {width}x{height} needs {} values, got {}",
                width * height,
                data.len()
            )));
        }
        if let Some(v) = data.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidRange(format!("pixel value {v} outside [0, 1]")));
        }
        Ok(Self { width, height, data })
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self { width, height, data: vec![0.0; width * height] }
    }

    /// Builds an image from a per-pixel function; results are clamped to `[0, 1]`.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(clamp_unit(f(x, y)));
            }
        }
        Self { width, height, data }
    }

    pub fn from_levels(width: usize, height: usize, levels: &[u8]) -> Result<Self> {
        if levels.len() != width * height {
            return Err(Error::Shape(format!(
                "gray image {width}x{height} needs {} levels, got {}",
                width * height,
                levels.len()
            )));
        }
        let data = levels.iter().map(|&l| f64::from(l) / 255.0).collect();
        Ok(Self { width, height, data })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    /// Writes a pixel, clamping into `[0, 1]`.
    pub fn set(&mut self, x: usize, y: usize, value: f64) {
        self.data[y * self.width + x] = clamp_unit(value);
    }

    /// 8-bit level of one pixel.
    pub fn level(&self, x: usize, y: usize) -> u8 {
        to_level(self.get(x, y))
    }

    pub fn to_levels(&self) -> Vec<u8> {
        self.data.iter().map(|&v| to_level(v)).collect()
    }

    /// Applies `f` to every pixel value, clamping the result.
    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> Self {
        Self {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| clamp_unit(f(v))).collect(),
        }
    }

    /// Keeps values where `keep` is set, zero elsewhere.
    pub fn masked(&self, keep: &BinaryMask) -> Result<Self> {
        check_same_dims(self.dims(), keep.dims())?;
        let data = self
            .data
            .iter()
            .zip(keep.bits())
            .map(|(&v, &k)| if k { v } else { 0.0 })
            .collect();
        Ok(Self { width: self.width, height: self.height, data })
    }

    /// Bilinear interpolation with pixel centers at integer coordinates.
    pub fn bilinear(&self, x: f64, y: f64, border: Border) -> f64 {
        if self.data.is_empty() || !x.is_finite() || !y.is_finite() {
            return 0.0;
        }
        let x0 = x.floor();
        let y0 = y.floor();
        let fx = x - x0;
        let fy = y - y0;
        let (x0, y0) = (x0 as i64, y0 as i64);
        let v00 = self.at_border(x0, y0, border);
        let v10 = self.at_border(x0 + 1, y0, border);
        let v01 = self.at_border(x0, y0 + 1, border);
        let v11 = self.at_border(x0 + 1, y0 + 1, border);
        let top = v00 + (v10 - v00) * fx;
        let bottom = v01 + (v11 - v01) * fx;
        top + (bottom - top) * fy
    }

    fn at_border(&self, x: i64, y: i64, border: Border) -> f64 {
        let (w, h) = (self.width as i64, self.height as i64);
        match border {
            Border::Zero => {
                if x < 0 || y < 0 || x >= w || y >= h {
                    0.0
                } else {
                    self.data[(y * w + x) as usize]
                }
            }
            Border::Clamp => {
                let xc = x.clamp(0, w - 1);
                let yc = y.clamp(0, h - 1);
                self.data[(yc * w + xc) as usize]
            }
        }
    }
}

/// Row-major boolean grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != width * height {
            return Err(Error::Shape(format!(
                "mask {width}x{height} needs {} bits, got {}",
                width * height,
                bits.len()
            )));
        }
        Ok(Self { width, height, bits })
    }

    pub fn empty(width: usize, height: usize) -> Self {
        Self { width, height, bits: vec![false; width * height] }
    }

    pub fn full(width: usize, height: usize) -> Self {
        Self { width, height, bits: vec![true; width * height] }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut bits = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                bits.push(f(x, y));
            }
        }
        Self { width, height, bits }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.bits[y * self.width + x] = value;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    /// Coordinates of set pixels in scan order.
    pub fn set_pixels(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let w = self.width;
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(i, _)| (i % w, i / w))
    }

    pub fn is_subset_of(&self, other: &BinaryMask) -> bool {
        self.dims() == other.dims() && self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b)
    }

    pub fn complement(&self) -> Self {
        Self {
            width: self.width,
            height: self.height,
            bits: self.bits.iter().map(|b| !b).collect(),
        }
    }

    /// Foreground as 1.0, background as 0.0.
    pub fn to_gray(&self) -> GrayImage {
        GrayImage {
            width: self.width,
            height: self.height,
            data: self.bits.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect(),
        }
    }
}

/// Pixels whose 8-bit level lies in `lo..=hi`.
pub fn threshold_window(img: &GrayImage, lo: u8, hi: u8) -> Result<BinaryMask> {
    if lo > hi {
        return Err(Error::InvalidRange(format!("threshold window [{lo}, {hi}] has lo > hi")));
    }
    let bits = img.data.iter().map(|&v| (lo..=hi).contains(&to_level(v))).collect();
    Ok(BinaryMask { width: img.width, height: img.height, bits })
}

pub(crate) fn check_same_dims(a: (usize, usize), b: (usize, usize)) -> Result<()> {
    if a != b {
        return Err(Error::Shape(format!(
            "dimension mismatch: {}x{} vs {}x{}",
            a.0, a.1, b.0, b.1
        )));
    }
    Ok(())
}

fn to_level(v: f64) -> u8 {
    (255.0 * v).round().clamp(0.0, 255.0) as u8
}

fn clamp_unit(v: f64) -> f64 {
    if v.is_nan() {
        0.0
    } else {
        v.clamp(0.0, 1.0)
    }
}
