//! Seeded synthetic eyes with exact ground truth.
//!
//! Each case has a textured eye image, its annotation, and a set of
//! probability maps built from the annotation and then corrupted the way
//! network outputs typically are: thick boundaries, spurious high-intensity
//! blobs, additive noise and an upper-eyelid occlusion. Everything is a pure
//! function of the [`SynthSpec`], so the same spec always yields the same
//! bytes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{dilate_disk, BinaryMask, Circle, GrayImage, Point};
use crate::localization::ProbMapSet;

/// Radius of the disk used for dilating point and edge annotations.
pub const GT_DILATION_RADIUS: usize = 3;

const STREAM_TEXTURE: u64 = 1;
const STREAM_SENSOR: u64 = 2;
const STREAM_CORRUPTION: u64 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorruptionSpec {
    /// Boundary half-thickness in pixels (disk dilation radius of the thin circle).
    pub edge_width: usize,
    pub blob_count: usize,
    pub blob_intensity: f64,
    pub map_noise_sigma: f64,
    /// Fraction of the outer circle's height hidden under an upper eyelid.
    pub occlusion_fraction: f64,
}

impl CorruptionSpec {
    pub const fn none() -> Self {
        Self { edge_width: 0, blob_count: 0, blob_intensity: 0.0, map_noise_sigma: 0.0, occlusion_fraction: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.blob_intensity) {
            return Err(Error::Config(format!("blob_intensity {} outside [0, 1]", self.blob_intensity)));
        }
        if !(self.map_noise_sigma >= 0.0 && self.map_noise_sigma.is_finite()) {
            return Err(Error::Config(format!("map_noise_sigma {} must be >= 0", self.map_noise_sigma)));
        }
        if !(0.0..=1.0).contains(&self.occlusion_fraction) {
            return Err(Error::Config(format!("occlusion_fraction {} outside [0, 1]", self.occlusion_fraction)));
        }
        Ok(())
    }
}

impl Default for CorruptionSpec {
    fn default() -> Self {
        Self { edge_width: 3, blob_count: 5, blob_intensity: 0.9, map_noise_sigma: 0.05, occlusion_fraction: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub width: usize,
    pub height: usize,
    pub pupil_center: Point,
    pub inner_r: f64,
    pub outer_r: f64,
    pub texture_seed: u64,
    pub corruption: CorruptionSpec,
}

impl SynthSpec {
    /// Random geometry on a `width`×`height` canvas, drawn from `seed`; the
    /// texture uses the same seed.
    pub fn random(seed: u64, width: usize, height: usize, corruption: CorruptionSpec) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let short = width.min(height) as f64;
        let outer_r = rng.gen_range(0.28..0.36) * short;
        let inner_r = rng.gen_range(0.3..0.5) * outer_r;
        let jitter = (0.5 * short - outer_r - 4.0).max(0.0);
        let mut offset = || if jitter > 0.0 { rng.gen_range(-jitter..jitter) } else { 0.0 };
        let cx = width as f64 / 2.0 + offset();
        let cy = height as f64 / 2.0 + offset();
        Self { width, height, pupil_center: Point::new(cx, cy), inner_r, outer_r, texture_seed: seed, corruption }
    }

    pub fn inner(&self) -> Circle {
        Circle { cx: self.pupil_center.x, cy: self.pupil_center.y, r: self.inner_r }
    }

    pub fn outer(&self) -> Circle {
        Circle { cx: self.pupil_center.x, cy: self.pupil_center.y, r: self.outer_r }
    }

    pub fn validate(&self) -> Result<()> {
        self.corruption.validate()?;
        if !(self.inner_r > 0.0 && self.inner_r < self.outer_r) {
            return Err(Error::Config(format!(
                "need 0 < inner_r < outer_r, got {} and {}",
                self.inner_r, self.outer_r
            )));
        }
        let c = self.pupil_center;
        let margin = 2.0;
        if c.x - self.outer_r < margin
            || c.y - self.outer_r < margin
            || c.x + self.outer_r > self.width as f64 - 1.0 - margin
            || c.y + self.outer_r > self.height as f64 - 1.0 - margin
        {
            return Err(Error::Config("outer circle must stay 2 px inside the image".into()));
        }
        Ok(())
    }

    fn occlusion_line(&self) -> Option<f64> {
        let f = self.corruption.occlusion_fraction;
        (f > 0.0).then(|| self.pupil_center.y - self.outer_r + 2.0 * self.outer_r * f)
    }
}

/// Annotation for one synthetic eye.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub mask: BinaryMask,
    pub inner: Circle,
    pub outer: Circle,
    pub pupil_center: Point,
}

impl GroundTruth {
    /// One-pixel-wide rasterization of the inner and outer circles.
    pub fn boundary_pixels(&self) -> (BinaryMask, BinaryMask) {
        let (w, h) = self.mask.dims();
        (rasterize_circle(&self.inner, w, h), rasterize_circle(&self.outer, w, h))
    }

    /// Training targets: center, inner and outer annotations dilated with a
    /// radius-3 disk, the region mask as is.
    pub fn loss_targets(&self) -> crate::losses::LossTargets {
        let (w, h) = self.mask.dims();
        let (inner, outer) = self.boundary_pixels();
        let mut center = BinaryMask::empty(w, h);
        let (px, py) = (self.pupil_center.x.round() as usize, self.pupil_center.y.round() as usize);
        if px < w && py < h {
            center.set(px, py, true);
        }
        crate::losses::LossTargets {
            pupil_center: dilate_disk(&center, GT_DILATION_RADIUS),
            mask: self.mask.clone(),
            inner_boundary: dilate_disk(&inner, GT_DILATION_RADIUS),
            outer_boundary: dilate_disk(&outer, GT_DILATION_RADIUS),
        }
    }
}

/// A spurious disk injected into the pupil-center and boundary maps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Blob {
    pub center: Point,
    pub radius: f64,
}

impl Blob {
    pub fn pixels(&self, width: usize, height: usize) -> Vec<(usize, usize)> {
        disk_pixels(self.center, self.radius, width, height)
    }
}

#[derive(Debug, Clone)]
pub struct SynthCase {
    pub image: GrayImage,
    pub gt: GroundTruth,
    pub maps: ProbMapSet,
    pub blobs: Vec<Blob>,
}

/// Thin circle: every pixel nearest to a densely sampled boundary point.
pub fn rasterize_circle(c: &Circle, width: usize, height: usize) -> BinaryMask {
    let mut m = BinaryMask::empty(width, height);
    let n = ((16.0 * std::f64::consts::PI * c.r).ceil() as usize).max(8);
    for p in c.densify(n) {
        let (x, y) = (p.x.round(), p.y.round());
        if x >= 0.0 && y >= 0.0 && (x as usize) < width && (y as usize) < height {
            m.set(x as usize, y as usize, true);
        }
    }
    m
}

fn disk_pixels(center: Point, radius: f64, width: usize, height: usize) -> Vec<(usize, usize)> {
    let x0 = (center.x - radius).floor().max(0.0) as usize;
    let y0 = (center.y - radius).floor().max(0.0) as usize;
    let x1 = ((center.x + radius).ceil() as usize).min(width.saturating_sub(1));
    let y1 = ((center.y + radius).ceil() as usize).min(height.saturating_sub(1));
    let mut out = Vec::new();
    for y in y0..=y1 {
        for x in x0..=x1 {
            if Point::new(x as f64, y as f64).distance(center) <= radius {
                out.push((x, y));
            }
        }
    }
    out
}

/// Iris texture defined in polar coordinates around the pupil center, so a
/// rotation is an exact angular offset.
struct Texture {
    waves: [(f64, i32, f64); 3],
    lattice: Vec<f64>,
}

const LATTICE_RADIAL: usize = 8;
const LATTICE_ANGULAR: usize = 96;

impl Texture {
    fn new(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(STREAM_TEXTURE);
        let mut wave = || {
            (rng.gen_range(1.0..4.0), rng.gen_range(6..40) * if rng.gen() { 1 } else { -1 }, rng.gen_range(0.0..std::f64::consts::TAU))
        };
        let waves = [wave(), wave(), wave()];
        let lattice = (0..LATTICE_RADIAL * LATTICE_ANGULAR).map(|_| rng.gen_range(-1.0..1.0)).collect();
        Self { waves, lattice }
    }

    /// Iris intensity at normalized radius `rho` in [0, 1] and angle `theta`.
    fn iris(&self, rho: f64, theta: f64) -> f64 {
        let mut v = 0.45;
        for &(f, m, phase) in &self.waves {
            v += 0.06 * (std::f64::consts::TAU * f * rho + f64::from(m) * theta + phase).sin();
        }
        // periodic bilinear lattice noise
        let a = theta.rem_euclid(std::f64::consts::TAU) / std::f64::consts::TAU * LATTICE_ANGULAR as f64;
        let r = rho.clamp(0.0, 1.0) * (LATTICE_RADIAL - 1) as f64;
        let (a0, r0) = (a.floor() as usize % LATTICE_ANGULAR, (r.floor() as usize).min(LATTICE_RADIAL - 2));
        let (fa, fr) = (a - a.floor(), r - r0 as f64);
        let a1 = (a0 + 1) % LATTICE_ANGULAR;
        let at = |ri: usize, ai: usize| self.lattice[ri * LATTICE_ANGULAR + ai];
        let lo = at(r0, a0) * (1.0 - fa) + at(r0, a1) * fa;
        let hi = at(r0 + 1, a0) * (1.0 - fa) + at(r0 + 1, a1) * fa;
        v + 0.2 * (lo * (1.0 - fr) + hi * fr)
    }
}

/// Generates one case.
pub fn generate(spec: &SynthSpec) -> Result<SynthCase> {
    generate_rotated(spec, 0.0)
}

/// Two cases with identical geometry whose textures differ by a rotation of
/// `degrees` about the pupil center.
pub fn make_rotated_pair(spec: &SynthSpec, degrees: f64) -> Result<(SynthCase, SynthCase)> {
    if degrees.abs() > 20.0 {
        return Err(Error::Config(format!("rotation {degrees} exceeds 20 degrees")));
    }
    Ok((generate_rotated(spec, 0.0)?, generate_rotated(spec, degrees)?))
}

/// Like [`generate`] with the texture rotated by `degrees` (positive turns
/// from +x towards +y). Sensor noise is re-drawn for every distinct angle.
pub fn generate_rotated(spec: &SynthSpec, degrees: f64) -> Result<SynthCase> {
    spec.validate()?;
    let (w, h) = (spec.width, spec.height);
    let c = spec.pupil_center;
    let occlusion = spec.occlusion_line();
    let occluded = |y: usize| occlusion.is_some_and(|cut| (y as f64) < cut);

    let texture = Texture::new(spec.texture_seed);
    let mut sensor = ChaCha8Rng::seed_from_u64(spec.texture_seed ^ degrees.to_bits());
    sensor.set_stream(STREAM_SENSOR);
    let sensor_noise = Normal::new(0.0, 0.015).expect("valid sigma");
    let rot = degrees.to_radians();
    let image = GrayImage::from_fn(w, h, |x, y| {
        let (dx, dy) = (x as f64 - c.x, y as f64 - c.y);
        let d = dx.hypot(dy);
        let base = if occluded(y) {
            0.55
        } else if d <= spec.inner_r {
            0.08
        } else if d > spec.outer_r {
            0.78
        } else {
            let rho = (d - spec.inner_r) / (spec.outer_r - spec.inner_r);
            texture.iris(rho, dy.atan2(dx) - rot)
        };
        base + sensor_noise.sample(&mut sensor)
    });

    let mask = BinaryMask::from_fn(w, h, |x, y| {
        let d = Point::new(x as f64, y as f64).distance(c);
        d > spec.inner_r && d <= spec.outer_r && !occluded(y)
    });
    let gt = GroundTruth { mask, inner: spec.inner(), outer: spec.outer(), pupil_center: c };

    let (thin_inner, thin_outer) = gt.boundary_pixels();
    let edge = |thin: &BinaryMask| {
        let thick = dilate_disk(thin, spec.corruption.edge_width);
        BinaryMask::from_fn(w, h, |x, y| thick.get(x, y) && !occluded(y)).to_gray()
    };
    let mut center_seed = BinaryMask::empty(w, h);
    center_seed.set(c.x.round() as usize, c.y.round() as usize, true);

    let mut channels = [
        dilate_disk(&center_seed, GT_DILATION_RADIUS).to_gray(),
        gt.mask.to_gray(),
        edge(&thin_inner),
        edge(&thin_outer),
    ];

    let mut rng = ChaCha8Rng::seed_from_u64(spec.texture_seed);
    rng.set_stream(STREAM_CORRUPTION);
    let blobs = place_blobs(spec, &mut rng);
    for blob in &blobs {
        for (x, y) in blob.pixels(w, h) {
            for ch in [0, 2, 3] {
                let v = channels[ch].get(x, y).max(spec.corruption.blob_intensity);
                channels[ch].set(x, y, v);
            }
        }
    }
    if spec.corruption.map_noise_sigma > 0.0 {
        let noise = Normal::new(0.0, spec.corruption.map_noise_sigma)
            .map_err(|e| Error::Config(e.to_string()))?;
        for ch in channels.iter_mut() {
            *ch = ch.map(|v| v + noise.sample(&mut rng));
        }
    }
    // keep maps exactly representable in the 32-bit map file format
    let channels = channels.map(|ch| ch.map(|v| v as f32 as f64));
    let image = image.map(|v| v as f32 as f64);

    Ok(SynthCase { image, gt, maps: ProbMapSet::from_channels(channels)?, blobs })
}

/// Blobs kept clear of both boundary bands, of the true center, and of each
/// other, so each one stays an isolated component after thresholding.
fn place_blobs(spec: &SynthSpec, rng: &mut ChaCha8Rng) -> Vec<Blob> {
    let c = spec.pupil_center;
    let band = spec.corruption.edge_width as f64 + 3.0;
    let mut blobs: Vec<Blob> = Vec::new();
    let mut attempts = 0;
    while blobs.len() < spec.corruption.blob_count && attempts < 10_000 {
        attempts += 1;
        let radius = rng.gen_range(2.5..5.0);
        let lo = radius + 1.0;
        let p = Point::new(
            rng.gen_range(lo..spec.width as f64 - 1.0 - lo),
            rng.gen_range(lo..spec.height as f64 - 1.0 - lo),
        );
        let d = p.distance(c);
        let clear = (d - spec.inner_r).abs() > radius + band
            && (d - spec.outer_r).abs() > radius + band
            && d > radius + GT_DILATION_RADIUS as f64 + 4.0
            && blobs.iter().all(|b| b.center.distance(p) > b.radius + radius + 3.0);
        if clear {
            blobs.push(Blob { center: p, radius });
        }
    }
    blobs
}
