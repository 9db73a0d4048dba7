//! Training objectives for the four prediction maps, with analytic
//! per-pixel gradients.
//!
//! Probabilities are clamped to `[eps, 1 - eps]` before any logarithm; the
//! reported gradient is the analytic derivative evaluated at the clamped
//! probability.

mod gradcheck;

pub use gradcheck::{finite_difference_error, run_gradcheck, GradcheckEntry, GradcheckOptions, GradcheckReport, LossKind};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{check_same_dims, BinaryMask, GrayImage};
use crate::localization::ProbMapSet;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossConfig {
    /// Focal-loss weight, applied to both classes.
    pub alpha: f64,
    /// Focal-loss focusing exponent.
    pub gamma: f64,
    pub lambda_pupil: f64,
    pub lambda_seg: f64,
    pub lambda_edge: f64,
    /// Probability clamp used before logarithms.
    pub eps: f64,
}

impl Default for LossConfig {
    fn default() -> Self {
        Self { alpha: 0.95, gamma: 2.0, lambda_pupil: 10.0, lambda_seg: 1.0, lambda_edge: 1.0, eps: 1e-7 }
    }
}

impl LossConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!("alpha {} outside (0, 1)", self.alpha)));
        }
        if !(self.gamma >= 0.0) {
            return Err(Error::Config(format!("gamma {} must be >= 0", self.gamma)));
        }
        if [self.lambda_pupil, self.lambda_seg, self.lambda_edge].iter().any(|l| !(*l >= 0.0)) {
            return Err(Error::Config("task weights must be >= 0".into()));
        }
        if !(self.eps > 0.0 && self.eps < 0.5) {
            return Err(Error::Config(format!("eps {} outside (0, 0.5)", self.eps)));
        }
        Ok(())
    }
}

/// Loss value plus `∂L/∂p` for every input map, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct LossResult {
    pub value: f64,
    pub grads: Vec<Vec<f64>>,
    pub width: usize,
    pub height: usize,
}

/// Binary targets for the four maps.
#[derive(Debug, Clone, PartialEq)]
pub struct LossTargets {
    pub pupil_center: BinaryMask,
    pub mask: BinaryMask,
    pub inner_boundary: BinaryMask,
    pub outer_boundary: BinaryMask,
}

fn clamp(p: f64, eps: f64) -> f64 {
    p.clamp(eps, 1.0 - eps)
}

/// Focal loss over raw probability and target slices.
pub(crate) fn focal_terms(p: &[f64], gt: &[bool], cfg: &LossConfig) -> (f64, Vec<f64>) {
    let mut value = 0.0;
    let grad = p
        .iter()
        .zip(gt)
        .map(|(&p, &g)| {
            let q = clamp(p, cfg.eps);
            let (pt, sign) = if g { (q, 1.0) } else { (1.0 - q, -1.0) };
            let focus = (1.0 - pt).powf(cfg.gamma);
            value += -cfg.alpha * focus * pt.ln();
            let d_focus = if cfg.gamma == 0.0 { 0.0 } else { cfg.gamma * (1.0 - pt).powf(cfg.gamma - 1.0) * pt.ln() };
            sign * cfg.alpha * (d_focus - focus / pt)
        })
        .collect();
    (value, grad)
}

pub(crate) fn bce_terms(s: &[f64], gt: &[bool], cfg: &LossConfig) -> (f64, Vec<f64>) {
    let mut value = 0.0;
    let grad = s
        .iter()
        .zip(gt)
        .map(|(&s, &g)| {
            let q = clamp(s, cfg.eps);
            let g = if g { 1.0 } else { 0.0 };
            value += -(g * q.ln() + (1.0 - g) * (1.0 - q).ln());
            (q - g) / (q * (1.0 - q))
        })
        .collect();
    (value, grad)
}

/// Class-balanced cross-entropy for one edge map; β is the fraction of
/// non-edge target pixels.
pub(crate) fn balanced_terms(e: &[f64], gt: &[bool], cfg: &LossConfig) -> (f64, Vec<f64>) {
    let beta = if gt.is_empty() { 1.0 } else { gt.iter().filter(|&&g| !g).count() as f64 / gt.len() as f64 };
    let mut value = 0.0;
    let grad = e
        .iter()
        .zip(gt)
        .map(|(&e, &g)| {
            let q = clamp(e, cfg.eps);
            if g {
                value += -beta * q.ln();
                -beta / q
            } else {
                value += -(1.0 - beta) * (1.0 - q).ln();
                (1.0 - beta) / (1.0 - q)
            }
        })
        .collect();
    (value, grad)
}

fn check(p: &GrayImage, gt: &BinaryMask) -> Result<()> {
    check_same_dims(p.dims(), gt.dims())
}

/// Focal loss `Σ -α (1 - p̃)^γ log p̃` with `p̃ = p` on positives and `1 - p`
/// on negatives.
pub fn focal_loss(p: &GrayImage, gt: &BinaryMask, cfg: &LossConfig) -> Result<LossResult> {
    check(p, gt)?;
    let (value, grad) = focal_terms(p.data(), gt.bits(), cfg);
    Ok(LossResult { value, grads: vec![grad], width: p.width(), height: p.height() })
}

/// Summed binary cross-entropy.
pub fn seg_bce_loss(s: &GrayImage, gt: &BinaryMask, cfg: &LossConfig) -> Result<LossResult> {
    check(s, gt)?;
    let (value, grad) = bce_terms(s.data(), gt.bits(), cfg);
    Ok(LossResult { value, grads: vec![grad], width: s.width(), height: s.height() })
}

/// Class-balanced edge loss summed over the inner and outer boundary maps,
/// each balanced by its own target's non-edge fraction.
pub fn edge_balanced_loss(
    e1: &GrayImage,
    e2: &GrayImage,
    gt1: &BinaryMask,
    gt2: &BinaryMask,
    cfg: &LossConfig,
) -> Result<LossResult> {
    check(e1, gt1)?;
    check(e2, gt2)?;
    check_same_dims(e1.dims(), e2.dims())?;
    let (v1, g1) = balanced_terms(e1.data(), gt1.bits(), cfg);
    let (v2, g2) = balanced_terms(e2.data(), gt2.bits(), cfg);
    Ok(LossResult { value: v1 + v2, grads: vec![g1, g2], width: e1.width(), height: e1.height() })
}

/// `λ_pupil·focal + λ_seg·bce + λ_edge·edge`; gradients in map order
/// (pupil center, mask, inner, outer).
pub fn joint_loss(maps: &ProbMapSet, targets: &LossTargets, cfg: &LossConfig) -> Result<LossResult> {
    cfg.validate()?;
    let pupil = focal_loss(&maps.pupil_center, &targets.pupil_center, cfg)?;
    let seg = seg_bce_loss(&maps.mask, &targets.mask, cfg)?;
    let edge = edge_balanced_loss(
        &maps.inner_boundary,
        &maps.outer_boundary,
        &targets.inner_boundary,
        &targets.outer_boundary,
        cfg,
    )?;
    let scale = |g: &[f64], l: f64| g.iter().map(|v| v * l).collect::<Vec<_>>();
    Ok(LossResult {
        value: cfg.lambda_pupil * pupil.value + cfg.lambda_seg * seg.value + cfg.lambda_edge * edge.value,
        grads: vec![
            scale(&pupil.grads[0], cfg.lambda_pupil),
            scale(&seg.grads[0], cfg.lambda_seg),
            scale(&edge.grads[0], cfg.lambda_edge),
            scale(&edge.grads[1], cfg.lambda_edge),
        ],
        width: pupil.width,
        height: pupil.height,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const LN2: f64 = std::f64::consts::LN_2;

    fn img(v: &[f64], w: usize) -> GrayImage {
        GrayImage::new(w, v.len() / w, v.to_vec()).unwrap()
    }

    fn mask(b: &[bool], w: usize) -> BinaryMask {
        BinaryMask::new(w, b.len() / w, b.to_vec()).unwrap()
    }

    #[test]
    fn defaults() {
        let c = LossConfig::default();
        assert_eq!((c.alpha, c.gamma, c.lambda_pupil, c.lambda_seg, c.lambda_edge), (0.95, 2.0, 10.0, 1.0, 1.0));
        assert!(c.validate().is_ok());
        assert!(LossConfig { alpha: 1.0, ..c }.validate().is_err());
        assert!(LossConfig { eps: 0.5, ..c }.validate().is_err());
    }

    #[test]
    fn focal_perfect_prediction() {
        let cfg = LossConfig::default();
        let gt = [true, false, false, true, false, false];
        let p: Vec<f64> = gt.iter().map(|&g| if g { 1.0 } else { 0.0 }).collect();
        let r = focal_loss(&img(&p, 3), &mask(&gt, 3), &cfg).unwrap();
        let bound = 6.0 * cfg.alpha * cfg.eps * cfg.eps * (1.0 - cfg.eps).ln().abs();
        assert!(r.value >= 0.0 && r.value <= bound, "{} > {bound}", r.value);
    }

    #[test]
    fn focal_single_pixel_values() {
        let cfg = LossConfig::default();
        let expected = 0.95 * 0.25 * LN2;
        assert!((expected - 0.16462).abs() < 1e-5);
        let pos = focal_loss(&img(&[0.5], 1), &mask(&[true], 1), &cfg).unwrap();
        let neg = focal_loss(&img(&[0.5], 1), &mask(&[false], 1), &cfg).unwrap();
        assert!((pos.value - expected).abs() < 1e-12);
        assert!((neg.value - expected).abs() < 1e-12);
        // gradients point in opposite directions with equal magnitude
        assert!((pos.grads[0][0] + neg.grads[0][0]).abs() < 1e-12);
        assert!(pos.grads[0][0] < 0.0);
    }

    #[test]
    fn bce_values() {
        let cfg = LossConfig::default();
        let r = seg_bce_loss(&img(&[0.5; 6], 3), &mask(&[true, false, true, false, false, true], 3), &cfg).unwrap();
        assert!((r.value - 6.0 * LN2).abs() < 1e-12);
        let r = seg_bce_loss(&img(&[0.9], 1), &mask(&[true], 1), &cfg).unwrap();
        assert!((r.value - 0.10536).abs() < 1e-5);
        assert!((r.grads[0][0] - (0.9 - 1.0) / (0.9 * 0.1)).abs() < 1e-12);
        let gt = [true, false, false, true];
        let r = seg_bce_loss(&img(&[1.0, 0.0, 0.0, 1.0], 2), &mask(&gt, 2), &cfg).unwrap();
        assert!(r.value < 1e-6);
    }

    #[test]
    fn edge_values() {
        let cfg = LossConfig::default();
        let e = img(&[0.5; 4], 2);
        let gt1 = mask(&[true, false, false, false], 2);
        let gt2 = mask(&[false; 4], 2);
        let r = edge_balanced_loss(&e, &e, &gt1, &gt2, &cfg).unwrap();
        assert!((r.value - 1.5 * LN2).abs() < 1e-12);
        assert!((r.value - 1.03972).abs() < 1e-5);
        // all non-edge target: beta = 1, non-edge weight 0
        let r = edge_balanced_loss(&e, &e, &gt2, &gt2, &cfg).unwrap();
        assert_eq!(r.value, 0.0);
        let perfect = img(&[1.0, 0.0, 0.0, 0.0], 2);
        let r = edge_balanced_loss(&perfect, &perfect, &gt1, &gt1, &cfg).unwrap();
        assert!(r.value < 1e-6);
    }

    fn random_maps(seed: u64) -> (ProbMapSet, LossTargets) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut m = || GrayImage::from_fn(5, 4, |_, _| rng.gen_range(0.05..0.95));
        let maps = ProbMapSet::new(m(), m(), m(), m()).unwrap();
        let t = || BinaryMask::from_fn(5, 4, |x, y| (x * 7 + y * 3 + seed as usize) % 4 == 0);
        (maps, LossTargets { pupil_center: t(), mask: t(), inner_boundary: t(), outer_boundary: t() })
    }

    #[test]
    fn joint_is_weighted_sum() {
        let cfg = LossConfig::default();
        let (maps, t) = random_maps(3);
        let a = focal_loss(&maps.pupil_center, &t.pupil_center, &cfg).unwrap().value;
        let b = seg_bce_loss(&maps.mask, &t.mask, &cfg).unwrap().value;
        let c = edge_balanced_loss(&maps.inner_boundary, &maps.outer_boundary, &t.inner_boundary, &t.outer_boundary, &cfg)
            .unwrap()
            .value;
        let j = joint_loss(&maps, &t, &cfg).unwrap();
        assert!((j.value - (10.0 * a + b + c)).abs() < 1e-12);
        assert_eq!(j.grads.len(), 4);

        let zero = LossConfig { lambda_pupil: 0.0, lambda_seg: 0.0, lambda_edge: 0.0, ..cfg };
        assert_eq!(joint_loss(&maps, &t, &zero).unwrap().value, 0.0);
    }

    #[test]
    fn joint_perfect_prediction() {
        let (_, t) = random_maps(5);
        let maps = ProbMapSet::new(
            t.pupil_center.to_gray(),
            t.mask.to_gray(),
            t.inner_boundary.to_gray(),
            t.outer_boundary.to_gray(),
        )
        .unwrap();
        assert!(joint_loss(&maps, &t, &LossConfig::default()).unwrap().value < 1e-5);
    }

    #[test]
    fn dimension_mismatch() {
        let cfg = LossConfig::default();
        assert!(focal_loss(&GrayImage::zeros(2, 2), &BinaryMask::empty(2, 3), &cfg).is_err());
        assert!(seg_bce_loss(&GrayImage::zeros(2, 2), &BinaryMask::empty(3, 2), &cfg).is_err());
    }

    proptest! {
        #[test]
        fn focal_gamma0_is_half_bce(
            px in prop::collection::vec((0.0f64..=1.0, any::<bool>()), 1..64)
        ) {
            let cfg = LossConfig { alpha: 0.5, gamma: 0.0, ..LossConfig::default() };
            let (p, g): (Vec<f64>, Vec<bool>) = px.into_iter().unzip();
            let (f, fg) = focal_terms(&p, &g, &cfg);
            let (b, bg) = bce_terms(&p, &g, &cfg);
            prop_assert!((f - 0.5 * b).abs() <= 1e-9);
            for (x, y) in fg.iter().zip(&bg) {
                prop_assert!((x - 0.5 * y).abs() <= 1e-9 * y.abs().max(1.0));
            }
        }

        #[test]
        fn losses_nonnegative_and_permutation_invariant(
            px in prop::collection::vec((0.0f64..=1.0, any::<bool>()), 2..64),
            rot in 0usize..64,
        ) {
            let cfg = LossConfig::default();
            let (p, g): (Vec<f64>, Vec<bool>) = px.into_iter().unzip();
            let k = rot % p.len();
            let mut p2 = p.clone();
            let mut g2 = g.clone();
            p2.rotate_left(k);
            g2.rotate_left(k);
            for f in [focal_terms, bce_terms, balanced_terms] {
                let (a, _) = f(&p, &g, &cfg);
                let (b, _) = f(&p2, &g2, &cfg);
                prop_assert!(a >= 0.0);
                prop_assert!((a - b).abs() <= 1e-9 * a.max(1.0));
            }
        }
    }
}
