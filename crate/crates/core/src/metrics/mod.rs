//! Segmentation and localization evaluation.

mod report;

pub use report::{aggregate, aggregate_with_thresholds, EvalReport, ImageEval, LocScores, SegScores};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{check_same_dims, BinaryMask, Point};

/// Pixel confusion counts with the ground truth as reference.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl Confusion {
    pub fn of(gt: &BinaryMask, pred: &BinaryMask) -> Result<Self> {
        check_same_dims(gt.dims(), pred.dims())?;
        let mut c = Confusion::default();
        for (&g, &p) in gt.bits().iter().zip(pred.bits()) {
            match (g, p) {
                (true, true) => c.tp += 1,
                (false, true) => c.fp += 1,
                (false, false) => c.tn += 1,
                (true, false) => c.fn_ += 1,
            }
        }
        Ok(c)
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }

    /// Fraction of disagreeing pixels.
    pub fn e1(&self) -> f64 {
        (self.fp + self.fn_) as f64 / self.total() as f64
    }

    /// Mean of false-positive and false-negative rates; a rate whose
    /// denominator is zero counts as 0.
    pub fn e2(&self) -> f64 {
        let fpr = ratio_or(self.fp, self.fp + self.tn, 0.0);
        let fnr = ratio_or(self.fn_, self.fn_ + self.tp, 0.0);
        (fpr + fnr) / 2.0
    }

    /// Foreground F-measure. Both masks empty scores 1.
    pub fn f1(&self) -> f64 {
        if self.tp + self.fp + self.fn_ == 0 {
            return 1.0;
        }
        let p = ratio_or(self.tp, self.tp + self.fp, 0.0);
        let r = ratio_or(self.tp, self.tp + self.fn_, 0.0);
        if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    }

    /// Mean of foreground and background IoU; an empty union counts as 1.
    pub fn miou(&self) -> f64 {
        let fg = ratio_or(self.tp, self.tp + self.fp + self.fn_, 1.0);
        let bg = ratio_or(self.tn, self.tn + self.fp + self.fn_, 1.0);
        (fg + bg) / 2.0
    }
}

fn ratio_or(num: usize, den: usize, fallback: f64) -> f64 {
    if den == 0 {
        fallback
    } else {
        num as f64 / den as f64
    }
}

pub fn e1(gt: &BinaryMask, pred: &BinaryMask) -> Result<f64> {
    Ok(Confusion::of(gt, pred)?.e1())
}

pub fn e2(gt: &BinaryMask, pred: &BinaryMask) -> Result<f64> {
    Ok(Confusion::of(gt, pred)?.e2())
}

pub fn f1(gt: &BinaryMask, pred: &BinaryMask) -> Result<f64> {
    Ok(Confusion::of(gt, pred)?.f1())
}

pub fn miou(gt: &BinaryMask, pred: &BinaryMask) -> Result<f64> {
    Ok(Confusion::of(gt, pred)?.miou())
}

fn batch_mean(pairs: &[(BinaryMask, BinaryMask)], f: impl Fn(&Confusion) -> f64) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::EmptyInput("mask pairs"));
    }
    let mut sum = 0.0;
    for (g, p) in pairs {
        sum += f(&Confusion::of(g, p)?);
    }
    Ok(sum / pairs.len() as f64)
}

/// Mean of per-image E1 over `(gt, pred)` pairs.
pub fn batch_e1(pairs: &[(BinaryMask, BinaryMask)]) -> Result<f64> {
    batch_mean(pairs, Confusion::e1)
}

pub fn batch_e2(pairs: &[(BinaryMask, BinaryMask)]) -> Result<f64> {
    batch_mean(pairs, Confusion::e2)
}

/// Directed sup-inf distance, with early exit once a point is known not to
/// raise the running maximum.
fn directed_sq(a: &[Point], b: &[Point]) -> f64 {
    let mut cmax = 0.0f64;
    for p in a {
        let mut cmin = f64::INFINITY;
        for q in b {
            let d = p.distance_squared(*q);
            if d < cmin {
                cmin = d;
                if cmin < cmax {
                    break;
                }
            }
        }
        if cmin > cmax {
            cmax = cmin;
        }
    }
    cmax
}

/// Symmetric Hausdorff distance between two point sets.
pub fn hausdorff(g: &[Point], d: &[Point]) -> Result<f64> {
    if g.is_empty() || d.is_empty() {
        return Err(Error::EmptyInput("hausdorff point set"));
    }
    Ok(directed_sq(g, d).max(directed_sq(d, g)).sqrt())
}

/// `0, 0.5, …, 30` pixels.
pub fn default_thresholds() -> Vec<f64> {
    (0..=60).map(|i| i as f64 * 0.5).collect()
}

/// Fraction of `errors` at or below each threshold.
pub fn success_curve(errors: &[f64], thresholds: &[f64]) -> Vec<(f64, f64)> {
    thresholds
        .iter()
        .map(|&t| {
            let rate = if errors.is_empty() {
                0.0
            } else {
                errors.iter().filter(|&&e| e <= t).count() as f64 / errors.len() as f64
            };
            (t, rate)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Circle;
    use proptest::prelude::*;

    fn m(w: usize, bits: &[u8]) -> BinaryMask {
        BinaryMask::new(w, bits.len() / w, bits.iter().map(|&b| b == 1).collect()).unwrap()
    }

    #[test]
    fn e1_examples() {
        let gt = BinaryMask::from_fn(4, 4, |x, _| x < 2);
        assert_eq!(e1(&gt, &gt).unwrap(), 0.0);
        let mut pred = gt.clone();
        pred.set(0, 0, false);
        pred.set(3, 3, true);
        assert_eq!(e1(&gt, &pred).unwrap(), 0.125);
        assert_eq!(e1(&gt, &gt.complement()).unwrap(), 1.0);
    }

    #[test]
    fn e2_examples() {
        let gt = BinaryMask::from_fn(4, 4, |x, _| x < 2);
        assert_eq!(e2(&gt, &gt).unwrap(), 0.0);
        assert_eq!(e2(&gt, &BinaryMask::full(4, 4)).unwrap(), 0.5);
        assert_eq!(e2(&gt, &gt.complement()).unwrap(), 1.0);
        // all-background gt: false-negative rate undefined, counts as 0
        assert_eq!(e2(&BinaryMask::empty(4, 4), &BinaryMask::full(4, 4)).unwrap(), 0.5);
    }

    #[test]
    fn f1_and_miou_examples() {
        let gt = BinaryMask::from_fn(4, 4, |x, y| y < 2 && x < 4);
        assert_eq!(f1(&gt, &gt).unwrap(), 1.0);
        assert_eq!(miou(&gt, &gt).unwrap(), 1.0);
        assert_eq!(f1(&gt, &BinaryMask::empty(4, 4)).unwrap(), 0.0);

        // 8 gt pixels, 8 predicted, 4 shared
        let pred = BinaryMask::from_fn(4, 4, |_, y| y == 1 || y == 2);
        let c = Confusion::of(&gt, &pred).unwrap();
        assert_eq!((c.tp, c.fp, c.fn_, c.tn), (4, 4, 4, 4));
        assert_eq!(c.f1(), 0.5);
        assert_eq!(c.miou(), (1.0 / 3.0 + 1.0 / 3.0) / 2.0);

        let empty = BinaryMask::empty(3, 3);
        assert_eq!(f1(&empty, &empty).unwrap(), 1.0);
        assert_eq!(miou(&empty, &empty).unwrap(), 1.0);
        assert_eq!(f1(&empty, &m(3, &[0, 0, 0, 0, 1, 0, 0, 0, 0])).unwrap(), 0.0);
    }

    #[test]
    fn mismatched_dims() {
        assert!(e1(&BinaryMask::empty(3, 3), &BinaryMask::empty(3, 4)).is_err());
        assert!(batch_e1(&[]).is_err());
    }

    #[test]
    fn batch_is_mean_of_rates() {
        let gt = BinaryMask::empty(2, 2);
        let p1 = m(2, &[1, 0, 0, 0]);
        let p2 = m(2, &[1, 1, 1, 0]);
        assert_eq!(batch_e1(&[(gt.clone(), p1), (gt, p2)]).unwrap(), 0.5);
    }

    #[test]
    fn hausdorff_examples() {
        let a = [Point::new(0.0, 0.0)];
        let b = [Point::new(3.0, 4.0)];
        assert_eq!(hausdorff(&a, &b).unwrap(), 5.0);
        let c10 = Circle::new(0.0, 0.0, 10.0).unwrap().densify(360);
        let c12 = Circle::new(0.0, 0.0, 12.0).unwrap().densify(360);
        assert_eq!(hausdorff(&c10, &c10).unwrap(), 0.0);
        assert!((hausdorff(&c10, &c12).unwrap() - 2.0).abs() <= 0.02);
        assert!(hausdorff(&[], &b).is_err());
    }

    #[test]
    fn success_curve_examples() {
        let e = [1.0, 2.0, 3.0];
        let c = success_curve(&e, &[0.5, 2.0, 3.0, 10.0]);
        assert_eq!(c, vec![(0.5, 0.0), (2.0, 2.0 / 3.0), (3.0, 1.0), (10.0, 1.0)]);
        let t = default_thresholds();
        assert_eq!(t.len(), 61);
        assert_eq!((t[0], t[1], t[60]), (0.0, 0.5, 30.0));
    }

    fn brute_hausdorff(a: &[Point], b: &[Point]) -> f64 {
        let dir = |p: &[Point], q: &[Point]| {
            let mut worst = 0.0f64;
            for x in p {
                let mut best = f64::INFINITY;
                for y in q {
                    let (dx, dy) = (x.x - y.x, x.y - y.y);
                    best = best.min((dx * dx + dy * dy).sqrt());
                }
                worst = worst.max(best);
            }
            worst
        };
        dir(a, b).max(dir(b, a))
    }

    fn points(max: usize) -> impl Strategy<Value = Vec<Point>> {
        prop::collection::vec((-50.0f64..50.0, -50.0f64..50.0).prop_map(Point::from), 1..max)
    }

    proptest! {
        #[test]
        fn hausdorff_matches_brute_force(a in points(60), b in points(60)) {
            let h = hausdorff(&a, &b).unwrap();
            prop_assert_eq!(h, brute_hausdorff(&a, &b));
            prop_assert_eq!(h, hausdorff(&b, &a).unwrap());
        }

        #[test]
        fn e1_symmetric(bits in prop::collection::vec((any::<bool>(), any::<bool>()), 16)) {
            let (g, p): (Vec<bool>, Vec<bool>) = bits.into_iter().unzip();
            let g = BinaryMask::new(4, 4, g).unwrap();
            let p = BinaryMask::new(4, 4, p).unwrap();
            prop_assert_eq!(e1(&g, &p).unwrap(), e1(&p, &g).unwrap());
            for v in [e1(&g, &p).unwrap(), e2(&g, &p).unwrap(), f1(&g, &p).unwrap(), miou(&g, &p).unwrap()] {
                prop_assert!((0.0..=1.0).contains(&v));
            }
        }

        #[test]
        fn success_curve_monotone(errors in prop::collection::vec(0.0f64..40.0, 0..50)) {
            let c = success_curve(&errors, &default_thresholds());
            for w in c.windows(2) {
                prop_assert!(w[0].1 <= w[1].1);
            }
            prop_assert!(c.iter().all(|&(_, r)| (0.0..=1.0).contains(&r)));
        }
    }
}
