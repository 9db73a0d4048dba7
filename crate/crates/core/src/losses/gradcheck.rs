//! Central finite-difference verification of the analytic loss gradients.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{balanced_terms, bce_terms, focal_terms, LossConfig};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossKind {
    Focal,
    SegBce,
    EdgeBalanced,
    Joint,
}

impl LossKind {
    pub const ALL: [LossKind; 4] = [LossKind::Focal, LossKind::SegBce, LossKind::EdgeBalanced, LossKind::Joint];

    pub fn name(self) -> &'static str {
        match self {
            LossKind::Focal => "focal",
            LossKind::SegBce => "seg_bce",
            LossKind::EdgeBalanced => "edge_balanced",
            LossKind::Joint => "joint",
        }
    }

    fn n_maps(self) -> usize {
        match self {
            LossKind::Focal | LossKind::SegBce => 1,
            LossKind::EdgeBalanced => 2,
            LossKind::Joint => 4,
        }
    }

    /// Value and per-map gradients for `maps` against `targets`.
    fn eval(self, maps: &[Vec<f64>], targets: &[Vec<bool>], cfg: &LossConfig) -> (f64, Vec<Vec<f64>>) {
        match self {
            LossKind::Focal => {
                let (v, g) = focal_terms(&maps[0], &targets[0], cfg);
                (v, vec![g])
            }
            LossKind::SegBce => {
                let (v, g) = bce_terms(&maps[0], &targets[0], cfg);
                (v, vec![g])
            }
            LossKind::EdgeBalanced => {
                let (v1, g1) = balanced_terms(&maps[0], &targets[0], cfg);
                let (v2, g2) = balanced_terms(&maps[1], &targets[1], cfg);
                (v1 + v2, vec![g1, g2])
            }
            LossKind::Joint => {
                let (vp, gp) = focal_terms(&maps[0], &targets[0], cfg);
                let (vs, gs) = bce_terms(&maps[1], &targets[1], cfg);
                let (v1, g1) = balanced_terms(&maps[2], &targets[2], cfg);
                let (v2, g2) = balanced_terms(&maps[3], &targets[3], cfg);
                let sc = |g: Vec<f64>, l: f64| g.into_iter().map(|x| x * l).collect::<Vec<_>>();
                (
                    cfg.lambda_pupil * vp + cfg.lambda_seg * vs + cfg.lambda_edge * (v1 + v2),
                    vec![sc(gp, cfg.lambda_pupil), sc(gs, cfg.lambda_seg), sc(g1, cfg.lambda_edge), sc(g2, cfg.lambda_edge)],
                )
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradcheckOptions {
    pub seed: u64,
    pub instances: usize,
    pub side: usize,
    pub step: f64,
    pub tolerance: f64,
    /// Scales this loss's analytic gradient by 1.001; used as a negative control.
    pub corrupt: Option<LossKind>,
}

impl Default for GradcheckOptions {
    fn default() -> Self {
        Self { seed: 0, instances: 20, side: 8, step: 1e-4, tolerance: 1e-4, corrupt: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradcheckEntry {
    pub loss: LossKind,
    pub max_rel_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradcheckReport {
    pub entries: Vec<GradcheckEntry>,
    pub tolerance: f64,
}

impl GradcheckReport {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.max_rel_error < self.tolerance)
    }
}

/// Largest relative error between `analytic` gradients and central
/// differences of `value` with step `h`, over every pixel of every map.
pub fn finite_difference_error(
    maps: &[Vec<f64>],
    analytic: &[Vec<f64>],
    h: f64,
    value: impl Fn(&[Vec<f64>]) -> f64,
) -> f64 {
    let mut work = maps.to_vec();
    let mut worst = 0.0f64;
    for m in 0..maps.len() {
        for j in 0..maps[m].len() {
            let orig = work[m][j];
            work[m][j] = orig + h;
            let up = value(&work);
            work[m][j] = orig - h;
            let down = value(&work);
            work[m][j] = orig;
            let numeric = (up - down) / (2.0 * h);
            let a = analytic[m][j];
            let denom = a.abs().max(numeric.abs()).max(1e-8);
            worst = worst.max((a - numeric).abs() / denom);
        }
    }
    worst
}

/// Checks all four losses on seeded random instances with probabilities in
/// `[0.05, 0.95]`.
pub fn run_gradcheck(opts: &GradcheckOptions) -> Result<GradcheckReport> {
    let cfg = LossConfig::default();
    cfg.validate()?;
    let n = opts.side * opts.side;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let instances: Vec<(Vec<Vec<f64>>, Vec<Vec<bool>>)> = (0..opts.instances)
        .map(|_| {
            let maps = (0..4).map(|_| (0..n).map(|_| rng.gen_range(0.05..=0.95)).collect()).collect();
            let targets = (0..4).map(|_| (0..n).map(|_| rng.gen_bool(0.3)).collect()).collect();
            (maps, targets)
        })
        .collect();

    let mut entries = Vec::new();
    for kind in LossKind::ALL {
        let k = kind.n_maps();
        let mut worst = 0.0f64;
        for (maps, targets) in &instances {
            // edge-only checks use the two boundary maps
            let (maps, targets) = match kind {
                LossKind::Focal => (&maps[..1], &targets[..1]),
                LossKind::SegBce => (&maps[1..2], &targets[1..2]),
                LossKind::EdgeBalanced => (&maps[2..4], &targets[2..4]),
                LossKind::Joint => (&maps[..], &targets[..]),
            };
            debug_assert_eq!(maps.len(), k);
            let (_, mut grads) = kind.eval(maps, targets, &cfg);
            if opts.corrupt == Some(kind) {
                grads.iter_mut().flatten().for_each(|g| *g *= 1.001);
            }
            let err = finite_difference_error(maps, &grads, opts.step, |m| kind.eval(m, targets, &cfg).0);
            worst = worst.max(err);
        }
        entries.push(GradcheckEntry { loss: kind, max_rel_error: worst });
    }
    Ok(GradcheckReport { entries, tolerance: opts.tolerance })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_suite_passes() {
        let report = run_gradcheck(&GradcheckOptions::default()).unwrap();
        assert_eq!(report.entries.len(), 4);
        for e in &report.entries {
            assert!(e.max_rel_error < 1e-4, "{}: {}", e.loss.name(), e.max_rel_error);
        }
        assert!(report.passed());
    }

    #[test]
    fn broken_gradient_is_caught() {
        let opts = GradcheckOptions { corrupt: Some(LossKind::SegBce), instances: 2, ..Default::default() };
        let report = run_gradcheck(&opts).unwrap();
        assert!(!report.passed());
        let bad: Vec<_> = report.entries.iter().filter(|e| e.max_rel_error >= 1e-4).map(|e| e.loss).collect();
        assert_eq!(bad, vec![LossKind::SegBce]);
    }
}
