use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationStats {
    pub eer: f64,
    pub di: f64,
    pub genuine_scores: Vec<f64>,
    pub impostor_scores: Vec<f64>,
}

fn rate(count: usize, n: usize) -> f64 {
    count as f64 / n as f64
}

/// Equal error rate for distance scores (accept when `score ≤ t`).
///
/// FAR and FRR are evaluated at `-∞` and at every distinct score; the EER is
/// read off by linear interpolation where `FAR - FRR` first becomes
/// non-negative.
pub fn equal_error_rate(genuine: &[f64], impostor: &[f64]) -> Result<f64> {
    if genuine.is_empty() || impostor.is_empty() {
        return Err(Error::EmptyInput("score list"));
    }
    let mut g = genuine.to_vec();
    let mut im = impostor.to_vec();
    g.sort_by(f64::total_cmp);
    im.sort_by(f64::total_cmp);
    let mut thresholds: Vec<f64> = g.iter().chain(&im).copied().collect();
    thresholds.sort_by(f64::total_cmp);
    thresholds.dedup();

    let (mut prev_far, mut prev_frr) = (0.0, 1.0);
    let (mut gi, mut ii) = (0, 0);
    for t in thresholds {
        while gi < g.len() && g[gi] <= t {
            gi += 1;
        }
        while ii < im.len() && im[ii] <= t {
            ii += 1;
        }
        let far = rate(ii, im.len());
        let frr = rate(g.len() - gi, g.len());
        let d = far - frr;
        if d >= 0.0 {
            let d_prev = prev_far - prev_frr;
            let lambda = -d_prev / (d - d_prev);
            return Ok(prev_far + lambda * (far - prev_far));
        }
        prev_far = far;
        prev_frr = frr;
    }
    unreachable!("FAR reaches 1 and FRR reaches 0 at the largest score")
}

fn mean_var(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mu = v.iter().sum::<f64>() / n;
    let var = if v.len() > 1 { v.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    (mu, var)
}

/// Decidability index `|μg - μi| / sqrt((σg² + σi²)/2)` with unbiased
/// variances. Zero spread gives `∞` for distinct means and 0 otherwise.
pub fn decidability(genuine: &[f64], impostor: &[f64]) -> Result<f64> {
    if genuine.is_empty() || impostor.is_empty() {
        return Err(Error::EmptyInput("score list"));
    }
    let (mg, vg) = mean_var(genuine);
    let (mi, vi) = mean_var(impostor);
    let num = (mg - mi).abs();
    let den = ((vg + vi) / 2.0).sqrt();
    Ok(if den > 0.0 {
        num / den
    } else if num > 0.0 {
        f64::INFINITY
    } else {
        0.0
    })
}

pub fn verification_stats(genuine: &[f64], impostor: &[f64]) -> Result<VerificationStats> {
    Ok(VerificationStats {
        eer: equal_error_rate(genuine, impostor)?,
        di: decidability(genuine, impostor)?,
        genuine_scores: genuine.to_vec(),
        impostor_scores: impostor.to_vec(),
    })
}
