use serde::{Deserialize, Serialize};

use super::{default_thresholds, success_curve};
use crate::error::{Error, Result};

/// Per-image evaluation row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageEval {
    pub id: String,
    pub e1: f64,
    pub e2: f64,
    pub f1: f64,
    pub iou: f64,
    pub hd_inner: f64,
    pub hd_outer: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegScores {
    pub e1: f64,
    pub e2: f64,
    pub f1_mean: f64,
    /// Population standard deviation.
    pub f1_std: f64,
    pub miou: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocScores {
    pub mhdis_inner: f64,
    pub mhdis_outer: f64,
    pub mhdis_overall: f64,
    pub success_inner: Vec<(f64, f64)>,
    pub success_outer: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub n: usize,
    pub per_image: Vec<ImageEval>,
    pub seg: SegScores,
    pub loc: LocScores,
}

fn mean(v: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = v.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    s / n as f64
}

pub fn aggregate(rows: Vec<ImageEval>) -> Result<EvalReport> {
    aggregate_with_thresholds(rows, &default_thresholds())
}

pub fn aggregate_with_thresholds(rows: Vec<ImageEval>, thresholds: &[f64]) -> Result<EvalReport> {
    if rows.is_empty() {
        return Err(Error::EmptyInput("evaluation rows"));
    }
    let f1_mean = mean(rows.iter().map(|r| r.f1));
    let f1_std = mean(rows.iter().map(|r| (r.f1 - f1_mean).powi(2))).sqrt();
    let seg = SegScores {
        e1: mean(rows.iter().map(|r| r.e1)),
        e2: mean(rows.iter().map(|r| r.e2)),
        f1_mean,
        f1_std,
        miou: mean(rows.iter().map(|r| r.iou)),
    };
    let hi: Vec<f64> = rows.iter().map(|r| r.hd_inner).collect();
    let ho: Vec<f64> = rows.iter().map(|r| r.hd_outer).collect();
    let mhdis_inner = mean(hi.iter().copied());
    let mhdis_outer = mean(ho.iter().copied());
    let loc = LocScores {
        mhdis_inner,
        mhdis_outer,
        mhdis_overall: (mhdis_inner + mhdis_outer) / 2.0,
        success_inner: success_curve(&hi, thresholds),
        success_outer: success_curve(&ho, thresholds),
    };
    Ok(EvalReport { n: rows.len(), per_image: rows, seg, loc })
}

impl EvalReport {
    /// Recomputes the aggregates from the per-image rows and compares them.
    pub fn is_consistent(&self) -> bool {
        let thresholds: Vec<f64> = self.loc.success_inner.iter().map(|&(t, _)| t).collect();
        match aggregate_with_thresholds(self.per_image.clone(), &thresholds) {
            Ok(r) => r == *self,
            Err(_) => false,
        }
    }
}
