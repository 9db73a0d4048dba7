use std::path::{Path, PathBuf};

use anyhow::{bail, Context as _, Result};
use clap::Args;
use irisparse::formats::{Annotation, LocalizationRecord};
use irisparse::imaging::pgm;
use irisparse::metrics::{aggregate, hausdorff, Confusion, EvalReport, ImageEval};
use rayon::prelude::*;
use serde::Serialize;

use super::localize::{pred_mask_path, result_path};
use crate::manifest::{self, Manifest};
use crate::Context;

/// Points per circle when measuring Hausdorff distance (1° spacing).
pub const CIRCLE_SAMPLES: usize = 360;

#[derive(Debug, Clone, Args)]
pub struct EvaluateArgs {
    /// Directory written by `localize`.
    pub results: PathBuf,
    /// Directory holding the annotations (and a manifest, if available).
    pub gt: PathBuf,
}

fn annotations(gt: &Path) -> Result<Vec<PathBuf>> {
    if gt.join(manifest::FILE_NAME).is_file() {
        let m = Manifest::read(gt)?;
        return Ok(m.rows.iter().map(|r| m.path(&r.annotation)).collect());
    }
    let mut found: Vec<PathBuf> = std::fs::read_dir(gt)
        .with_context(|| format!("reading {}", gt.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            let name = p.file_name().and_then(|n| n.to_str()).unwrap_or("");
            name.ends_with(".json") && !name.ends_with(".result.json") && name != "report.json"
        })
        .collect();
    found.sort();
    Ok(found)
}

/// Scores one image, or explains why it was skipped.
fn score(results: &Path, gt_dir: &Path, ann_path: &Path) -> Result<ImageEval, (String, String)> {
    let fallback_id = ann_path.file_stem().and_then(|s| s.to_str()).unwrap_or("?").to_string();
    let ann = Annotation::read(ann_path).map_err(|e| (fallback_id, format!("annotation: {e}")))?;
    let id = ann.id.clone();
    let skip = |why: String| (id.clone(), why);

    let rec = LocalizationRecord::read(result_path(results, &id)).map_err(|e| skip(format!("result: {e}")))?;
    let Some((inner, outer)) = rec.circles() else {
        return Err(skip(format!("localization failed: {}", rec.reason.as_deref().unwrap_or("unknown"))));
    };
    let gt_mask = pgm::read_mask(gt_dir.join(&ann.mask_path)).map_err(|e| skip(format!("gt mask: {e}")))?;
    let pred_mask = pgm::read_mask(pred_mask_path(results, &id)).map_err(|e| skip(format!("predicted mask: {e}")))?;
    let c = Confusion::of(&gt_mask, &pred_mask).map_err(|e| skip(e.to_string()))?;
    let hd = |g: &irisparse::Circle, d: &irisparse::Circle| {
        hausdorff(&g.densify(CIRCLE_SAMPLES), &d.densify(CIRCLE_SAMPLES)).expect("non-empty point sets")
    };
    Ok(ImageEval {
        id,
        e1: c.e1(),
        e2: c.e2(),
        f1: c.f1(),
        iou: c.miou(),
        hd_inner: hd(&ann.inner, &inner),
        hd_outer: hd(&ann.outer, &outer),
    })
}

#[derive(Serialize)]
struct ReportJson<'a> {
    #[serde(flatten)]
    report: &'a EvalReport,
    skipped: Vec<Skipped<'a>>,
}

#[derive(Serialize)]
struct Skipped<'a> {
    id: &'a str,
    reason: &'a str,
}

pub fn write_report(out: &Path, report: &EvalReport) -> Result<()> {
    let mut w = csv::Writer::from_path(out.join("report.csv"))?;
    w.write_record(["id", "e1", "e2", "f1", "iou", "hd_inner", "hd_outer"])?;
    for r in &report.per_image {
        w.serialize((&r.id, r.e1, r.e2, r.f1, r.iou, r.hd_inner, r.hd_outer))?;
    }
    let (s, l) = (&report.seg, &report.loc);
    w.serialize(("mean", s.e1, s.e2, s.f1_mean, s.miou, l.mhdis_inner, l.mhdis_outer))?;
    w.flush()?;

    for (name, curve) in [("curve_inner.csv", &l.success_inner), ("curve_outer.csv", &l.success_outer)] {
        let mut w = csv::Writer::from_path(out.join(name))?;
        w.write_record(["threshold", "rate"])?;
        for &(t, r) in curve {
            w.serialize((t, r))?;
        }
        w.flush()?;
    }
    Ok(())
}

pub fn run(ctx: &Context, a: &EvaluateArgs) -> Result<i32> {
    let anns = annotations(&a.gt)?;
    if anns.is_empty() {
        bail!("no annotations found in {}", a.gt.display());
    }
    let scored: Vec<_> = anns.par_iter().map(|p| score(&a.results, &a.gt, p)).collect();
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for s in scored {
        match s {
            Ok(r) => rows.push(r),
            Err(s) => skipped.push(s),
        }
    }
    for (id, why) in &skipped {
        eprintln!("skipped {id}: {why}");
    }
    if rows.is_empty() {
        eprintln!("every image was skipped; nothing to evaluate");
        return Ok(1);
    }

    let report = aggregate(rows)?;
    let out = ctx.out_dir()?;
    write_report(out, &report)?;
    let json = ReportJson {
        report: &report,
        skipped: skipped.iter().map(|(id, reason)| Skipped { id, reason }).collect(),
    };
    std::fs::write(out.join("report.json"), serde_json::to_string_pretty(&json)? + "\n")?;

    let (s, l) = (&report.seg, &report.loc);
    println!("images   {} evaluated, {} skipped", report.n, skipped.len());
    println!("E1       {:.6}", s.e1);
    println!("E2       {:.6}", s.e2);
    println!("F1       {:.6} ± {:.6}", s.f1_mean, s.f1_std);
    println!("mIOU     {:.6}", s.miou);
    println!("mHdis    inner {:.4}  outer {:.4}  overall {:.4}", l.mhdis_inner, l.mhdis_outer, l.mhdis_overall);
    Ok(0)
}
