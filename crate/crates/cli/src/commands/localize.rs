use std::path::{Path, PathBuf};

use anyhow::{bail, Context as _, Result};
use clap::Args;
use irisparse::formats::{Fmap, LocalizationRecord};
use irisparse::imaging::pgm;
use irisparse::localization::localize;
use irisparse::BinaryMask;
use rayon::prelude::*;
use serde::Serialize;

use crate::manifest::{self, Manifest};
use crate::Context;

/// Mask-map probability at or above which a pixel is predicted iris.
pub const MASK_THRESHOLD: f64 = 0.5;
pub const RESULTS_CSV: &str = "results.csv";

#[derive(Debug, Clone, Args)]
pub struct LocalizeArgs {
    /// An FMAP file, or a directory with a manifest (falls back to every
    /// `*.fmap` in name order).
    pub input: PathBuf,
}

pub fn result_path(dir: &Path, id: &str) -> PathBuf {
    dir.join(format!("{id}.result.json"))
}

pub fn pred_mask_path(dir: &Path, id: &str) -> PathBuf {
    dir.join(format!("{id}_pred_mask.pgm"))
}

fn inputs(input: &Path) -> Result<Vec<(String, PathBuf)>> {
    if input.is_file() {
        let id = input.file_stem().and_then(|s| s.to_str()).context("input file has no usable name")?;
        return Ok(vec![(id.to_string(), input.to_path_buf())]);
    }
    if input.join(manifest::FILE_NAME).is_file() {
        let m = Manifest::read(input)?;
        return Ok(m.rows.iter().map(|r| (r.id.clone(), m.path(&r.maps))).collect());
    }
    let mut found: Vec<(String, PathBuf)> = std::fs::read_dir(input)
        .with_context(|| format!("reading {}", input.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().and_then(|e| e.to_str()) == Some("fmap"))
        .filter_map(|p| Some((p.file_stem()?.to_str()?.to_string(), p)))
        .collect();
    found.sort();
    Ok(found)
}

#[derive(Debug, Serialize)]
struct ResultRow<'a> {
    id: &'a str,
    status: &'a str,
    reason: Option<&'a str>,
    pupil_x: Option<f64>,
    pupil_y: Option<f64>,
    inner_cx: Option<f64>,
    inner_cy: Option<f64>,
    inner_r: Option<f64>,
    outer_cx: Option<f64>,
    outer_cy: Option<f64>,
    outer_r: Option<f64>,
}

fn process(ctx: &Context, out: &Path, id: &str, path: &Path) -> Result<LocalizationRecord> {
    let maps = match Fmap::read(path).and_then(|f| f.to_maps()) {
        Ok(m) => m,
        Err(e) => return Ok(LocalizationRecord::failure(id, e.kind())),
    };
    let (w, h) = maps.dims();
    let mask = BinaryMask::from_fn(w, h, |x, y| maps.mask.get(x, y) >= MASK_THRESHOLD);
    pgm::write_mask(pred_mask_path(out, id), &mask)?;
    Ok(match localize(&maps, &ctx.config.localization) {
        Ok(r) => LocalizationRecord::success(id, &r),
        Err(e) => LocalizationRecord::failure(id, e.kind()),
    })
}

pub fn run(ctx: &Context, a: &LocalizeArgs) -> Result<i32> {
    ctx.config.localization.validate()?;
    let items = inputs(&a.input)?;
    if items.is_empty() {
        bail!("no probability maps found under {}", a.input.display());
    }
    let out = ctx.out_dir()?;
    let records = items
        .par_iter()
        .map(|(id, path)| {
            let rec = process(ctx, out, id, path)?;
            rec.write(result_path(out, id))?;
            Ok(rec)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut w = csv::Writer::from_path(out.join(RESULTS_CSV))?;
    for r in &records {
        let (i, o) = (r.inner, r.outer);
        w.serialize(ResultRow {
            id: &r.id,
            status: &r.status,
            reason: r.reason.as_deref(),
            pupil_x: r.pupil_center.map(|p| p[0]),
            pupil_y: r.pupil_center.map(|p| p[1]),
            inner_cx: i.map(|c| c.cx),
            inner_cy: i.map(|c| c.cy),
            inner_r: i.map(|c| c.r),
            outer_cx: o.map(|c| c.cx),
            outer_cy: o.map(|c| c.cy),
            outer_r: o.map(|c| c.r),
        })?;
    }
    w.flush()?;

    let ok = records.iter().filter(|r| r.is_ok()).count();
    println!("localized {ok}/{} images", records.len());
    for r in records.iter().filter(|r| !r.is_ok()) {
        eprintln!("failed {}: {}", r.id, r.reason.as_deref().unwrap_or("unknown"));
    }
    Ok(if ok > 0 { 0 } else { 1 })
}
