use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context as _, Result};
use clap::Args;
use irisparse::formats::{template, Annotation, LocalizationRecord};
use irisparse::imaging::pgm;
use irisparse::recognition::{encode as encode_iris, match_prepared, normalize, verification_stats, PreparedTemplate};
use irisparse::{BinaryMask, Circle, GrayImage};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::localize::{pred_mask_path, result_path};
use crate::manifest::Manifest;
use crate::Context;

pub const TEMPLATES_CSV: &str = "templates.csv";
pub const PAIRS_CSV: &str = "pairs.csv";
pub const SCORES_CSV: &str = "scores.csv";

#[derive(Debug, Clone, Args)]
pub struct EncodeArgs {
    /// Directory with a manifest, images and annotations.
    pub input: PathBuf,
    /// Use circles and masks from this `localize` output instead of the
    /// annotations.
    #[arg(long)]
    pub results: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct PairsArgs {
    /// Directory written by `encode`.
    pub templates: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct MatchArgs {
    /// Directory written by `encode`.
    pub templates: PathBuf,
    /// CSV with columns `a,b,label`.
    pub pairs: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// Scores CSV written by `match`.
    pub scores: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemplateRow {
    pub id: String,
    pub subject: String,
    pub status: String,
    pub reason: Option<String>,
    pub valid_bits: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairRow {
    pub a: String,
    pub b: String,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRow {
    pub label: String,
    pub score: Option<f64>,
    pub a: String,
    pub b: String,
    pub shift: Option<i64>,
    pub valid_bits: Option<usize>,
    pub status: String,
}

pub fn template_path(dir: &Path, id: &str) -> PathBuf {
    dir.join(format!("{id}.itpl"))
}

fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    r.deserialize().collect::<Result<_, _>>().with_context(|| format!("parsing {}", path.display()))
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn geometry(m: &Manifest, row: &crate::manifest::ManifestRow, results: Option<&Path>) -> Result<(BinaryMask, Circle, Circle), String> {
    match results {
        None => {
            let ann = Annotation::read(m.path(&row.annotation)).map_err(|e| format!("annotation: {e}"))?;
            let mask = pgm::read_mask(m.path(&ann.mask_path)).map_err(|e| format!("mask: {e}"))?;
            Ok((mask, ann.inner, ann.outer))
        }
        Some(dir) => {
            let rec = LocalizationRecord::read(result_path(dir, &row.id)).map_err(|e| format!("result: {e}"))?;
            let (i, o) = rec.circles().ok_or_else(|| "localization failed".to_string())?;
            let mask = pgm::read_mask(pred_mask_path(dir, &row.id)).map_err(|e| format!("mask: {e}"))?;
            Ok((mask, i, o))
        }
    }
}

pub fn encode(ctx: &Context, a: &EncodeArgs) -> Result<i32> {
    ctx.config.validate()?;
    let m = Manifest::read(&a.input)?;
    let out = ctx.out_dir()?;
    let np = ctx.config.normalize;
    let rows = m
        .rows
        .par_iter()
        .map(|row| -> Result<TemplateRow> {
            let outcome = (|| -> Result<_, String> {
                let img: GrayImage = pgm::read_gray(m.path(&row.image)).map_err(|e| format!("image: {e}"))?;
                let (mask, inner, outer) = geometry(&m, row, a.results.as_deref())?;
                let norm = normalize(&img, &mask, &inner, &outer, np.rows, np.cols).map_err(|e| e.to_string())?;
                encode_iris(&norm, &ctx.config.encode).map_err(|e| e.to_string())
            })();
            Ok(match outcome {
                Ok(t) => {
                    template::write(template_path(out, &row.id), &t)?;
                    TemplateRow {
                        id: row.id.clone(),
                        subject: row.subject.clone(),
                        status: "ok".into(),
                        reason: None,
                        valid_bits: Some(t.valid_bits()),
                    }
                }
                Err(why) => TemplateRow {
                    id: row.id.clone(),
                    subject: row.subject.clone(),
                    status: "failed".into(),
                    reason: Some(why),
                    valid_bits: None,
                },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    write_csv(&out.join(TEMPLATES_CSV), &rows)?;
    let ok = rows.iter().filter(|r| r.status == "ok").count();
    println!("encoded {ok}/{} templates", rows.len());
    for r in rows.iter().filter(|r| r.status != "ok") {
        eprintln!("failed {}: {}", r.id, r.reason.as_deref().unwrap_or("unknown"));
    }
    Ok(if ok > 0 { 0 } else { 1 })
}

pub fn pairs(ctx: &Context, a: &PairsArgs) -> Result<i32> {
    let rows: Vec<TemplateRow> = read_csv(&a.templates.join(TEMPLATES_CSV))?;
    let ok: Vec<&TemplateRow> = rows.iter().filter(|r| r.status == "ok").collect();
    let mut out_rows = Vec::new();
    for (i, x) in ok.iter().enumerate() {
        for y in &ok[i + 1..] {
            let label = if x.subject == y.subject { "genuine" } else { "impostor" };
            out_rows.push(PairRow { a: x.id.clone(), b: y.id.clone(), label: label.into() });
        }
    }
    if out_rows.is_empty() {
        bail!("fewer than two usable templates in {}", a.templates.display());
    }
    let out = ctx.out_dir()?;
    write_csv(&out.join(PAIRS_CSV), &out_rows)?;
    let genuine = out_rows.iter().filter(|p| p.label == "genuine").count();
    println!("{} pairs ({genuine} genuine, {} impostor)", out_rows.len(), out_rows.len() - genuine);
    Ok(0)
}

pub fn match_pairs(ctx: &Context, a: &MatchArgs) -> Result<i32> {
    let pairs: Vec<PairRow> = read_csv(&a.pairs)?;
    if pairs.is_empty() {
        bail!("{} lists no pairs", a.pairs.display());
    }
    let mut ids: Vec<&str> = pairs.iter().flat_map(|p| [p.a.as_str(), p.b.as_str()]).collect();
    ids.sort_unstable();
    ids.dedup();
    let max_shift = ctx.config.max_shift;
    let prepared: BTreeMap<&str, Option<PreparedTemplate>> = ids
        .par_iter()
        .map(|&id| {
            let t = template::read(template_path(&a.templates, id)).ok();
            (id, t.map(|t| PreparedTemplate::new(&t, max_shift)))
        })
        .collect();
    let query: BTreeMap<&str, Option<PreparedTemplate>> = prepared
        .iter()
        .map(|(&id, p)| (id, p.as_ref().map(|p| PreparedTemplate::new(p.template(), 0))))
        .collect();

    let scores: Vec<ScoreRow> = pairs
        .par_iter()
        .map(|p| {
            let mut row = ScoreRow {
                label: p.label.clone(),
                score: None,
                a: p.a.clone(),
                b: p.b.clone(),
                shift: None,
                valid_bits: None,
                status: "ok".into(),
            };
            match (&query[p.a.as_str()], &prepared[p.b.as_str()]) {
                (Some(ta), Some(tb)) => match match_prepared(ta, tb) {
                    Ok(s) => {
                        row.score = Some(s.hd);
                        row.shift = Some(s.shift);
                        row.valid_bits = Some(s.valid_bits);
                    }
                    Err(e) => row.status = e.kind().into(),
                },
                _ => row.status = "missing-template".into(),
            }
            row
        })
        .collect();
    let out = ctx.out_dir()?;
    write_csv(&out.join(SCORES_CSV), &scores)?;
    let invalid = scores.iter().filter(|s| s.status != "ok").count();
    println!("scored {} pairs ({invalid} invalid)", scores.len());
    Ok(0)
}

#[derive(Debug, Serialize)]
struct Verification {
    eer: f64,
    di: f64,
    genuine: usize,
    impostor: usize,
    invalid: usize,
}

pub fn verify(ctx: &Context, a: &VerifyArgs) -> Result<i32> {
    let rows: Vec<ScoreRow> = read_csv(&a.scores)?;
    let (mut genuine, mut impostor, mut invalid) = (Vec::new(), Vec::new(), 0);
    for r in &rows {
        match (r.status.as_str(), r.score, r.label.as_str()) {
            ("ok", Some(s), "genuine") => genuine.push(s),
            ("ok", Some(s), "impostor") => impostor.push(s),
            ("ok", Some(_), other) => bail!("unknown label {other:?}"),
            _ => invalid += 1,
        }
    }
    if genuine.is_empty() || impostor.is_empty() {
        bail!("need both genuine and impostor scores (got {} and {})", genuine.len(), impostor.len());
    }
    let st = verification_stats(&genuine, &impostor)?;
    let v = Verification { eer: st.eer, di: st.di, genuine: genuine.len(), impostor: impostor.len(), invalid };
    let out = ctx.out_dir()?;
    std::fs::write(out.join("verification.json"), serde_json::to_string_pretty(&v)? + "\n")?;
    println!("EER {:.6}", v.eer);
    println!("DI  {:.6}", v.di);
    println!("pairs: {} genuine, {} impostor, {} invalid", v.genuine, v.impostor, v.invalid);
    Ok(0)
}
