use anyhow::{bail, Result};
use clap::Args;
use irisparse::formats::{Annotation, Fmap};
use irisparse::imaging::pgm;
use irisparse::synth::{generate_rotated, CorruptionSpec, SynthSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::derive_seed;
use crate::manifest::{Manifest, ManifestRow};
use crate::Context;

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    /// Number of subjects.
    #[arg(long, default_value_t = 10)]
    pub n: usize,
    /// Samples per subject; samples after the first are rotated.
    #[arg(long, default_value_t = 1)]
    pub samples_per_subject: usize,
    /// Largest rotation (degrees) applied to repeat samples.
    #[arg(long, default_value_t = 8.0)]
    pub max_rotation: f64,
    #[arg(long, default_value_t = 200)]
    pub width: usize,
    #[arg(long, default_value_t = 160)]
    pub height: usize,
    /// Boundary thickening radius in pixels.
    #[arg(long, default_value_t = 3)]
    pub edge_width: usize,
    /// Spurious high-intensity blobs per case.
    #[arg(long, default_value_t = 5)]
    pub blobs: usize,
    #[arg(long, default_value_t = 0.9)]
    pub blob_intensity: f64,
    /// Standard deviation of additive map noise.
    #[arg(long, default_value_t = 0.05)]
    pub noise: f64,
    /// Fraction of the iris hidden by an upper eyelid.
    #[arg(long, default_value_t = 0.0)]
    pub occlusion: f64,
    /// Disable every corruption (overrides the other corruption flags).
    #[arg(long)]
    pub clean: bool,
}

impl SynthArgs {
    pub fn corruption(&self) -> CorruptionSpec {
        if self.clean {
            return CorruptionSpec::none();
        }
        CorruptionSpec {
            edge_width: self.edge_width,
            blob_count: self.blobs,
            blob_intensity: self.blob_intensity,
            map_noise_sigma: self.noise,
            occlusion_fraction: self.occlusion,
        }
    }
}

pub fn case_id(subject: usize, sample: usize) -> String {
    format!("eye_{subject:04}_{sample}")
}

pub fn run(ctx: &Context, a: &SynthArgs) -> Result<i32> {
    if a.n == 0 || a.samples_per_subject == 0 {
        bail!("--n and --samples-per-subject must be at least 1");
    }
    if !(0.0..=20.0).contains(&a.max_rotation) {
        bail!("--max-rotation must lie in [0, 20] degrees");
    }
    if a.width < 32 || a.height < 32 {
        bail!("images must be at least 32x32");
    }
    let corruption = a.corruption();
    corruption.validate()?;
    let out = ctx.out_dir()?;

    let jobs: Vec<(usize, usize)> =
        (0..a.n).flat_map(|s| (0..a.samples_per_subject).map(move |k| (s, k))).collect();
    let rows = jobs
        .par_iter()
        .map(|&(s, k)| -> Result<ManifestRow> {
            let subject_seed = derive_seed(ctx.seed, s as u64);
            let spec = SynthSpec::random(subject_seed, a.width, a.height, corruption);
            let rotation = if k == 0 {
                0.0
            } else {
                ChaCha8Rng::seed_from_u64(derive_seed(subject_seed, k as u64)).gen_range(0.0..=a.max_rotation)
            };
            let case = generate_rotated(&spec, rotation)?;
            let id = case_id(s, k);
            let row = ManifestRow {
                subject: format!("s{s:04}"),
                sample: k as u32,
                rotation_deg: rotation,
                image: format!("{id}.pgm"),
                maps: format!("{id}.fmap"),
                annotation: format!("{id}.json"),
                mask: format!("{id}_mask.pgm"),
                id,
            };
            pgm::write_gray(out.join(&row.image), &case.image)?;
            Fmap::from_maps(&case.maps).write(out.join(&row.maps))?;
            pgm::write_mask(out.join(&row.mask), &case.gt.mask)?;
            Annotation {
                id: row.id.clone(),
                pupil_center: [case.gt.pupil_center.x, case.gt.pupil_center.y],
                inner: case.gt.inner,
                outer: case.gt.outer,
                mask_path: row.mask.clone(),
                ellipse: None,
            }
            .write(out.join(&row.annotation))?;
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    Manifest::write(out, &rows)?;
    println!("wrote {} cases to {}", rows.len(), out.display());
    Ok(0)
}
