use std::collections::BTreeMap;
use std::path::Path;

use super::{AsppWeights, AttentionConfig, AttentionVariant, AttentionWeights, BatchNorm, ConvParams, PspWeights};
use crate::error::{Error, Result};
use crate::formats::Fmap;

/// Named weight arrays, persisted as one FMAP file per entry
/// (`<name>.fmap`) in a directory.
///
/// A convolution `layer` occupies `layer.weight` (`out × in × k²`),
/// `layer.bias` (`1 × 1 × out`) and, when followed by BN, `layer.bn`
/// (`4 × 1 × out`: mean, var, scale, shift).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct WeightStore {
    entries: BTreeMap<String, Fmap>,
}

fn missing(name: &str) -> Error {
    Error::Format { kind: "weights", reason: format!("missing entry {name:?}") }
}

impl WeightStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn get(&self, name: &str) -> Option<&Fmap> {
        self.entries.get(name)
    }

    pub fn insert(&mut self, name: impl Into<String>, f: Fmap) {
        self.entries.insert(name.into(), f);
    }

    pub fn insert_conv(&mut self, layer: &str, p: &ConvParams) -> Result<()> {
        p.validate()?;
        let f32s = |v: &[f64]| v.iter().map(|&x| x as f32).collect::<Vec<_>>();
        let k2 = p.kernel * p.kernel;
        self.insert(format!("{layer}.weight"), Fmap::new(p.out_channels, p.in_channels, k2, f32s(&p.weights))?);
        self.insert(format!("{layer}.bias"), Fmap::new(1, 1, p.out_channels, f32s(&p.bias))?);
        if let Some(bn) = &p.bn_relu {
            let data = [&bn.mean, &bn.var, &bn.scale, &bn.shift].iter().flat_map(|v| f32s(v)).collect();
            self.insert(format!("{layer}.bn"), Fmap::new(4, 1, p.out_channels, data)?);
        }
        Ok(())
    }

    /// Rebuilds a stride-1 convolution; dilation is architectural and
    /// supplied by the caller.
    pub fn conv(&self, layer: &str, dilation: usize) -> Result<ConvParams> {
        let wname = format!("{layer}.weight");
        let w = self.get(&wname).ok_or_else(|| missing(&wname))?;
        let kernel = (w.width as f64).sqrt().round() as usize;
        if kernel * kernel != w.width {
            return Err(Error::Shape(format!("{wname}: {} taps is not a square kernel", w.width)));
        }
        let bname = format!("{layer}.bias");
        let b = self.get(&bname).ok_or_else(|| missing(&bname))?;
        if b.data.len() != w.channels {
            return Err(Error::Shape(format!("{bname}: {} values for {} outputs", b.data.len(), w.channels)));
        }
        let f64s = |v: &[f32]| v.iter().map(|&x| x as f64).collect::<Vec<_>>();
        let bn_relu = match self.get(&format!("{layer}.bn")) {
            None => None,
            Some(f) if f.channels == 4 && f.width == w.channels && f.height == 1 => {
                let n = w.channels;
                Some(BatchNorm {
                    mean: f64s(&f.data[..n]),
                    var: f64s(&f.data[n..2 * n]),
                    scale: f64s(&f.data[2 * n..3 * n]),
                    shift: f64s(&f.data[3 * n..]),
                    eps: BatchNorm::EPS,
                })
            }
            Some(_) => return Err(Error::Shape(format!("{layer}.bn has the wrong shape"))),
        };
        let p = ConvParams {
            out_channels: w.channels,
            in_channels: w.height,
            kernel,
            dilation,
            stride: 1,
            weights: f64s(&w.data),
            bias: f64s(&b.data),
            bn_relu,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn insert_attention(&mut self, prefix: &str, w: &AttentionWeights) -> Result<()> {
        match w {
            AttentionWeights::Aspp(a) => {
                self.insert_conv(&format!("{prefix}.conv1x1"), &a.conv1x1)?;
                for (i, p) in a.atrous.iter().enumerate() {
                    self.insert_conv(&format!("{prefix}.atrous{i}"), p)?;
                }
                self.insert_conv(&format!("{prefix}.image_pool"), &a.image_pool)?;
                self.insert_conv(&format!("{prefix}.tail"), &a.tail)
            }
            AttentionWeights::Psp(p) => {
                for (i, b) in p.bins.iter().enumerate() {
                    self.insert_conv(&format!("{prefix}.bin{i}"), b)?;
                }
                self.insert_conv(&format!("{prefix}.tail"), &p.tail)
            }
        }
    }

    pub fn attention(&self, prefix: &str, cfg: &AttentionConfig) -> Result<AttentionWeights> {
        cfg.validate()?;
        let tail = self.conv(&format!("{prefix}.tail"), 1)?;
        Ok(match cfg.variant {
            AttentionVariant::Aspp => AttentionWeights::Aspp(AsppWeights {
                conv1x1: self.conv(&format!("{prefix}.conv1x1"), 1)?,
                atrous: cfg
                    .aspp_rates
                    .iter()
                    .enumerate()
                    .map(|(i, &r)| self.conv(&format!("{prefix}.atrous{i}"), r))
                    .collect::<Result<_>>()?,
                image_pool: self.conv(&format!("{prefix}.image_pool"), 1)?,
                tail,
            }),
            AttentionVariant::Psp => AttentionWeights::Psp(PspWeights {
                bins: (0..cfg.psp_bins.len()).map(|i| self.conv(&format!("{prefix}.bin{i}"), 1)).collect::<Result<_>>()?,
                tail,
            }),
        })
    }

    pub fn save_dir(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        for (name, f) in &self.entries {
            f.write(dir.join(format!("{name}.fmap")))?;
        }
        Ok(())
    }

    /// Loads every `*.fmap` file in `dir`, keyed by file stem.
    pub fn load_dir(dir: impl AsRef<Path>) -> Result<Self> {
        let mut store = Self::new();
        for entry in std::fs::read_dir(dir)? {
            let path = entry?.path();
            if path.extension().and_then(|e| e.to_str()) != Some("fmap") {
                continue;
            }
            let Some(name) = path.file_stem().and_then(|s| s.to_str()) else { continue };
            store.insert(name.to_string(), Fmap::read(&path)?);
        }
        Ok(store)
    }
}
