use rand::Rng;
use serde::{Deserialize, Serialize};

use super::pool::{adaptive_avg_pool, avg_pool3x3, sigmoid, upsample_bilinear};
use super::{conv2d, ConvParams, Tensor};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttentionVariant {
    Aspp,
    Psp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttentionConfig {
    pub variant: AttentionVariant,
    /// Width of each ASPP branch.
    pub branch_channels: usize,
    pub psp_bins: Vec<usize>,
    pub input_channels: usize,
    /// Dilation rates of the atrous 3×3 branches.
    pub aspp_rates: Vec<usize>,
}

impl Default for AttentionConfig {
    fn default() -> Self {
        Self {
            variant: AttentionVariant::Aspp,
            branch_channels: 256,
            psp_bins: vec![1, 2, 3, 6],
            input_channels: 512,
            aspp_rates: vec![6, 12, 18],
        }
    }
}

impl AttentionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.branch_channels == 0 || self.input_channels == 0 {
            return Err(Error::Config("channel counts must be >= 1".into()));
        }
        if self.psp_bins.first().is_some_and(|&b| b == 0) || self.psp_bins.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config(format!("psp bins {:?} must be strictly increasing and >= 1", self.psp_bins)));
        }
        if self.aspp_rates.iter().any(|&r| r == 0) {
            return Err(Error::Config("dilation rates must be >= 1".into()));
        }
        if self.variant == AttentionVariant::Psp && (self.input_channels % 4 != 0 || self.psp_bins.is_empty()) {
            return Err(Error::Config(format!(
                "psp needs input channels divisible by 4 (got {}) and at least one bin",
                self.input_channels
            )));
        }
        Ok(())
    }

    /// Channels entering the attention tail convolution.
    pub fn tail_in_channels(&self) -> usize {
        match self.variant {
            AttentionVariant::Aspp => (self.aspp_rates.len() + 2) * self.branch_channels,
            AttentionVariant::Psp => self.input_channels + self.psp_bins.len() * (self.input_channels / 4),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AsppWeights {
    pub conv1x1: ConvParams,
    /// One 3×3 branch per dilation rate.
    pub atrous: Vec<ConvParams>,
    pub image_pool: ConvParams,
    pub tail: ConvParams,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PspWeights {
    /// One 1×1 reduction per bin size.
    pub bins: Vec<ConvParams>,
    pub tail: ConvParams,
}

#[derive(Debug, Clone, PartialEq)]
pub enum AttentionWeights {
    Aspp(AsppWeights),
    Psp(PspWeights),
}

impl AttentionWeights {
    pub fn random<R: Rng>(cfg: &AttentionConfig, rng: &mut R) -> Result<Self> {
        cfg.validate()?;
        let (c, b) = (cfg.input_channels, cfg.branch_channels);
        let tail = |rng: &mut R| ConvParams::random(rng, c, cfg.tail_in_channels(), 3, 1, false);
        Ok(match cfg.variant {
            AttentionVariant::Aspp => AttentionWeights::Aspp(AsppWeights {
                conv1x1: ConvParams::random(rng, b, c, 1, 1, true),
                atrous: cfg.aspp_rates.iter().map(|&r| ConvParams::random(rng, b, c, 3, r, true)).collect(),
                image_pool: ConvParams::random(rng, b, c, 1, 1, true),
                tail: tail(rng),
            }),
            AttentionVariant::Psp => AttentionWeights::Psp(PspWeights {
                bins: cfg.psp_bins.iter().map(|_| ConvParams::random(rng, c / 4, c, 1, 1, true)).collect(),
                tail: tail(rng),
            }),
        })
    }

    pub fn tail_mut(&mut self) -> &mut ConvParams {
        match self {
            AttentionWeights::Aspp(w) => &mut w.tail,
            AttentionWeights::Psp(w) => &mut w.tail,
        }
    }
}

/// Attention output `F' = concat(P, P ⊙ M)` together with the map `M`.
#[derive(Debug, Clone, PartialEq)]
pub struct AttentionOutput {
    pub features: Tensor,
    pub attention: Tensor,
}

fn expect_out(p: &ConvParams, channels: usize, what: &str) -> Result<()> {
    if p.out_channels != channels {
        return Err(Error::Shape(format!("{what} produces {} channels, expected {channels}", p.out_channels)));
    }
    Ok(())
}

/// Spatial mean per channel, a 1×1 convolution, then replication back to the
/// input size.
pub fn global_avg_pool_branch(x: &Tensor, p: &ConvParams) -> Result<Tensor> {
    let pooled = adaptive_avg_pool(x, 1)?;
    let y = conv2d(&pooled, p)?;
    Ok(upsample_bilinear(&y, x.height(), x.width()))
}

fn attention_tail(x: &Tensor, h: &Tensor, tail: &ConvParams) -> Result<AttentionOutput> {
    expect_out(tail, x.channels(), "attention tail")?;
    let m = conv2d(h, tail)?.map(sigmoid);
    let p = avg_pool3x3(x);
    let gated = p.hadamard(&m)?;
    Ok(AttentionOutput { features: Tensor::concat(&[&p, &gated])?, attention: m })
}

fn check_input(x: &Tensor, cfg: &AttentionConfig, variant: AttentionVariant) -> Result<()> {
    cfg.validate()?;
    if cfg.variant != variant {
        return Err(Error::Config(format!("config is for {:?}, not {variant:?}", cfg.variant)));
    }
    if x.channels() != cfg.input_channels {
        return Err(Error::Shape(format!("attention expects {} channels, got {}", cfg.input_channels, x.channels())));
    }
    Ok(())
}

pub fn aspp_attention(x: &Tensor, cfg: &AttentionConfig, w: &AsppWeights) -> Result<AttentionOutput> {
    check_input(x, cfg, AttentionVariant::Aspp)?;
    if w.atrous.len() != cfg.aspp_rates.len() {
        return Err(Error::Shape(format!("{} atrous branches for {} rates", w.atrous.len(), cfg.aspp_rates.len())));
    }
    let mut branches = vec![conv2d(x, &w.conv1x1)?];
    for p in &w.atrous {
        branches.push(conv2d(x, p)?);
    }
    branches.push(global_avg_pool_branch(x, &w.image_pool)?);
    for (i, b) in branches.iter().enumerate() {
        if b.channels() != cfg.branch_channels {
            return Err(Error::Shape(format!("aspp branch {i} has {} channels", b.channels())));
        }
    }
    let h = Tensor::concat(&branches.iter().collect::<Vec<_>>())?;
    attention_tail(x, &h, &w.tail)
}

pub fn psp_attention(x: &Tensor, cfg: &AttentionConfig, w: &PspWeights) -> Result<AttentionOutput> {
    check_input(x, cfg, AttentionVariant::Psp)?;
    if w.bins.len() != cfg.psp_bins.len() {
        return Err(Error::Shape(format!("{} pyramid branches for {} bins", w.bins.len(), cfg.psp_bins.len())));
    }
    let mut parts = vec![x.clone()];
    for (&bins, p) in cfg.psp_bins.iter().zip(&w.bins) {
        expect_out(p, cfg.input_channels / 4, "pyramid branch")?;
        let pooled = conv2d(&adaptive_avg_pool(x, bins)?, p)?;
        parts.push(upsample_bilinear(&pooled, x.height(), x.width()));
    }
    let h = Tensor::concat(&parts.iter().collect::<Vec<_>>())?;
    attention_tail(x, &h, &w.tail)
}

pub fn attention(x: &Tensor, cfg: &AttentionConfig, w: &AttentionWeights) -> Result<AttentionOutput> {
    match w {
        AttentionWeights::Aspp(w) => aspp_attention(x, cfg, w),
        AttentionWeights::Psp(w) => psp_attention(x, cfg, w),
    }
}
