use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::Tensor;
use crate::error::{Error, Result};

/// Inference-mode batch normalization, one entry per output channel.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchNorm {
    pub mean: Vec<f64>,
    pub var: Vec<f64>,
    pub scale: Vec<f64>,
    pub shift: Vec<f64>,
    pub eps: f64,
}

impl BatchNorm {
    pub const EPS: f64 = 1e-5;

    /// `mean 0, var 1, scale 1, shift 0`.
    pub fn identity(channels: usize) -> Self {
        Self {
            mean: vec![0.0; channels],
            var: vec![1.0; channels],
            scale: vec![1.0; channels],
            shift: vec![0.0; channels],
            eps: Self::EPS,
        }
    }

    fn apply(&self, c: usize, v: f64) -> f64 {
        (v - self.mean[c]) / (self.var[c] + self.eps).sqrt() * self.scale[c] + self.shift[c]
    }
}

/// Square-kernel convolution. Weights are laid out `[out][in][ky][kx]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvParams {
    pub out_channels: usize,
    pub in_channels: usize,
    pub kernel: usize,
    pub dilation: usize,
    pub stride: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    /// When present the convolution is followed by BN and ReLU.
    pub bn_relu: Option<BatchNorm>,
}

impl ConvParams {
    /// Zero weights and bias, stride 1.
    pub fn zeros(out_channels: usize, in_channels: usize, kernel: usize, dilation: usize, bn_relu: bool) -> Self {
        Self {
            out_channels,
            in_channels,
            kernel,
            dilation,
            stride: 1,
            weights: vec![0.0; out_channels * in_channels * kernel * kernel],
            bias: vec![0.0; out_channels],
            bn_relu: bn_relu.then(|| BatchNorm::identity(out_channels)),
        }
    }

    /// He-scaled Gaussian weights, small biases, and (when enabled) a
    /// randomised but well-conditioned BN. Values are rounded to `f32` so
    /// they survive a trip through the weight file format unchanged.
    pub fn random<R: Rng>(
        rng: &mut R,
        out_channels: usize,
        in_channels: usize,
        kernel: usize,
        dilation: usize,
        bn_relu: bool,
    ) -> Self {
        let fan_in = (in_channels * kernel * kernel) as f64;
        let normal = Normal::new(0.0, (2.0 / fan_in).sqrt()).expect("positive std");
        let r32 = |v: f64| v as f32 as f64;
        let mut p = Self::zeros(out_channels, in_channels, kernel, dilation, false);
        p.weights.iter_mut().for_each(|w| *w = r32(normal.sample(rng)));
        p.bias.iter_mut().for_each(|b| *b = r32(rng.gen_range(-0.1..0.1)));
        if bn_relu {
            let mut bn = BatchNorm::identity(out_channels);
            for c in 0..out_channels {
                bn.mean[c] = r32(rng.gen_range(-0.1..0.1));
                bn.var[c] = r32(rng.gen_range(0.5..1.5));
                bn.scale[c] = r32(rng.gen_range(0.5..1.5));
                bn.shift[c] = r32(rng.gen_range(-0.1..0.1));
            }
            p.bn_relu = Some(bn);
        }
        p
    }

    #[inline]
    pub fn weight(&self, o: usize, i: usize, ky: usize, kx: usize) -> f64 {
        self.weights[((o * self.in_channels + i) * self.kernel + ky) * self.kernel + kx]
    }

    pub fn validate(&self) -> Result<()> {
        if self.kernel == 0 || self.kernel % 2 == 0 {
            return Err(Error::Config(format!("kernel size {} must be odd", self.kernel)));
        }
        if self.dilation == 0 || self.stride == 0 {
            return Err(Error::Config("dilation and stride must be >= 1".into()));
        }
        let expected = self.out_channels * self.in_channels * self.kernel * self.kernel;
        if self.weights.len() != expected || self.bias.len() != self.out_channels {
            return Err(Error::Shape(format!(
                "conv {}->{} k{} has {} weights and {} biases",
                self.in_channels,
                self.out_channels,
                self.kernel,
                self.weights.len(),
                self.bias.len()
            )));
        }
        if let Some(bn) = &self.bn_relu {
            let n = self.out_channels;
            if bn.mean.len() != n || bn.var.len() != n || bn.scale.len() != n || bn.shift.len() != n {
                return Err(Error::Shape("batch-norm length differs from output channels".into()));
            }
            if bn.var.iter().any(|v| *v + bn.eps <= 0.0) {
                return Err(Error::Config("batch-norm variance must exceed -eps".into()));
            }
        }
        Ok(())
    }
}

/// Same-padded (zero border) dilated convolution; output spatial size is
/// `ceil(H / stride) × ceil(W / stride)`.
pub fn conv2d(x: &Tensor, p: &ConvParams) -> Result<Tensor> {
    p.validate()?;
    if x.channels() != p.in_channels {
        return Err(Error::Shape(format!("conv expects {} channels, got {}", p.in_channels, x.channels())));
    }
    let (h, w) = (x.height() as i64, x.width() as i64);
    let oh = x.height().div_ceil(p.stride);
    let ow = x.width().div_ceil(p.stride);
    let half = (p.kernel / 2) as i64;
    let d = p.dilation as i64;
    let mut out = Tensor::zeros(p.out_channels, oh, ow);
    for o in 0..p.out_channels {
        for oy in 0..oh {
            for ox in 0..ow {
                let (cy, cx) = ((oy * p.stride) as i64, (ox * p.stride) as i64);
                let mut acc = p.bias[o];
                for i in 0..p.in_channels {
                    for ky in 0..p.kernel {
                        let y = cy + (ky as i64 - half) * d;
                        if y < 0 || y >= h {
                            continue;
                        }
                        for kx in 0..p.kernel {
                            let xx = cx + (kx as i64 - half) * d;
                            if xx < 0 || xx >= w {
                                continue;
                            }
                            acc += p.weight(o, i, ky, kx) * x.get(i, y as usize, xx as usize);
                        }
                    }
                }
                if let Some(bn) = &p.bn_relu {
                    acc = bn.apply(o, acc).max(0.0);
                }
                out.set(o, oy, ox, acc);
            }
        }
    }
    Ok(out)
}
