use rand::Rng;

use super::pool::{sigmoid, upsample_bilinear};
use super::{conv2d, ConvParams, Tensor};
use crate::error::{Error, Result};
use crate::imaging::GrayImage;
use crate::localization::ProbMapSet;

/// Two 3×3 conv+BN+ReLU refinements applied to the coarser decoder tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoderWeights {
    pub refine: [ConvParams; 2],
}

impl DecoderWeights {
    pub fn random<R: Rng>(rng: &mut R, decoder_channels: usize, encoder_channels: usize) -> Self {
        let half = encoder_channels / 2;
        Self {
            refine: [
                ConvParams::random(rng, half, decoder_channels, 3, 1, true),
                ConvParams::random(rng, half, half, 3, 1, true),
            ],
        }
    }
}

/// Refines `decoder_prev` to half the encoder width, upsamples it 2×, and
/// concatenates it in front of `encoder_same`.
pub fn decoder_fuse(decoder_prev: &Tensor, encoder_same: &Tensor, w: &DecoderWeights) -> Result<Tensor> {
    let refined = conv2d(&conv2d(decoder_prev, &w.refine[0])?, &w.refine[1])?;
    if 2 * refined.channels() != encoder_same.channels() {
        return Err(Error::Shape(format!(
            "refined decoder has {} channels, encoder {}",
            refined.channels(),
            encoder_same.channels()
        )));
    }
    let (h, wd) = (2 * refined.height(), 2 * refined.width());
    if (h, wd) != (encoder_same.height(), encoder_same.width()) {
        return Err(Error::Shape(format!(
            "upsampled decoder is {h}x{wd}, encoder {}x{}",
            encoder_same.height(),
            encoder_same.width()
        )));
    }
    Tensor::concat(&[&upsample_bilinear(&refined, h, wd), encoder_same])
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeadWeights {
    /// 3×3 conv+BN+ReLU stages.
    pub convs: Vec<ConvParams>,
    /// Final 1×1 projection to the four maps.
    pub out: ConvParams,
}

impl HeadWeights {
    pub fn random<R: Rng>(rng: &mut R, in_channels: usize, hidden: &[usize]) -> Self {
        let mut convs = Vec::new();
        let mut c = in_channels;
        for &h in hidden {
            convs.push(ConvParams::random(rng, h, c, 3, 1, true));
            c = h;
        }
        Self { convs, out: ConvParams::random(rng, 4, c, 1, 1, false) }
    }
}

/// Prediction head: conv stages, a 1×1 projection to four channels and a
/// per-pixel sigmoid, in the order pupil centre, mask, inner boundary,
/// outer boundary.
pub fn head_forward(fused: &Tensor, w: &HeadWeights) -> Result<ProbMapSet> {
    if w.out.out_channels != 4 || w.out.kernel != 1 {
        return Err(Error::Shape(format!(
            "head projection must be 1x1 to 4 channels, got k{} to {}",
            w.out.kernel, w.out.out_channels
        )));
    }
    let mut x = fused.clone();
    for p in &w.convs {
        x = conv2d(&x, p)?;
    }
    let y = conv2d(&x, &w.out)?.map(sigmoid);
    let (_, h, wd) = y.shape();
    let map = |c: usize| GrayImage::new(wd, h, y.channel(c).to_vec());
    ProbMapSet::new(map(0)?, map(1)?, map(2)?, map(3)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn fuse_channel_arithmetic() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let w = DecoderWeights::random(&mut rng, 64, 64);
        let dec = Tensor::from_fn(64, 8, 8, |_, _, _| rng.gen_range(-1.0..1.0));
        let enc = Tensor::from_fn(64, 16, 16, |_, _, _| rng.gen_range(-1.0..1.0));
        let out = decoder_fuse(&dec, &enc, &w).unwrap();
        assert_eq!(out.shape(), (96, 16, 16));
        assert_eq!(&out.data()[32 * 256..], enc.data());
    }

    #[test]
    fn zero_decoder_gives_zero_block() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut w = DecoderWeights::random(&mut rng, 4, 6);
        for p in &mut w.refine {
            p.bias.iter_mut().for_each(|b| *b = 0.0);
            let bn = p.bn_relu.as_mut().unwrap();
            bn.mean.iter_mut().for_each(|m| *m = 0.0);
            bn.shift.iter_mut().for_each(|s| *s = 0.0);
        }
        let enc = Tensor::from_fn(6, 6, 4, |c, _, _| c as f64 + 1.0);
        let out = decoder_fuse(&Tensor::zeros(4, 3, 2), &enc, &w).unwrap();
        assert!(out.data()[..3 * 24].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn fuse_mismatches() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let w = DecoderWeights::random(&mut rng, 4, 6);
        assert!(decoder_fuse(&Tensor::zeros(4, 3, 3), &Tensor::zeros(6, 5, 6), &w).is_err());
        assert!(decoder_fuse(&Tensor::zeros(4, 3, 3), &Tensor::zeros(8, 6, 6), &w).is_err());
    }

    #[test]
    fn head_outputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let fused = Tensor::from_fn(6, 5, 7, |_, _, _| rng.gen_range(-2.0..2.0));
        let mut w = HeadWeights::random(&mut rng, 6, &[5, 4]);
        let maps = head_forward(&fused, &w).unwrap();
        assert_eq!(maps.dims(), (7, 5));
        for m in maps.channels() {
            assert!(m.data().iter().all(|&v| v > 0.0 && v < 1.0));
        }

        w.out.weights.iter_mut().for_each(|v| *v = 0.0);
        w.out.bias = vec![0.0; 4];
        let maps = head_forward(&fused, &w).unwrap();
        assert!(maps.channels().iter().all(|m| m.data().iter().all(|&v| v == 0.5)));

        w.out.bias = vec![-10.0, 0.0, 10.0, 0.0];
        let maps = head_forward(&fused, &w).unwrap();
        let expect = [4.5398e-5, 0.5, 0.999955, 0.5];
        for (m, e) in maps.channels().iter().zip(expect) {
            assert!(m.data().iter().all(|&v| (v - e).abs() < 1e-6), "{e}");
        }
    }

    #[test]
    fn head_projection_shape() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut w = HeadWeights::random(&mut rng, 3, &[]);
        w.out = ConvParams::zeros(3, 3, 1, 1, false);
        assert!(head_forward(&Tensor::zeros(3, 2, 2), &w).is_err());
    }
}
