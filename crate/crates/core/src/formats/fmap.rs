//! `FMAP` container: 4-byte magic, then little-endian `u32` version,
//! channels, height and width, then `f32` values channel-major, row-major.

use std::path::Path;

use crate::error::{Error, Result};
use crate::imaging::GrayImage;
use crate::localization::ProbMapSet;
use crate::net::Tensor;

pub const MAGIC: &[u8; 4] = b"FMAP";
pub const VERSION: u32 = 1;
const HEADER: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct Fmap {
    pub channels: usize,
    pub height: usize,
    pub width: usize,
    pub data: Vec<f32>,
}

fn bad(reason: impl Into<String>) -> Error {
    Error::Format { kind: "fmap", reason: reason.into() }
}

impl Fmap {
    pub fn new(channels: usize, height: usize, width: usize, data: Vec<f32>) -> Result<Self> {
        if data.len() != channels * height * width {
            return Err(Error::Shape(format!("{} values for {channels}x{height}x{width}", data.len())));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(bad("non-finite value"));
        }
        Ok(Self { channels, height, width, data })
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER + 4 * self.data.len());
        out.extend_from_slice(MAGIC);
        for v in [VERSION, self.channels as u32, self.height as u32, self.width as u32] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        for v in &self.data {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER {
            return Err(bad("truncated header"));
        }
        if &bytes[..4] != MAGIC {
            return Err(bad("bad magic"));
        }
        let word = |i: usize| u32::from_le_bytes(bytes[4 + 4 * i..8 + 4 * i].try_into().unwrap());
        if word(0) != VERSION {
            return Err(bad(format!("unsupported version {}", word(0))));
        }
        let (c, h, w) = (word(1) as usize, word(2) as usize, word(3) as usize);
        let n = c
            .checked_mul(h)
            .and_then(|v| v.checked_mul(w))
            .and_then(|v| v.checked_mul(4))
            .ok_or_else(|| bad("dimensions overflow"))?;
        if bytes.len() - HEADER != n {
            return Err(bad(format!("payload is {} bytes, expected {n}", bytes.len() - HEADER)));
        }
        let data = bytes[HEADER..].chunks_exact(4).map(|b| f32::from_le_bytes(b.try_into().unwrap())).collect();
        Self::new(c, h, w, data)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.encode())?;
        Ok(())
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::decode(&std::fs::read(path)?)
    }

    /// Stores the four maps as channels (pupil center, mask, inner, outer).
    pub fn from_maps(maps: &ProbMapSet) -> Self {
        let (w, h) = maps.dims();
        let data = maps.channels().iter().flat_map(|m| m.data().iter().map(|&v| v as f32)).collect();
        Self { channels: 4, height: h, width: w, data }
    }

    pub fn to_maps(&self) -> Result<ProbMapSet> {
        if self.channels != 4 {
            return Err(bad(format!("probability maps need 4 channels, found {}", self.channels)));
        }
        let n = self.height * self.width;
        let chan = |c: usize| {
            GrayImage::new(self.width, self.height, self.data[c * n..(c + 1) * n].iter().map(|&v| v as f64).collect())
        };
        ProbMapSet::new(chan(0)?, chan(1)?, chan(2)?, chan(3)?)
    }

    pub fn from_tensor(t: &Tensor) -> Self {
        let (c, h, w) = t.shape();
        Self { channels: c, height: h, width: w, data: t.data().iter().map(|&v| v as f32).collect() }
    }

    pub fn to_tensor(&self) -> Result<Tensor> {
        Tensor::new(self.channels, self.height, self.width, self.data.iter().map(|&v| v as f64).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn layout() {
        let f = Fmap::new(1, 1, 2, vec![1.0, -0.5]).unwrap();
        let b = f.encode();
        assert_eq!(&b[..4], b"FMAP");
        assert_eq!(b.len(), 28);
        assert_eq!(&b[4..8], &1u32.to_le_bytes());
        assert_eq!(&b[24..28], &(-0.5f32).to_le_bytes());
    }

    #[test]
    fn rejects_malformed() {
        let good = Fmap::new(1, 2, 2, vec![0.0; 4]).unwrap().encode();
        assert!(Fmap::decode(&good[..10]).is_err());
        assert!(Fmap::decode(&good[..good.len() - 1]).is_err());
        let mut b = good.clone();
        b[0] = b'X';
        assert!(Fmap::decode(&b).is_err());
        let mut b = good.clone();
        b[4] = 9;
        assert!(Fmap::decode(&b).is_err());
        let mut b = good.clone();
        b[20..24].copy_from_slice(&f32::NAN.to_le_bytes());
        assert!(Fmap::decode(&b).is_err());
        let mut b = good;
        b.push(0);
        assert!(Fmap::decode(&b).is_err());
    }

    #[test]
    fn maps_need_four_channels() {
        assert!(Fmap::new(3, 1, 1, vec![0.0; 3]).unwrap().to_maps().is_err());
        assert!(Fmap::new(4, 1, 1, vec![0.0, 0.5, 1.5, 0.0]).unwrap().to_maps().is_err());
    }

    proptest! {
        #[test]
        fn byte_round_trip(c in 1usize..4, h in 1usize..6, w in 1usize..6, seed in any::<u32>()) {
            let data: Vec<f32> = (0..c * h * w).map(|i| ((i as u32).wrapping_mul(2654435761) ^ seed) as f32 / 7.0e8).collect();
            let f = Fmap::new(c, h, w, data).unwrap();
            let bytes = f.encode();
            let back = Fmap::decode(&bytes).unwrap();
            prop_assert_eq!(&back, &f);
            prop_assert_eq!(back.encode(), bytes);
        }
    }
}
