//! `ITPL` template file: magic, little-endian `u32` version, rows and cols,
//! then the code words and the mask words as little-endian `u64`.

use std::path::Path;

use crate::error::{Error, Result};
use crate::recognition::IrisTemplate;

pub const MAGIC: &[u8; 4] = b"ITPL";
pub const VERSION: u32 = 1;
const HEADER: usize = 16;

fn bad(reason: impl Into<String>) -> Error {
    Error::Format { kind: "template", reason: reason.into() }
}

pub fn encode(t: &IrisTemplate) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER + 16 * t.code_words().len());
    out.extend_from_slice(MAGIC);
    for v in [VERSION, t.rows() as u32, t.cols() as u32] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for w in t.code_words().iter().chain(t.mask_words()) {
        out.extend_from_slice(&w.to_le_bytes());
    }
    out
}

pub fn decode(bytes: &[u8]) -> Result<IrisTemplate> {
    if bytes.len() < HEADER || &bytes[..4] != MAGIC {
        return Err(bad("missing ITPL header"));
    }
    let word = |i: usize| u32::from_le_bytes(bytes[4 + 4 * i..8 + 4 * i].try_into().unwrap()) as usize;
    if word(0) != VERSION as usize {
        return Err(bad(format!("unsupported version {}", word(0))));
    }
    let (rows, cols) = (word(1), word(2));
    let n = rows
        .checked_mul(cols)
        .and_then(|v| v.checked_mul(2))
        .map(|bits| bits.div_ceil(64))
        .ok_or_else(|| bad("dimensions overflow"))?;
    if bytes.len() - HEADER != 16 * n {
        return Err(bad(format!("payload is {} bytes, expected {}", bytes.len() - HEADER, 16 * n)));
    }
    let words: Vec<u64> =
        bytes[HEADER..].chunks_exact(8).map(|b| u64::from_le_bytes(b.try_into().unwrap())).collect();
    let (code, mask) = words.split_at(n);
    IrisTemplate::from_words(rows, cols, code.to_vec(), mask.to_vec())
}

pub fn write(path: impl AsRef<Path>, t: &IrisTemplate) -> Result<()> {
    std::fs::write(path, encode(t))?;
    Ok(())
}

pub fn read(path: impl AsRef<Path>) -> Result<IrisTemplate> {
    decode(&std::fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn round_trip() {
        for (rows, cols) in [(1, 1), (3, 7), (8, 64)] {
            let mut t = IrisTemplate::random(rows, cols, &mut ChaCha8Rng::seed_from_u64(rows as u64));
            t.set_mask(0, false);
            let b = encode(&t);
            assert_eq!(decode(&b).unwrap(), t);
            assert_eq!(encode(&decode(&b).unwrap()), b);
        }
    }

    #[test]
    fn rejects_malformed() {
        let b = encode(&IrisTemplate::blank(2, 8));
        assert!(decode(&b[..b.len() - 1]).is_err());
        assert!(decode(b"ITP").is_err());
        let mut c = b.clone();
        c[8] = 9;
        assert!(decode(&c).is_err());
        let mut c = b.clone();
        c[4] = 2;
        assert!(decode(&c).is_err());
    }
}
