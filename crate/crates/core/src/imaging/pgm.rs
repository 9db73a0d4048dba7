//! Binary PGM (P5, maxval 255) reading and writing.
//!
//! Masks are stored as 0 for background and 255 for foreground.

use std::fs;
use std::path::Path;

use super::{BinaryMask, GrayImage};
use crate::error::{Error, Result};

pub fn encode_levels(width: usize, height: usize, levels: &[u8]) -> Vec<u8> {
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend_from_slice(levels);
    out
}

/// Parses a P5 stream into `(width, height, levels)`.
pub fn decode_levels(bytes: &[u8]) -> Result<(usize, usize, Vec<u8>)> {
    let bad = |reason: &str| Error::Format { kind: "PGM", reason: reason.to_string() };
    let mut pos = 0;
    let mut fields = Vec::with_capacity(4);
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if pos < bytes.len() && bytes[pos] == b'#' {
            while pos < bytes.len() && bytes[pos] != b'\n' {
                pos += 1;
            }
            continue;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(bad("truncated header"));
        }
        fields.push(std::str::from_utf8(&bytes[start..pos]).map_err(|_| bad("non-ascii header"))?);
    }
    if fields[0] != "P5" {
        return Err(bad("expected magic P5"));
    }
    let parse = |s: &str| s.parse::<usize>().map_err(|_| bad("non-numeric header field"));
    let (width, height, maxval) = (parse(fields[1])?, parse(fields[2])?, parse(fields[3])?);
    if maxval != 255 {
        return Err(bad("only maxval 255 is supported"));
    }
    // exactly one whitespace byte separates the header from the raster
    pos += 1;
    let n = width * height;
    if bytes.len() < pos + n {
        return Err(bad("raster shorter than header dimensions"));
    }
    Ok((width, height, bytes[pos..pos + n].to_vec()))
}

pub fn write_gray(path: impl AsRef<Path>, img: &GrayImage) -> Result<()> {
    fs::write(path, encode_levels(img.width(), img.height(), &img.to_levels()))?;
    Ok(())
}

pub fn read_gray(path: impl AsRef<Path>) -> Result<GrayImage> {
    let (w, h, levels) = decode_levels(&fs::read(path)?)?;
    GrayImage::from_levels(w, h, &levels)
}

pub fn write_mask(path: impl AsRef<Path>, mask: &BinaryMask) -> Result<()> {
    let levels: Vec<u8> = mask.bits().iter().map(|&b| if b { 255 } else { 0 }).collect();
    fs::write(path, encode_levels(mask.width(), mask.height(), &levels))?;
    Ok(())
}

/// Levels of 128 and above read as foreground.
pub fn read_mask(path: impl AsRef<Path>) -> Result<BinaryMask> {
    let (w, h, levels) = decode_levels(&fs::read(path)?)?;
    BinaryMask::new(w, h, levels.iter().map(|&l| l >= 128).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_with_comment() {
        let mut bytes = b"P5\n# made by hand\n3 2\n255\n".to_vec();
        bytes.extend_from_slice(&[0, 1, 2, 3, 4, 255]);
        let (w, h, px) = decode_levels(&bytes).unwrap();
        assert_eq!((w, h), (3, 2));
        assert_eq!(px, vec![0, 1, 2, 3, 4, 255]);
    }

    #[test]
    fn rejects_other_formats() {
        assert!(decode_levels(b"P2\n1 1\n255\n0").is_err());
        assert!(decode_levels(b"P5\n2 2\n255\n\x00").is_err());
        assert!(decode_levels(b"P5\n1 1\n65535\n\x00\x00").is_err());
    }

    #[test]
    fn mask_file_round_trip() {
        let dir = std::env::temp_dir().join(format!("irisparse-pgm-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let m = BinaryMask::from_fn(9, 4, |x, y| (x * y) % 3 == 1);
        let p = dir.join("m.pgm");
        write_mask(&p, &m).unwrap();
        assert_eq!(read_mask(&p).unwrap(), m);

        let g = GrayImage::from_levels(3, 1, &[7, 128, 255]).unwrap();
        let p = dir.join("g.pgm");
        write_gray(&p, &g).unwrap();
        assert_eq!(read_gray(&p).unwrap().to_levels(), vec![7, 128, 255]);
        fs::remove_dir_all(dir).ok();
    }
}
