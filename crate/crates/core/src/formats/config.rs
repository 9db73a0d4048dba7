//! Plain-text `key = value` configuration. Blank lines and `#` comments are
//! ignored; windows are written `lo,hi`.
//!
//! ```text
//! mask_window = 200,255
//! delta = 2
//! wavelength = 18
//! ```

use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::localization::LocalizationParams;
use crate::recognition::{EncodeParams, NormalizeParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub localization: LocalizationParams,
    pub normalize: NormalizeParams,
    pub encode: EncodeParams,
    /// Largest circular column shift tried when matching.
    pub max_shift: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            localization: LocalizationParams::default(),
            normalize: NormalizeParams::default(),
            encode: EncodeParams::default(),
            max_shift: 16,
        }
    }
}

pub const KEYS: [&str; 10] = [
    "mask_window",
    "center_window",
    "boundary_window",
    "n_angles",
    "delta",
    "rows",
    "cols",
    "wavelength",
    "sigma_ratio",
    "max_shift",
];

fn parse<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::Config(format!("{key}: cannot parse {v:?}")))
}

fn parse_window(key: &str, v: &str) -> Result<(u8, u8)> {
    let (lo, hi) = v.split_once(',').ok_or_else(|| Error::Config(format!("{key}: expected lo,hi")))?;
    Ok((parse(key, lo.trim())?, parse(key, hi.trim())?))
}

impl PipelineConfig {
    /// Applies one setting on top of the current values.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key {
            "mask_window" => self.localization.mask_window = parse_window(key, v)?,
            "center_window" => self.localization.center_window = parse_window(key, v)?,
            "boundary_window" => self.localization.boundary_window = parse_window(key, v)?,
            "n_angles" => self.localization.n_angles = parse(key, v)?,
            "delta" => self.localization.delta = parse(key, v)?,
            "rows" => self.normalize.rows = parse(key, v)?,
            "cols" => self.normalize.cols = parse(key, v)?,
            "wavelength" => self.encode.wavelength = parse(key, v)?,
            "sigma_ratio" => self.encode.sigma_ratio = parse(key, v)?,
            "max_shift" => self.max_shift = parse(key, v)?,
            _ => return Err(Error::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    pub fn parse_str(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
            cfg.set(k.trim(), v).map_err(|e| Error::Config(format!("line {}: {e}", n + 1)))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse_str(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.localization.validate()?;
        let n = &self.normalize;
        if n.rows == 0 || n.cols == 0 {
            return Err(Error::Config("rows and cols must be >= 1".into()));
        }
        let e = &self.encode;
        if !(e.wavelength > 0.0) || !(e.sigma_ratio > 0.0 && e.sigma_ratio < 1.0) {
            return Err(Error::Config("wavelength must be > 0 and sigma_ratio in (0, 1)".into()));
        }
        if (n.cols as f64) < 2.0 * e.wavelength {
            return Err(Error::Config(format!("cols {} below twice the wavelength {}", n.cols, e.wavelength)));
        }
        Ok(())
    }

    /// Renders every setting, in a form [`PipelineConfig::parse_str`] reads back.
    pub fn render(&self) -> String {
        let l = &self.localization;
        let w = |(lo, hi): (u8, u8)| format!("{lo},{hi}");
        format!(
            "mask_window = {}\ncenter_window = {}\nboundary_window = {}\nn_angles = {}\ndelta = {}\n\
             rows = {}\ncols = {}\nwavelength = {}\nsigma_ratio = {}\nmax_shift = {}\n",
            w(l.mask_window),
            w(l.center_window),
            w(l.boundary_window),
            l.n_angles,
            l.delta,
            self.normalize.rows,
            self.normalize.cols,
            self.encode.wavelength,
            self.encode.sigma_ratio,
            self.max_shift
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_is_default() {
        assert_eq!(PipelineConfig::parse_str("").unwrap(), PipelineConfig::default());
        let d = PipelineConfig::default();
        assert_eq!((d.normalize.rows, d.normalize.cols, d.max_shift), (64, 512, 16));
        assert_eq!((d.encode.wavelength, d.encode.sigma_ratio), (18.0, 0.5));
    }

    #[test]
    fn parses_overrides() {
        let c = PipelineConfig::parse_str(
            "# tuned\nmask_window = 190, 255\n\ndelta=3  # smoother\nwavelength = 12.5\nrows = 32\n",
        )
        .unwrap();
        assert_eq!(c.localization.mask_window, (190, 255));
        assert_eq!(c.localization.delta, 3);
        assert_eq!(c.encode.wavelength, 12.5);
        assert_eq!(c.normalize.rows, 32);
    }

    #[test]
    fn errors() {
        for bad in ["nonsense", "foo = 1", "delta = x", "mask_window = 200", "delta = 0", "mask_window = 255,3", "cols = 20"] {
            assert!(PipelineConfig::parse_str(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn render_round_trip() {
        let mut c = PipelineConfig::default();
        c.set("boundary_window", "120,250").unwrap();
        c.set("sigma_ratio", "0.45").unwrap();
        assert_eq!(PipelineConfig::parse_str(&c.render()).unwrap(), c);
    }
}
