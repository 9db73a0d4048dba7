use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::{IrisTemplate, NormalizedIris};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EncodeParams {
    /// Centre wavelength in angular samples.
    pub wavelength: f64,
    /// Bandwidth parameter σ/f₀, in (0, 1).
    pub sigma_ratio: f64,
}

impl Default for EncodeParams {
    fn default() -> Self {
        Self { wavelength: 18.0, sigma_ratio: 0.5 }
    }
}

const MIN_MAGNITUDE: f64 = 1e-9;

/// Transfer function over DFT bins; only strictly positive frequencies below
/// Nyquist pass, so the response is the analytic-signal band.
fn log_gabor(n: usize, params: &EncodeParams) -> Vec<f64> {
    let f0 = 1.0 / params.wavelength;
    let denom = 2.0 * params.sigma_ratio.ln().powi(2);
    (0..n)
        .map(|k| {
            if k == 0 || 2 * k >= n {
                0.0
            } else {
                let f = k as f64 / n as f64;
                (-(f / f0).ln().powi(2) / denom).exp()
            }
        })
        .collect()
}

/// Two phase bits per sample (signs of the real and imaginary filter
/// response), laid out as `2·(i·cols + j)` and `2·(i·cols + j) + 1`.
pub fn encode(norm: &NormalizedIris, params: &EncodeParams) -> Result<IrisTemplate> {
    if !(params.wavelength > 0.0) || !(params.sigma_ratio > 0.0 && params.sigma_ratio < 1.0) {
        return Err(Error::Config(format!(
            "wavelength {} / sigma ratio {} out of range",
            params.wavelength, params.sigma_ratio
        )));
    }
    let cols = norm.cols;
    if (cols as f64) < 2.0 * params.wavelength {
        return Err(Error::Config(format!("wavelength {} too large for {cols} columns", params.wavelength)));
    }

    let gain = log_gabor(cols, params);
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(cols);
    let inv = planner.plan_fft_inverse(cols);
    let mut tpl = IrisTemplate::blank(norm.rows, cols);
    let mut buf = vec![Complex::new(0.0, 0.0); cols];
    for i in 0..norm.rows {
        for (j, b) in buf.iter_mut().enumerate() {
            *b = Complex::new(norm.get(i, j), 0.0);
        }
        fwd.process(&mut buf);
        for (b, g) in buf.iter_mut().zip(&gain) {
            *b *= g / cols as f64;
        }
        inv.process(&mut buf);
        for (j, r) in buf.iter().enumerate() {
            let bit = 2 * (i * cols + j);
            tpl.set_code(bit, r.re > 0.0);
            tpl.set_code(bit + 1, r.im > 0.0);
            let usable = norm.is_valid(i, j) && r.norm() >= MIN_MAGNITUDE;
            tpl.set_mask(bit, usable);
            tpl.set_mask(bit + 1, usable);
        }
    }
    Ok(tpl)
}
