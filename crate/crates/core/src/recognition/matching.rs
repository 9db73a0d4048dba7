use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Iris code and validity mask, bit-packed little-endian into `u64` words.
/// Bit `2·(i·cols + j) + p` holds phase component `p` of sample `(i, j)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IrisTemplate {
    rows: usize,
    cols: usize,
    code: Vec<u64>,
    mask: Vec<u64>,
}

fn words_for(bits: usize) -> usize {
    bits.div_ceil(64)
}

fn get_bit(words: &[u64], i: usize) -> bool {
    words[i / 64] >> (i % 64) & 1 == 1
}

fn put_bit(words: &mut [u64], i: usize, v: bool) {
    if v {
        words[i / 64] |= 1 << (i % 64);
    } else {
        words[i / 64] &= !(1 << (i % 64));
    }
}

impl IrisTemplate {
    /// All-zero code with an all-clear mask.
    pub fn blank(rows: usize, cols: usize) -> Self {
        let n = words_for(2 * rows * cols);
        Self { rows, cols, code: vec![0; n], mask: vec![0; n] }
    }

    /// Builds a template from packed words; padding bits must be zero.
    pub fn from_words(rows: usize, cols: usize, code: Vec<u64>, mask: Vec<u64>) -> Result<Self> {
        let bits = 2 * rows * cols;
        let n = words_for(bits);
        if code.len() != n || mask.len() != n {
            return Err(Error::Shape(format!("expected {n} words for {rows}x{cols}")));
        }
        if bits % 64 != 0 {
            let pad = !0u64 << (bits % 64);
            if code[n - 1] & pad != 0 || mask[n - 1] & pad != 0 {
                return Err(Error::Format { kind: "template", reason: "non-zero padding bits".into() });
            }
        }
        Ok(Self { rows, cols, code, mask })
    }

    /// Uniformly random code with a full mask.
    pub fn random<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> Self {
        let mut t = Self::blank(rows, cols);
        for i in 0..t.len_bits() {
            t.set_code(i, rng.gen());
            t.set_mask(i, true);
        }
        t
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn len_bits(&self) -> usize {
        2 * self.rows * self.cols
    }

    pub fn code_words(&self) -> &[u64] {
        &self.code
    }

    pub fn mask_words(&self) -> &[u64] {
        &self.mask
    }

    pub fn code(&self, i: usize) -> bool {
        get_bit(&self.code, i)
    }

    pub fn mask(&self, i: usize) -> bool {
        get_bit(&self.mask, i)
    }

    pub fn set_code(&mut self, i: usize, v: bool) {
        assert!(i < self.len_bits());
        put_bit(&mut self.code, i, v);
    }

    pub fn set_mask(&mut self, i: usize, v: bool) {
        assert!(i < self.len_bits());
        put_bit(&mut self.mask, i, v);
    }

    pub fn valid_bits(&self) -> usize {
        self.mask.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Flips every code bit, keeping the mask.
    pub fn complement(&self) -> Self {
        let mut t = self.clone();
        for i in 0..t.len_bits() {
            let b = t.code(i);
            t.set_code(i, !b);
        }
        t
    }

    /// Circular column shift: column `j` of the result is column `j - s` of
    /// `self`.
    pub fn shifted(&self, s: i64) -> Self {
        let cols = self.cols as i64;
        let mut t = Self::blank(self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let src = (j as i64 - s).rem_euclid(cols) as usize;
                for p in 0..2 {
                    let from = 2 * (i * self.cols + src) + p;
                    let to = 2 * (i * self.cols + j) + p;
                    put_bit(&mut t.code, to, self.code(from));
                    put_bit(&mut t.mask, to, self.mask(from));
                }
            }
        }
        t
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchScore {
    /// Fractional Hamming distance over jointly valid bits.
    pub hd: f64,
    pub shift: i64,
    pub valid_bits: usize,
}

/// A template with its shifted copies precomputed, for repeated matching.
#[derive(Debug, Clone)]
pub struct PreparedTemplate {
    base: IrisTemplate,
    /// Shifts in search order `0, -1, 1, -2, 2, …`.
    bank: Vec<(i64, IrisTemplate)>,
}

impl PreparedTemplate {
    pub fn new(t: &IrisTemplate, max_shift: usize) -> Self {
        let mut bank = vec![(0, t.clone())];
        for s in 1..=max_shift as i64 {
            bank.push((-s, t.shifted(-s)));
            bank.push((s, t.shifted(s)));
        }
        Self { base: t.clone(), bank }
    }

    pub fn template(&self) -> &IrisTemplate {
        &self.base
    }

    pub fn max_shift(&self) -> usize {
        self.bank.len() / 2
    }
}

/// Minimum masked Hamming distance of `a` against the shifted copies of `b`;
/// ties go to the shift found first (smallest magnitude, negative first).
pub fn match_prepared(a: &PreparedTemplate, b: &PreparedTemplate) -> Result<MatchScore> {
    let ta = &a.base;
    if (ta.rows, ta.cols) != (b.base.rows, b.base.cols) {
        return Err(Error::Shape(format!(
            "template {}x{} vs {}x{}",
            ta.rows, ta.cols, b.base.rows, b.base.cols
        )));
    }
    let mut best: Option<MatchScore> = None;
    for (s, tb) in &b.bank {
        let (mut diff, mut valid) = (0usize, 0usize);
        for k in 0..ta.code.len() {
            let m = ta.mask[k] & tb.mask[k];
            valid += m.count_ones() as usize;
            diff += ((ta.code[k] ^ tb.code[k]) & m).count_ones() as usize;
        }
        if valid == 0 {
            continue;
        }
        let hd = diff as f64 / valid as f64;
        if best.map_or(true, |b| hd < b.hd) {
            best = Some(MatchScore { hd, shift: *s, valid_bits: valid });
        }
    }
    best.ok_or(Error::NoOverlap)
}

pub fn match_templates(a: &IrisTemplate, b: &IrisTemplate, max_shift: usize) -> Result<MatchScore> {
    match_prepared(&PreparedTemplate::new(a, 0), &PreparedTemplate::new(b, max_shift))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rand_t(seed: u64, rows: usize, cols: usize) -> IrisTemplate {
        IrisTemplate::random(rows, cols, &mut ChaCha8Rng::seed_from_u64(seed))
    }

    #[test]
    fn self_and_complement() {
        let a = rand_t(1, 8, 64);
        let s = match_templates(&a, &a, 4).unwrap();
        assert_eq!((s.hd, s.shift, s.valid_bits), (0.0, 0, 1024));
        assert_eq!(match_templates(&a, &a.complement(), 0).unwrap().hd, 1.0);
    }

    #[test]
    fn recovers_shift() {
        let a = rand_t(2, 8, 64);
        let s = match_templates(&a.shifted(3), &a, 5).unwrap();
        assert_eq!((s.hd, s.shift), (0.0, 3));
        let s = match_templates(&a.shifted(-2), &a, 5).unwrap();
        assert_eq!((s.hd, s.shift), (0.0, -2));
    }

    /// Binomial tail: with n = 2048 fair bits, P(|hd - 0.5| > 0.05) is
    /// bounded by 2·exp(-2·n·0.05²) ≈ 7e-5 per shift.
    #[test]
    fn random_templates_near_half() {
        let bound = 2.0 * (-2.0 * 2048.0 * 0.05f64.powi(2)).exp();
        assert!(bound * 33.0 < 0.01);
        for seed in 0..20 {
            let s = match_templates(&rand_t(seed, 16, 64), &rand_t(seed + 1000, 16, 64), 16).unwrap();
            assert!((0.45..=0.55).contains(&s.hd), "seed {seed}: {}", s.hd);
        }
    }

    #[test]
    fn no_overlap() {
        let a = IrisTemplate::blank(2, 8);
        assert!(matches!(match_templates(&a, &a, 2), Err(Error::NoOverlap)));
        assert!(matches!(match_templates(&a, &IrisTemplate::blank(2, 9), 2), Err(Error::Shape(_))));
    }

    #[test]
    fn masked_bits_ignored() {
        let a = rand_t(4, 2, 32);
        let mut b = a.clone();
        for i in 0..10 {
            let v = b.code(i);
            b.set_code(i, !v);
            b.set_mask(i, false);
        }
        let s = match_templates(&a, &b, 0).unwrap();
        assert_eq!((s.hd, s.valid_bits), (0.0, 128 - 10));
    }

    #[test]
    fn from_words_validates_padding() {
        let t = rand_t(5, 1, 7);
        assert_eq!(IrisTemplate::from_words(1, 7, t.code_words().to_vec(), t.mask_words().to_vec()).unwrap(), t);
        assert!(IrisTemplate::from_words(1, 7, vec![u64::MAX], vec![0]).is_err());
        assert!(IrisTemplate::from_words(1, 7, vec![0, 0], vec![0]).is_err());
    }

    proptest! {
        #[test]
        fn symmetric_for_full_masks(s1 in 0u64..1000, s2 in 0u64..1000, shift in 0usize..6) {
            let a = rand_t(s1, 3, 24);
            let b = rand_t(s2 + 5000, 3, 24);
            let ab = match_templates(&a, &b, shift).unwrap();
            let ba = match_templates(&b, &a, shift).unwrap();
            prop_assert_eq!(ab.hd, ba.hd);
        }

        #[test]
        fn invariant_under_common_shift(s1 in 0u64..1000, s2 in 0u64..1000, k in -30i64..30) {
            let a = rand_t(s1, 3, 24);
            let b = rand_t(s2 + 5000, 3, 24);
            prop_assert_eq!(
                match_templates(&a, &b, 3).unwrap().hd,
                match_templates(&a.shifted(k), &b.shifted(k), 3).unwrap().hd
            );
        }

        #[test]
        fn hd_in_unit_interval(s1 in 0u64..1000, s2 in 0u64..1000) {
            let s = match_templates(&rand_t(s1, 2, 16), &rand_t(s2, 2, 16), 2).unwrap();
            prop_assert!((0.0..=1.0).contains(&s.hd));
            prop_assert!(s.valid_bits <= 64);
        }
    }
}
