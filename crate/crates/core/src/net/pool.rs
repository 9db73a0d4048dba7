use super::Tensor;
use crate::error::{Error, Result};

/// 3×3 stride-1 average pooling; border windows average only the pixels
/// that exist.
pub fn avg_pool3x3(x: &Tensor) -> Tensor {
    let (c, h, w) = x.shape();
    Tensor::from_fn(c, h, w, |ch, y, xx| {
        let (mut s, mut n) = (0.0, 0.0);
        for yy in y.saturating_sub(1)..=(y + 1).min(h - 1) {
            for xv in xx.saturating_sub(1)..=(xx + 1).min(w - 1) {
                s += x.get(ch, yy, xv);
                n += 1.0;
            }
        }
        s / n
    })
}

/// Bin `i` of `bins` over `n` cells: `[floor(i·n/b), ceil((i+1)·n/b))`.
fn bin_edges(i: usize, bins: usize, n: usize) -> (usize, usize) {
    (i * n / bins, ((i + 1) * n).div_ceil(bins))
}

/// Average pooling to a `bins × bins` grid.
pub fn adaptive_avg_pool(x: &Tensor, bins: usize) -> Result<Tensor> {
    if bins == 0 {
        return Err(Error::Config("pooling bins must be >= 1".into()));
    }
    let (c, h, w) = x.shape();
    if h == 0 || w == 0 {
        return Err(Error::EmptyInput("tensor to pool"));
    }
    Ok(Tensor::from_fn(c, bins, bins, |ch, by, bx| {
        let (y0, y1) = bin_edges(by, bins, h);
        let (x0, x1) = bin_edges(bx, bins, w);
        let mut s = 0.0;
        for y in y0..y1 {
            for xx in x0..x1 {
                s += x.get(ch, y, xx);
            }
        }
        s / ((y1 - y0) * (x1 - x0)) as f64
    }))
}

/// Bilinear resize with half-pixel centres and edge clamping; a 1×1 source
/// is replicated.
pub fn upsample_bilinear(x: &Tensor, out_h: usize, out_w: usize) -> Tensor {
    let (c, h, w) = x.shape();
    let src = |dst: usize, n_in: usize, n_out: usize| {
        let s = ((dst as f64 + 0.5) * n_in as f64 / n_out as f64 - 0.5).clamp(0.0, (n_in - 1) as f64);
        let i0 = s.floor() as usize;
        let i1 = (i0 + 1).min(n_in - 1);
        (i0, i1, s - i0 as f64)
    };
    Tensor::from_fn(c, out_h, out_w, |ch, y, xx| {
        let (y0, y1, fy) = src(y, h, out_h);
        let (x0, x1, fx) = src(xx, w, out_w);
        let top = x.get(ch, y0, x0) * (1.0 - fx) + x.get(ch, y0, x1) * fx;
        let bottom = x.get(ch, y1, x0) * (1.0 - fx) + x.get(ch, y1, x1) * fx;
        top * (1.0 - fy) + bottom * fy
    })
}

const SIGMOID_FLOOR: f64 = 1e-15;

/// Logistic function, kept strictly inside `(0, 1)` even where `f64`
/// would round to an endpoint.
pub fn sigmoid(v: f64) -> f64 {
    (1.0 / (1.0 + (-v).exp())).clamp(SIGMOID_FLOOR, 1.0 - SIGMOID_FLOOR)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn avg_pool_borders() {
        let x = Tensor::from_fn(1, 3, 3, |_, y, xx| (y * 3 + xx) as f64);
        let p = avg_pool3x3(&x);
        assert_eq!(p.get(0, 1, 1), 4.0);
        assert_eq!(p.get(0, 0, 0), (0.0 + 1.0 + 3.0 + 4.0) / 4.0);
        let k = Tensor::from_fn(2, 4, 5, |_, _, _| 2.5);
        assert_eq!(avg_pool3x3(&k), k);
    }

    #[test]
    fn quadrant_means() {
        let x = Tensor::from_fn(1, 8, 8, |_, y, xx| (y * 8 + xx) as f64);
        let p = adaptive_avg_pool(&x, 2).unwrap();
        for (qy, qx) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            let mut s = 0.0;
            for y in 0..4 {
                for xx in 0..4 {
                    s += x.get(0, qy * 4 + y, qx * 4 + xx);
                }
            }
            assert_eq!(p.get(0, qy, qx), s / 16.0);
        }
        let g = adaptive_avg_pool(&x, 1).unwrap();
        assert_eq!(g.get(0, 0, 0), 31.5);
    }

    #[test]
    fn uneven_bins_overlap() {
        assert_eq!(bin_edges(0, 3, 7), (0, 3));
        assert_eq!(bin_edges(1, 3, 7), (2, 5));
        assert_eq!(bin_edges(2, 3, 7), (4, 7));
        assert_eq!(bin_edges(5, 6, 5), (4, 5));
        assert!(adaptive_avg_pool(&Tensor::zeros(1, 2, 2), 0).is_err());
    }

    #[test]
    fn upsample_properties() {
        let k = Tensor::from_fn(1, 3, 4, |_, _, _| 0.7);
        assert!(upsample_bilinear(&k, 6, 8).data().iter().all(|&v| (v - 0.7).abs() < 1e-15));
        let one = Tensor::new(1, 1, 1, vec![3.0]).unwrap();
        assert!(upsample_bilinear(&one, 5, 7).data().iter().all(|&v| v == 3.0));
        let ramp = Tensor::from_fn(1, 1, 2, |_, _, x| x as f64);
        let up = upsample_bilinear(&ramp, 1, 4);
        assert_eq!(up.data(), &[0.0, 0.25, 0.75, 1.0]);
    }

    #[test]
    fn sigmoid_open_interval() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!(sigmoid(800.0) < 1.0 && sigmoid(-800.0) > 0.0);
        assert!((sigmoid(-10.0) - 4.5398e-5).abs() < 1e-9);
    }
}
