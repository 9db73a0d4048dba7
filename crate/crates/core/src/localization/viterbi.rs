use super::{BoundaryRange, PolarContour};
use crate::error::{Error, Result};
use crate::imaging::{Border, GrayImage};

/// Floor added to probabilities before taking logs.
const EMISSION_FLOOR: f64 = 1e-6;

/// Integer radii searched for a range: `ceil(r_min)..=floor(r_max)`.
fn candidate_radii(range: &BoundaryRange) -> Vec<f64> {
    let lo = range.r_min.ceil() as i64;
    let hi = range.r_max.floor() as i64;
    (lo..=hi).map(|r| r as f64).collect()
}

/// Log-emission scores `table[k][i]` for angle `k` and the `i`-th candidate
/// radius, sampled bilinearly along the ray from the range center.
pub fn emission_table(boundary: &GrayImage, range: &BoundaryRange, n_angles: usize) -> Vec<Vec<f64>> {
    let radii = candidate_radii(range);
    (0..n_angles)
        .map(|k| {
            let theta = std::f64::consts::TAU * k as f64 / n_angles as f64;
            let (s, c) = theta.sin_cos();
            radii
                .iter()
                .map(|&r| {
                    let p = boundary.bilinear(range.center.x + r * c, range.center.y + r * s, Border::Zero);
                    (p + EMISSION_FLOOR).ln()
                })
                .collect()
        })
        .collect()
}

/// Sum of log-emissions along a contour of candidate-radius indices, in
/// angle order.
pub fn contour_score(table: &[Vec<f64>], path: &[usize]) -> f64 {
    path.iter().enumerate().fold(0.0, |acc, (k, &i)| acc + table[k][i])
}

/// Closed contour maximizing the summed log-probability over the boundary
/// map, with neighbouring radii (including last→first) differing by at most
/// `delta` pixels.
///
/// Closure is exact: one dynamic program runs per start radius with the end
/// constrained to be compatible with the start, and the best of those wins.
/// Ties prefer keeping the radius unchanged, then smaller steps, then the
/// smaller start radius.
pub fn viterbi_contour(
    boundary: &GrayImage,
    range: &BoundaryRange,
    n_angles: usize,
    delta: usize,
) -> Result<PolarContour> {
    if n_angles < 8 {
        return Err(Error::Config(format!("n_angles must be >= 8, got {n_angles}")));
    }
    if delta < 1 {
        return Err(Error::Config("delta must be >= 1".into()));
    }
    let radii = candidate_radii(range);
    if range.r_max - range.r_min < 1.0 || radii.len() < 2 {
        let mid = 0.5 * (range.r_min + range.r_max);
        return Ok(PolarContour { center: range.center, n_angles, radii: vec![mid; n_angles] });
    }

    let table = emission_table(boundary, range, n_angles);
    let path = best_closed_path(&table, radii.len(), delta);
    Ok(PolarContour {
        center: range.center,
        n_angles,
        radii: path.into_iter().map(|i| radii[i]).collect(),
    })
}

/// Predecessor offsets in tie-break order: 0, -1, +1, -2, +2, ...
fn offsets(delta: usize) -> Vec<i64> {
    let mut v = vec![0i64];
    for d in 1..=delta as i64 {
        v.push(-d);
        v.push(d);
    }
    v
}

fn best_closed_path(table: &[Vec<f64>], m: usize, delta: usize) -> Vec<usize> {
    let n = table.len();
    let steps = offsets(delta);
    let mut back = vec![0u32; n * m];
    let mut prev = vec![f64::NEG_INFINITY; m];
    let mut cur = vec![f64::NEG_INFINITY; m];
    let mut best: Option<(f64, Vec<usize>)> = None;

    for start in 0..m {
        prev.fill(f64::NEG_INFINITY);
        prev[start] = table[0][start];
        for k in 1..n {
            for i in 0..m {
                let mut best_j = usize::MAX;
                let mut best_v = f64::NEG_INFINITY;
                for &s in &steps {
                    let j = i as i64 + s;
                    if j < 0 || j >= m as i64 {
                        continue;
                    }
                    let v = prev[j as usize];
                    if v > best_v {
                        best_v = v;
                        best_j = j as usize;
                    }
                }
                cur[i] = best_v + table[k][i];
                back[k * m + i] = best_j as u32;
            }
            std::mem::swap(&mut prev, &mut cur);
        }
        // the last radius must be able to step back onto the start radius
        let mut end = None;
        for &s in &steps {
            let i = start as i64 + s;
            if i < 0 || i >= m as i64 {
                continue;
            }
            let v = prev[i as usize];
            if v > f64::NEG_INFINITY && end.is_none_or(|(_, bv)| v > bv) {
                end = Some((i as usize, v));
            }
        }
        let Some((last, score)) = end else { continue };
        if best.as_ref().is_some_and(|(bv, _)| score <= *bv) {
            continue;
        }
        let mut path = vec![0usize; n];
        path[n - 1] = last;
        for k in (1..n).rev() {
            path[k - 1] = back[k * m + path[k]] as usize;
        }
        debug_assert_eq!(path[0], start);
        best = Some((score, path));
    }
    best.map(|(_, p)| p).expect("a constant-radius contour is always feasible")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::Point;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Depth-first enumeration of every feasible closed path.
    fn exhaustive(table: &[Vec<f64>], m: usize, delta: usize) -> f64 {
        fn go(table: &[Vec<f64>], m: usize, delta: usize, path: &mut Vec<usize>, best: &mut f64) {
            let k = path.len();
            if k == table.len() {
                if path[k - 1].abs_diff(path[0]) <= delta {
                    let s = path.iter().enumerate().fold(0.0, |a, (k, &i)| a + table[k][i]);
                    if s > *best {
                        *best = s;
                    }
                }
                return;
            }
            for i in 0..m {
                if k > 0 && path[k - 1].abs_diff(i) > delta {
                    continue;
                }
                path.push(i);
                go(table, m, delta, path, best);
                path.pop();
            }
        }
        let mut best = f64::NEG_INFINITY;
        go(table, m, delta, &mut Vec::new(), &mut best);
        best
    }

    fn ring_map(w: usize, c: Point, r: f64) -> GrayImage {
        GrayImage::from_fn(w, w, |x, y| {
            let d = Point::new(x as f64, y as f64).distance(c);
            (1.0 - (d - r).abs()).max(0.0)
        })
    }

    #[test]
    fn follows_a_ring() {
        let c = Point::new(20.0, 20.0);
        let map = ring_map(41, c, 10.0);
        let range = BoundaryRange::new(c, 5.0, 15.0).unwrap();
        let contour = viterbi_contour(&map, &range, 360, 2).unwrap();
        assert!(contour.radii.iter().all(|&r| r == 10.0), "{:?}", contour.radii);
    }

    #[test]
    fn uniform_map_still_smooth() {
        let map = GrayImage::from_fn(30, 30, |_, _| 0.4);
        let range = BoundaryRange::new(Point::new(15.0, 15.0), 3.0, 12.0).unwrap();
        let contour = viterbi_contour(&map, &range, 64, 1).unwrap();
        assert!(contour.max_step() <= 1.0);
        assert!(contour.radii.iter().all(|&r| (3.0..=12.0).contains(&r)));
    }

    #[test]
    fn bridges_gap_and_matches_enumeration() {
        let c = Point::new(15.0, 15.0);
        let mut map = ring_map(31, c, 8.0);
        // zero a 30 degree wedge
        for y in 0..31 {
            for x in 0..31 {
                let a = (y as f64 - c.y).atan2(x as f64 - c.x).to_degrees();
                if (0.0..30.0).contains(&a) {
                    map.set(x, y, 0.0);
                }
            }
        }
        let range = BoundaryRange::new(c, 5.0, 11.0).unwrap();
        let contour = viterbi_contour(&map, &range, 12, 1).unwrap();
        assert!(contour.max_step() <= 1.0);
        let table = emission_table(&map, &range, 12);
        let idx: Vec<usize> = contour.radii.iter().map(|&r| (r - 5.0) as usize).collect();
        assert_eq!(contour_score(&table, &idx), exhaustive(&table, 7, 1));
    }

    #[test]
    fn random_tables_match_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let n = rng.gen_range(8..=10);
            let m = rng.gen_range(2..=6);
            let delta = rng.gen_range(1..=2);
            let table: Vec<Vec<f64>> =
                (0..n).map(|_| (0..m).map(|_| rng.gen::<f64>().ln()).collect()).collect();
            let path = best_closed_path(&table, m, delta);
            assert!(path.windows(2).all(|w| w[0].abs_diff(w[1]) <= delta));
            assert!(path[n - 1].abs_diff(path[0]) <= delta);
            assert_eq!(contour_score(&table, &path), exhaustive(&table, m, delta));
        }
    }

    #[test]
    fn degenerate_range_is_single_radius() {
        let map = GrayImage::zeros(20, 20);
        let range = BoundaryRange::new(Point::new(10.0, 10.0), 4.2, 4.9).unwrap();
        let contour = viterbi_contour(&map, &range, 16, 2).unwrap();
        assert!(contour.radii.iter().all(|&r| (r - 4.55).abs() < 1e-12));
    }

    #[test]
    fn rejects_bad_parameters() {
        let map = GrayImage::zeros(20, 20);
        let range = BoundaryRange::new(Point::new(10.0, 10.0), 2.0, 8.0).unwrap();
        assert!(viterbi_contour(&map, &range, 4, 1).is_err());
        assert!(viterbi_contour(&map, &range, 16, 0).is_err());
    }
}
