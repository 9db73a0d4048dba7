use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Circle, Point};
use crate::error::{Error, Result};

/// Radius used for a degenerate circle around a single location.
const MIN_RADIUS: f64 = 1e-9;

/// Smallest circle containing every point (Welzl, iterative form).
///
/// Points are visited in a fixed pseudo-random order so the expected cost is
/// linear and the result is deterministic.
pub fn min_enclosing_circle(points: &[Point]) -> Result<Circle> {
    if points.is_empty() {
        return Err(Error::EmptyInput("min_enclosing_circle needs at least one point"));
    }
    let mut pts = points.to_vec();
    pts.shuffle(&mut ChaCha8Rng::seed_from_u64(0x5eed_c1c1e));

    let scale = pts.iter().fold(0.0f64, |m, p| m.max(p.x.abs()).max(p.y.abs()));
    let eps = 1e-12 * (1.0 + scale);

    let mut c = Disk::point(pts[0]);
    for i in 1..pts.len() {
        if c.contains(pts[i], eps) {
            continue;
        }
        c = Disk::point(pts[i]);
        for j in 0..i {
            if c.contains(pts[j], eps) {
                continue;
            }
            c = Disk::diameter(pts[i], pts[j]);
            for k in 0..j {
                if !c.contains(pts[k], eps) {
                    c = Disk::through(pts[i], pts[j], pts[k]);
                }
            }
        }
    }
    Ok(Circle { cx: c.center.x, cy: c.center.y, r: c.radius.max(MIN_RADIUS) })
}

#[derive(Debug, Clone, Copy)]
struct Disk {
    center: Point,
    radius: f64,
}

impl Disk {
    fn point(p: Point) -> Self {
        Self { center: p, radius: 0.0 }
    }

    fn diameter(a: Point, b: Point) -> Self {
        let center = Point::new((a.x + b.x) / 2.0, (a.y + b.y) / 2.0);
        Self { center, radius: center.distance(a).max(center.distance(b)) }
    }

    /// Circumcircle; collinear triples fall back to the widest pair.
    fn through(a: Point, b: Point, c: Point) -> Self {
        let (bx, by) = (b.x - a.x, b.y - a.y);
        let (cx, cy) = (c.x - a.x, c.y - a.y);
        let d = 2.0 * (bx * cy - by * cx);
        let span = (bx * bx + by * by).max(cx * cx + cy * cy);
        if d.abs() <= 1e-14 * span {
            let candidates = [Disk::diameter(a, b), Disk::diameter(a, c), Disk::diameter(b, c)];
            return candidates
                .into_iter()
                .max_by(|p, q| p.radius.total_cmp(&q.radius))
                .unwrap();
        }
        let b2 = bx * bx + by * by;
        let c2 = cx * cx + cy * cy;
        let ux = (cy * b2 - by * c2) / d;
        let uy = (bx * c2 - cx * b2) / d;
        let center = Point::new(a.x + ux, a.y + uy);
        let radius = center.distance(a).max(center.distance(b)).max(center.distance(c));
        Self { center, radius }
    }

    fn contains(&self, p: Point, eps: f64) -> bool {
        self.center.distance(p) <= self.radius + eps
    }
}
