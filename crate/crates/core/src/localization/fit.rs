use super::PolarContour;
use crate::error::{Error, Result};
use crate::imaging::{Circle, Point};

const MAX_CONDITION: f64 = 1e12;

/// Algebraic (Kåsa) least-squares circle through the contour points.
pub fn fit_circle(contour: &PolarContour) -> Result<Circle> {
    fit_circle_points(&contour.points())
}

/// Kåsa fit: minimizes `Σ (x² + y² + A·x + B·y + C)²`.
///
/// Solved on mean-centred coordinates, where the normal equations decouple
/// into a 2×2 system for the center offset; the radius follows from the
/// mean squared distance.
pub fn fit_circle_points(points: &[Point]) -> Result<Circle> {
    if points.len() < 3 {
        return Err(Error::DegenerateGeometry(format!(
            "circle fit needs at least 3 points, got {}",
            points.len()
        )));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.x).sum::<f64>() / n;
    let my = points.iter().map(|p| p.y).sum::<f64>() / n;

    let (mut suu, mut suv, mut svv) = (0.0, 0.0, 0.0);
    let (mut suuu, mut svvv, mut suvv, mut svuu) = (0.0, 0.0, 0.0, 0.0);
    for p in points {
        let (u, v) = (p.x - mx, p.y - my);
        let (uu, vv) = (u * u, v * v);
        suu += uu;
        suv += u * v;
        svv += vv;
        suuu += uu * u;
        svvv += vv * v;
        suvv += u * vv;
        svuu += v * uu;
    }

    // eigenvalues of the symmetric scatter matrix [[suu, suv], [suv, svv]]
    let mean = 0.5 * (suu + svv);
    let spread = (0.25 * (suu - svv).powi(2) + suv * suv).sqrt();
    let (lmax, lmin) = (mean + spread, mean - spread);
    if !(lmin > 0.0) || lmax / lmin > MAX_CONDITION {
        return Err(Error::DegenerateGeometry("points are (nearly) collinear".into()));
    }

    let det = suu * svv - suv * suv;
    let bu = 0.5 * (suuu + suvv);
    let bv = 0.5 * (svvv + svuu);
    let uc = (bu * svv - bv * suv) / det;
    let vc = (suu * bv - suv * bu) / det;
    let r = (uc * uc + vc * vc + (suu + svv) / n).sqrt();
    Circle::new(mx + uc, my + vc, r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn circumcircle(a: Point, b: Point, c: Point) -> (f64, f64, f64) {
        let d = 2.0 * (a.x * (b.y - c.y) + b.x * (c.y - a.y) + c.x * (a.y - b.y));
        let a2 = a.x * a.x + a.y * a.y;
        let b2 = b.x * b.x + b.y * b.y;
        let c2 = c.x * c.x + c.y * c.y;
        let ux = (a2 * (b.y - c.y) + b2 * (c.y - a.y) + c2 * (a.y - b.y)) / d;
        let uy = (a2 * (c.x - b.x) + b2 * (a.x - c.x) + c2 * (b.x - a.x)) / d;
        (ux, uy, Point::new(ux, uy).distance(a))
    }

    #[test]
    fn exact_on_circle() {
        let truth = Circle::new(5.0, 5.0, 3.0).unwrap();
        let c = fit_circle_points(&truth.densify(16)).unwrap();
        assert!((c.cx - 5.0).abs() < 1e-6 && (c.cy - 5.0).abs() < 1e-6 && (c.r - 3.0).abs() < 1e-6);
    }

    #[test]
    fn three_points_give_circumcircle() {
        let pts = [Point::new(1.0, 0.5), Point::new(7.0, 2.0), Point::new(3.0, 9.0)];
        let c = fit_circle_points(&pts).unwrap();
        let (ox, oy, or) = circumcircle(pts[0], pts[1], pts[2]);
        assert!((c.cx - ox).abs() < 1e-9 && (c.cy - oy).abs() < 1e-9 && (c.r - or).abs() < 1e-9);
    }

    #[test]
    fn noisy_circle_statistics() {
        let mut hits = 0;
        for seed in 0..100 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pts: Vec<_> = (0..360)
                .map(|k| {
                    let t = (k as f64).to_radians();
                    let r = 10.0 + rng.gen_range(-0.5..0.5);
                    Point::new(r * t.cos(), r * t.sin())
                })
                .collect();
            let c = fit_circle_points(&pts).unwrap();
            if (c.r - 10.0).abs() <= 0.2 && c.cx.hypot(c.cy) <= 0.2 {
                hits += 1;
            }
        }
        assert_eq!(hits, 100);
    }

    #[test]
    fn collinear_is_degenerate() {
        let pts: Vec<_> = (0..10).map(|i| Point::new(i as f64, 3.0 * i as f64 + 1.0)).collect();
        assert!(matches!(fit_circle_points(&pts), Err(Error::DegenerateGeometry(_))));
        assert!(fit_circle_points(&pts[..2]).is_err());
    }

    proptest! {
        #[test]
        fn translation_equivariant(
            raw in prop::collection::vec((-20.0f64..20.0, -20.0f64..20.0), 5..40),
            tx in -500.0f64..500.0,
            ty in -500.0f64..500.0,
        ) {
            let pts: Vec<Point> = raw.into_iter().map(Point::from).collect();
            let Ok(a) = fit_circle_points(&pts) else { return Ok(()) };
            let shifted: Vec<Point> = pts.iter().map(|p| Point::new(p.x + tx, p.y + ty)).collect();
            let b = fit_circle_points(&shifted).unwrap();
            prop_assert!((b.cx - a.cx - tx).abs() < 1e-9);
            prop_assert!((b.cy - a.cy - ty).abs() < 1e-9);
            prop_assert!((b.r - a.r).abs() < 1e-9);
        }
    }
}
