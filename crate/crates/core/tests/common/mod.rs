#![allow(dead_code)]

use ptm_core::geometry::{Point2, Polygon};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Monotone-chain hull, counter-clockwise, collinear points dropped.
pub fn convex_hull(mut pts: Vec<Point2>) -> Vec<Point2> {
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let cross =
        |o: Point2, a: Point2, b: Point2| (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
    let mut hull: Vec<Point2> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Point2>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2
                && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0
            {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

/// Convex hull of `n` points drawn in a disc of the given radius around
/// `center`; redrawn until the hull has at least `min_area`.
pub fn random_convex(
    rng: &mut ChaCha8Rng,
    center: Point2,
    radius: f64,
    n: usize,
    min_area: f64,
) -> Polygon {
    loop {
        let pts = (0..n)
            .map(|_| {
                let r = radius * rng.random::<f64>().sqrt();
                let t = rng.random_range(0.0..std::f64::consts::TAU);
                Point2::new(center.x + r * t.cos(), center.y + r * t.sin())
            })
            .collect();
        let hull = convex_hull(pts);
        if hull.len() < 3 {
            continue;
        }
        if let Ok(poly) = Polygon::new(hull) {
            if poly.area() >= min_area {
                return poly;
            }
        }
    }
}
