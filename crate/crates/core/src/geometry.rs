//! Planar primitives: points, simple polygons, normalized angles, and the
//! ray casting used to sample a contour from its mass center.

use std::f64::consts::TAU;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Polygons whose absolute signed area falls below this are treated as degenerate.
pub const DEGENERATE_AREA: f64 = 1e-9;

/// Distance (pixels) under which a point counts as lying on a polygon edge.
pub const BOUNDARY_TOLERANCE: f64 = 1e-9;

/// Slack on the edge parameter when intersecting rays with segments, so rays
/// passing exactly through a vertex are not lost to rounding.
const EDGE_PARAM_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("polygon needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("vertex {0} has a non-finite coordinate")]
    NonFinite(usize),
    #[error("vertices {0} and {1} coincide")]
    DuplicateVertex(usize, usize),
    #[error("polygon is degenerate (|signed area| = {0:e})")]
    DegeneratePolygon(f64),
    #[error("ray origin is not strictly inside the polygon")]
    OriginOutside,
    #[error("ray found no polygon edge")]
    NoIntersection,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn distance(self, other: Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    /// Point reached by walking `length` from `self` along `theta`.
    pub fn along(self, theta: Angle, length: f64) -> Point2 {
        let (s, c) = theta.radians().sin_cos();
        Point2::new(self.x + length * c, self.y + length * s)
    }

    /// Rotate about `pivot` by `angle` radians (counter-clockwise).
    pub fn rotate_about(self, pivot: Point2, angle: f64) -> Point2 {
        let (s, c) = angle.sin_cos();
        let dx = self.x - pivot.x;
        let dy = self.y - pivot.y;
        Point2::new(pivot.x + c * dx - s * dy, pivot.y + s * dx + c * dy)
    }
}

impl std::ops::Add for Point2 {
    type Output = Point2;
    fn add(self, rhs: Point2) -> Point2 {
        Point2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl std::ops::Sub for Point2 {
    type Output = Point2;
    fn sub(self, rhs: Point2) -> Point2 {
        Point2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

fn cross(a: Point2, b: Point2) -> f64 {
    a.x * b.y - a.y * b.x
}

fn dot(a: Point2, b: Point2) -> f64 {
    a.x * b.x + a.y * b.y
}

/// An angle in radians, always normalized to `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Angle(f64);

impl Angle {
    pub const ZERO: Angle = Angle(0.0);

    pub fn new(radians: f64) -> Self {
        let r = radians.rem_euclid(TAU);
        // rem_euclid can round up to exactly TAU for tiny negative inputs
        Angle(if r >= TAU { 0.0 } else { r })
    }

    pub fn from_degrees(degrees: f64) -> Self {
        Angle::new(degrees.to_radians())
    }

    pub fn radians(self) -> f64 {
        self.0
    }

    pub fn degrees(self) -> f64 {
        self.0.to_degrees()
    }

    /// Direction of the vector from `from` to `to`.
    pub fn of_vector(from: Point2, to: Point2) -> Self {
        Angle::new((to.y - from.y).atan2(to.x - from.x))
    }

    pub fn offset(self, radians: f64) -> Self {
        Angle::new(self.0 + radians)
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}rad", self.0)
    }
}

/// Counter-clockwise sweep from `a` to `b`, in `(0, 2π]`.
///
/// Identical angles give a full turn, which is what a cyclic list of one
/// direction needs.
pub fn angle_between(a: Angle, b: Angle) -> f64 {
    let d = (b.0 - a.0).rem_euclid(TAU);
    if d == 0.0 || d >= TAU {
        TAU
    } else {
        d
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    CounterClockwise,
    Clockwise,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Containment {
    Inside,
    Outside,
    Boundary,
}

/// A closed simple contour. The closing edge from the last vertex back to the
/// first is implicit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Polygon {
    vertices: Vec<Point2>,
    orientation: Orientation,
}

impl Polygon {
    /// Validates vertex count, finiteness, consecutive duplicates (including the
    /// closing pair) and non-zero signed area.
    pub fn new(vertices: Vec<Point2>) -> Result<Self, GeometryError> {
        let n = vertices.len();
        if n < 3 {
            return Err(GeometryError::TooFewVertices(n));
        }
        if let Some(i) = vertices.iter().position(|p| !p.is_finite()) {
            return Err(GeometryError::NonFinite(i));
        }
        for i in 0..n {
            let j = (i + 1) % n;
            if vertices[i] == vertices[j] {
                return Err(GeometryError::DuplicateVertex(i, j));
            }
        }
        let area = signed_area(&vertices);
        if area == 0.0 || !area.is_finite() {
            return Err(GeometryError::DegeneratePolygon(area));
        }
        Ok(Self::with_area_sign(vertices, area))
    }

    /// Builds a polygon without validation. Used for reconstructions whose
    /// vertices may collapse onto each other in the limit of tiny radii.
    pub(crate) fn new_unchecked(vertices: Vec<Point2>) -> Self {
        let area = signed_area(&vertices);
        Self::with_area_sign(vertices, area)
    }

    fn with_area_sign(vertices: Vec<Point2>, area: f64) -> Self {
        let orientation = if area >= 0.0 {
            Orientation::CounterClockwise
        } else {
            Orientation::Clockwise
        };
        Self {
            vertices,
            orientation,
        }
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn into_vertices(self) -> Vec<Point2> {
        self.vertices
    }

    /// Edges as `(start, end)` pairs, closing edge last.
    pub fn edges(&self) -> impl Iterator<Item = (Point2, Point2)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn signed_area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    pub fn area(&self) -> f64 {
        self.signed_area().abs()
    }

    /// Same contour traversed the other way.
    pub fn reversed(&self) -> Polygon {
        let mut v = self.vertices.clone();
        v.reverse();
        Polygon::new_unchecked(v)
    }

    /// Apply `f` to every vertex, keeping the vertex order.
    pub fn map_vertices(&self, f: impl Fn(Point2) -> Point2) -> Result<Polygon, GeometryError> {
        Polygon::new(self.vertices.iter().map(|&p| f(p)).collect())
    }

    /// Axis-aligned bounds as `(min, max)`.
    pub fn bounds(&self) -> (Point2, Point2) {
        let mut lo = Point2::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in &self.vertices {
            lo.x = lo.x.min(p.x);
            lo.y = lo.y.min(p.y);
            hi.x = hi.x.max(p.x);
            hi.y = hi.y.max(p.y);
        }
        (lo, hi)
    }

    /// Shortest distance from `p` to any edge.
    pub fn distance_to_boundary(&self, p: Point2) -> f64 {
        self.edges()
            .map(|(a, b)| point_segment_distance(p, a, b))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Shoelace area, positive for counter-clockwise vertex order. Coordinates are
/// taken relative to the first vertex to limit cancellation far from the origin.
fn signed_area(vertices: &[Point2]) -> f64 {
    let n = vertices.len();
    if n < 3 {
        return 0.0;
    }
    let o = vertices[0];
    let mut acc = 0.0;
    for i in 0..n {
        let a = vertices[i] - o;
        let b = vertices[(i + 1) % n] - o;
        acc += cross(a, b);
    }
    acc * 0.5
}

pub fn point_segment_distance(p: Point2, a: Point2, b: Point2) -> f64 {
    let ab = b - a;
    let len2 = dot(ab, ab);
    if len2 == 0.0 {
        return p.distance(a);
    }
    let t = (dot(p - a, ab) / len2).clamp(0.0, 1.0);
    p.distance(Point2::new(a.x + t * ab.x, a.y + t * ab.y))
}

/// Area-weighted centroid of the region enclosed by `poly`.
pub fn mass_center(poly: &Polygon) -> Result<Point2, GeometryError> {
    let v = poly.vertices();
    let o = v[0];
    let mut twice_area = 0.0;
    let mut cx = 0.0;
    let mut cy = 0.0;
    for i in 0..v.len() {
        let a = v[i] - o;
        let b = v[(i + 1) % v.len()] - o;
        let c = cross(a, b);
        twice_area += c;
        cx += (a.x + b.x) * c;
        cy += (a.y + b.y) * c;
    }
    let area = twice_area * 0.5;
    if area.abs() < DEGENERATE_AREA {
        return Err(GeometryError::DegeneratePolygon(area));
    }
    Ok(Point2::new(
        o.x + cx / (6.0 * area),
        o.y + cy / (6.0 * area),
    ))
}

/// Even-odd classification with an explicit boundary band of
/// [`BOUNDARY_TOLERANCE`] pixels.
pub fn point_in_polygon(poly: &Polygon, p: Point2) -> Containment {
    if poly.distance_to_boundary(p) <= BOUNDARY_TOLERANCE {
        return Containment::Boundary;
    }
    let mut inside = false;
    for (a, b) in poly.edges() {
        // half-open in y so a crossing at a shared vertex counts once
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if x > p.x {
                inside = !inside;
            }
        }
    }
    if inside {
        Containment::Inside
    } else {
        Containment::Outside
    }
}

/// Distance from `origin` to the farthest crossing of the ray at `theta` with
/// the contour. Taking the farthest crossing keeps non-star-shaped contours
/// covered as fully as a single ray allows.
pub fn ray_max_distance(
    poly: &Polygon,
    origin: Point2,
    theta: Angle,
) -> Result<f64, GeometryError> {
    if point_in_polygon(poly, origin) != Containment::Inside {
        return Err(GeometryError::OriginOutside);
    }
    ray_max_distance_unchecked(poly, origin, theta).ok_or(GeometryError::NoIntersection)
}

/// [`ray_max_distance`] without the containment check, for callers that have
/// already validated the origin once and cast many rays.
pub(crate) fn ray_max_distance_unchecked(
    poly: &Polygon,
    origin: Point2,
    theta: Angle,
) -> Option<f64> {
    let (s, c) = theta.radians().sin_cos();
    let dir = Point2::new(c, s);
    let mut best: Option<f64> = None;
    let mut consider = |t: f64| {
        if t > 0.0 && best.is_none_or(|b| t > b) {
            best = Some(t);
        }
    };
    for (a, b) in poly.edges() {
        let edge = b - a;
        let w = a - origin;
        let denom = cross(dir, edge);
        let scale = edge.x.abs().max(edge.y.abs());
        if denom.abs() <= 1e-14 * scale {
            // parallel; only a collinear edge touches the ray
            if cross(w, dir).abs() <= BOUNDARY_TOLERANCE {
                consider(dot(w, dir));
                consider(dot(b - origin, dir));
            }
            continue;
        }
        let t = cross(w, edge) / denom;
        let u = cross(w, dir) / denom;
        if (-EDGE_PARAM_SLACK..=1.0 + EDGE_PARAM_SLACK).contains(&u) {
            consider(t);
        }
    }
    best
}
