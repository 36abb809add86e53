//! Polar template mask codec.
//!
//! An instance is described by its mass center, a main direction (toward the
//! contour point farthest from the center) and the lengths of `20·m` rays cast
//! at fixed template angles. The full turn around the main direction is cut
//! into eight 45° sectors; the two sectors either side of the main direction
//! and their point reflections get `4·m` pieces each, the other four get `m`
//! pieces each. One ray sits at the start of every piece, so the first ray
//! points exactly along the main direction.
//!
//! A uniform-angle codec with the same interface is provided as the baseline.

use std::f64::consts::{FRAC_PI_4, TAU};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{
    angle_between, mass_center, point_in_polygon, ray_max_distance_unchecked, Angle, Containment,
    GeometryError, Point2, Polygon,
};

/// Rays per unit of the subdivision parameter: 4 dense sectors × 4 + 4 sparse × 1.
pub const RAYS_PER_M: usize = 20;

/// Relative slack under which two vertex distances count as tied when picking
/// the main direction.
const MAIN_DIRECTION_TIE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CodecError {
    #[error("subdivision parameter m must be at least 1")]
    InvalidM,
    #[error("ray count must be at least 3, got {0}")]
    InvalidRayCount(usize),
    #[error("mass center ({0:?}) is not strictly inside the contour")]
    CenterOutside(Point2),
    #[error("expected {expected} distances, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("distance {index} is not a finite positive length ({value})")]
    InvalidDistance { index: usize, value: f64 },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Whether a 45° sector (indexed counter-clockwise from the main direction)
/// is one of the four densely sampled ones.
fn is_dense_sector(sector: usize) -> bool {
    matches!(sector, 0 | 3 | 4 | 7)
}

/// Ray offsets from the main direction, in radians, ascending in `[0, 2π)`.
fn template_offsets(m: usize) -> Vec<f64> {
    let mut offsets = Vec::with_capacity(RAYS_PER_M * m);
    for sector in 0..8 {
        let pieces = if is_dense_sector(sector) { 4 * m } else { m };
        for piece in 0..pieces {
            let eighths = sector as f64 + piece as f64 / pieces as f64;
            offsets.push(eighths * FRAC_PI_4);
        }
    }
    offsets
}

/// Non-uniform ray layout anchored at a main direction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolarTemplate {
    m: usize,
    main_angle: Angle,
    ray_angles: Vec<Angle>,
    delta_thetas: Vec<f64>,
}

impl PolarTemplate {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn main_angle(&self) -> Angle {
        self.main_angle
    }

    /// Ray directions, counter-clockwise starting at the main direction.
    pub fn ray_angles(&self) -> &[Angle] {
        &self.ray_angles
    }

    /// Sweep from each ray to the next one (cyclic).
    pub fn delta_thetas(&self) -> &[f64] {
        &self.delta_thetas
    }

    pub fn len(&self) -> usize {
        self.ray_angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ray_angles.is_empty()
    }
}

pub fn build_template(m: usize, main_angle: Angle) -> Result<PolarTemplate, CodecError> {
    if m < 1 {
        return Err(CodecError::InvalidM);
    }
    let ray_angles: Vec<Angle> = template_offsets(m)
        .into_iter()
        .map(|off| main_angle.offset(off))
        .collect();
    let n = ray_angles.len();
    let delta_thetas = (0..n)
        .map(|i| angle_between(ray_angles[i], ray_angles[(i + 1) % n]))
        .collect();
    Ok(PolarTemplate {
        m,
        main_angle,
        ray_angles,
        delta_thetas,
    })
}

/// Direction from `center` to the farthest contour vertex. Near-ties (within a
/// relative 1e-9) go to the lowest vertex index.
pub fn find_main_direction(poly: &Polygon, center: Point2) -> Result<Angle, GeometryError> {
    if point_in_polygon(poly, center) != Containment::Inside {
        return Err(GeometryError::OriginOutside);
    }
    Ok(farthest_vertex_direction(poly, center))
}

fn farthest_vertex_direction(poly: &Polygon, center: Point2) -> Angle {
    let mut best = poly.vertices()[0];
    let mut best_dist = best.distance(center);
    for &v in &poly.vertices()[1..] {
        let d = v.distance(center);
        if d > best_dist * (1.0 + MAIN_DIRECTION_TIE) {
            best = v;
            best_dist = d;
        }
    }
    Angle::of_vector(center, best)
}

/// Shared view of a ray-length code, whatever its angular layout.
pub trait PolarCode {
    fn center(&self) -> Point2;
    fn angles(&self) -> Vec<Angle>;
    fn distances(&self) -> &[f64];

    /// Reconstructed contour: one vertex per ray, counter-clockwise.
    fn to_polygon(&self) -> Polygon {
        let c = self.center();
        let vertices = self
            .angles()
            .into_iter()
            .zip(self.distances())
            .map(|(theta, &d)| c.along(theta, d))
            .collect();
        Polygon::new_unchecked(vertices)
    }
}

fn check_distances(distances: &[f64], expected: usize) -> Result<(), CodecError> {
    if distances.len() != expected {
        return Err(CodecError::LengthMismatch {
            expected,
            got: distances.len(),
        });
    }
    match distances.iter().position(|d| !(d.is_finite() && *d > 0.0)) {
        Some(index) => Err(CodecError::InvalidDistance {
            index,
            value: distances[index],
        }),
        None => Ok(()),
    }
}

/// An instance encoded against a polar template.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPtmCode")]
pub struct PtmCode {
    center: Point2,
    main_angle: Angle,
    m: usize,
    distances: Vec<f64>,
}

#[derive(Deserialize)]
struct RawPtmCode {
    center: Point2,
    main_angle: Angle,
    m: usize,
    distances: Vec<f64>,
}

impl TryFrom<RawPtmCode> for PtmCode {
    type Error = CodecError;
    fn try_from(raw: RawPtmCode) -> Result<Self, CodecError> {
        PtmCode::new(raw.center, raw.main_angle, raw.m, raw.distances)
    }
}

impl PtmCode {
    /// Checks `m`, the ray count and that every distance is finite and positive.
    /// Whether the main ray is the longest is not enforced here, so predicted
    /// codes can be decoded too.
    pub fn new(
        center: Point2,
        main_angle: Angle,
        m: usize,
        distances: Vec<f64>,
    ) -> Result<Self, CodecError> {
        if m < 1 {
            return Err(CodecError::InvalidM);
        }
        if !center.is_finite() {
            return Err(GeometryError::NonFinite(0).into());
        }
        check_distances(&distances, RAYS_PER_M * m)?;
        Ok(Self {
            center,
            main_angle,
            m,
            distances,
        })
    }

    pub fn center(&self) -> Point2 {
        self.center
    }

    pub fn main_angle(&self) -> Angle {
        self.main_angle
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn distances(&self) -> &[f64] {
        &self.distances
    }

    pub fn template(&self) -> PolarTemplate {
        build_template(self.m, self.main_angle).expect("m validated on construction")
    }
}

impl PolarCode for PtmCode {
    fn center(&self) -> Point2 {
        self.center
    }

    fn angles(&self) -> Vec<Angle> {
        self.template().ray_angles
    }

    fn distances(&self) -> &[f64] {
        &self.distances
    }
}

/// Baseline code with rays at `2πk / n_rays`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniformCode {
    center: Point2,
    n_rays: usize,
    distances: Vec<f64>,
}

impl UniformCode {
    pub fn new(center: Point2, n_rays: usize, distances: Vec<f64>) -> Result<Self, CodecError> {
        if n_rays < 3 {
            return Err(CodecError::InvalidRayCount(n_rays));
        }
        check_distances(&distances, n_rays)?;
        Ok(Self {
            center,
            n_rays,
            distances,
        })
    }

    pub fn n_rays(&self) -> usize {
        self.n_rays
    }
}

pub fn uniform_angles(n_rays: usize) -> Vec<Angle> {
    (0..n_rays)
        .map(|k| Angle::new(TAU * k as f64 / n_rays as f64))
        .collect()
}

impl PolarCode for UniformCode {
    fn center(&self) -> Point2 {
        self.center
    }

    fn angles(&self) -> Vec<Angle> {
        uniform_angles(self.n_rays)
    }

    fn distances(&self) -> &[f64] {
        &self.distances
    }
}

/// Mass center, validated to lie strictly inside the contour.
fn interior_center(poly: &Polygon) -> Result<Point2, CodecError> {
    let center = mass_center(poly)?;
    if point_in_polygon(poly, center) != Containment::Inside {
        return Err(CodecError::CenterOutside(center));
    }
    Ok(center)
}

fn cast_rays(poly: &Polygon, center: Point2, angles: &[Angle]) -> Result<Vec<f64>, CodecError> {
    angles
        .iter()
        .map(|&theta| {
            ray_max_distance_unchecked(poly, center, theta)
                .ok_or(CodecError::Geometry(GeometryError::NoIntersection))
        })
        .collect()
}

pub fn encode_ptm(poly: &Polygon, m: usize) -> Result<PtmCode, CodecError> {
    if m < 1 {
        return Err(CodecError::InvalidM);
    }
    let center = interior_center(poly)?;
    let main_angle = farthest_vertex_direction(poly, center);
    let template = build_template(m, main_angle)?;
    let distances = cast_rays(poly, center, template.ray_angles())?;
    PtmCode::new(center, main_angle, m, distances)
}

pub fn encode_uniform(poly: &Polygon, n_rays: usize) -> Result<UniformCode, CodecError> {
    if n_rays < 3 {
        return Err(CodecError::InvalidRayCount(n_rays));
    }
    let center = interior_center(poly)?;
    let distances = cast_rays(poly, center, &uniform_angles(n_rays))?;
    UniformCode::new(center, n_rays, distances)
}

pub fn decode(code: &PtmCode) -> Polygon {
    code.to_polygon()
}

pub fn decode_uniform(code: &UniformCode) -> Polygon {
    code.to_polygon()
}
