//! Synthetic silhouettes and the `kind:key=val,…` spec strings that describe
//! batches of them.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::geometry::{Angle, Point2, Polygon};
use crate::ingest::{InstanceRecord, Source};

pub const DEFAULT_VERTICES: usize = 720;
pub const MIN_VERTICES: usize = 32;

/// Shapes whose semi-major axis is below this many pixels are taken as
/// proportions and scaled up to [`DEFAULT_SEMI_MAJOR_PX`].
pub const MIN_SEMI_MAJOR_PX: f64 = 40.0;
pub const DEFAULT_SEMI_MAJOR_PX: f64 = 100.0;

/// Largest center offset (pixels) applied to synthetic placements.
const MAX_JITTER_PX: f64 = 8.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ShapeError {
    #[error("invalid shape: {0}")]
    InvalidSpec(String),
    #[error("bad synthetic spec {spec:?}: {reason}")]
    BadSpecString { spec: String, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeKind {
    Ellipse,
    /// Two circular arcs meeting in sharp tips on the major axis.
    Lens,
    Rectangle,
}

impl fmt::Display for ShapeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ShapeKind::Ellipse => "ellipse",
            ShapeKind::Lens => "lens",
            ShapeKind::Rectangle => "rectangle",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShapeSpec {
    pub kind: ShapeKind,
    pub semi_major: f64,
    pub semi_minor: f64,
    pub rotation: Angle,
    pub center: Point2,
    pub n_vertices: usize,
}

impl ShapeSpec {
    pub fn new(kind: ShapeKind, semi_major: f64, semi_minor: f64) -> Self {
        Self {
            kind,
            semi_major,
            semi_minor,
            rotation: Angle::ZERO,
            center: Point2::default(),
            n_vertices: DEFAULT_VERTICES,
        }
    }

    fn validate(&self) -> Result<(), ShapeError> {
        let (a, b) = (self.semi_major, self.semi_minor);
        if !(a.is_finite() && b.is_finite() && b > 0.0 && a >= b) {
            return Err(ShapeError::InvalidSpec(format!(
                "need a >= b > 0, got a={a}, b={b}"
            )));
        }
        if self.n_vertices < MIN_VERTICES {
            return Err(ShapeError::InvalidSpec(format!(
                "n_vertices {} below {MIN_VERTICES}",
                self.n_vertices
            )));
        }
        if !self.center.is_finite() {
            return Err(ShapeError::InvalidSpec("non-finite center".into()));
        }
        Ok(())
    }
}

/// Outline centered on the origin, major axis along x, counter-clockwise.
fn local_outline(spec: &ShapeSpec) -> Vec<Point2> {
    let (a, b, n) = (spec.semi_major, spec.semi_minor, spec.n_vertices);
    match spec.kind {
        ShapeKind::Ellipse => (0..n)
            .map(|k| {
                let t = TAU * k as f64 / n as f64;
                Point2::new(a * t.cos(), b * t.sin())
            })
            .collect(),
        ShapeKind::Rectangle => vec![
            Point2::new(a, -b),
            Point2::new(a, b),
            Point2::new(-a, b),
            Point2::new(-a, -b),
        ],
        ShapeKind::Lens => {
            // circle through (±a, 0) and (0, b): center (0, -k), radius R = k + b
            let k = (a * a - b * b) / (2.0 * b);
            let r = k + b;
            let tip = k.atan2(a);
            let upper = n / 2;
            let lower = n - upper;
            let mut pts = Vec::with_capacity(n);
            pts.push(Point2::new(a, 0.0));
            for i in 1..upper {
                let t = tip + (PI - 2.0 * tip) * i as f64 / upper as f64;
                pts.push(Point2::new(r * t.cos(), r * t.sin() - k));
            }
            pts.push(Point2::new(-a, 0.0));
            for i in 1..lower {
                let t = tip + (PI - 2.0 * tip) * i as f64 / lower as f64;
                pts.push(Point2::new(-r * t.cos(), k - r * t.sin()));
            }
            pts
        }
    }
}

pub fn gen_shape(spec: &ShapeSpec) -> Result<Polygon, ShapeError> {
    spec.validate()?;
    let rot = spec.rotation.radians();
    let origin = Point2::default();
    let vertices = local_outline(spec)
        .into_iter()
        .map(|p| p.rotate_about(origin, rot) + spec.center)
        .collect();
    Polygon::new(vertices).map_err(|e| ShapeError::InvalidSpec(e.to_string()))
}

/// A batch of randomly rotated and placed shapes, parsed from
/// `kind:key=val,key=val`.
///
/// Kinds: `circle` (`r`), `ellipse`, `lens`, `rectangle` (`a`, `b`).
/// Optional keys: `n` instance count (default 1), `vertices` outline
/// resolution (default 720), `major` semi-major axis in pixels. Without
/// `major`, dimensions are pixels unless the semi-major axis is under 40,
/// in which case they are proportions scaled to a 100 px semi-major axis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SyntheticSpec {
    pub kind: ShapeKind,
    pub semi_major: f64,
    pub semi_minor: f64,
    pub count: usize,
    pub n_vertices: usize,
    /// Kind name as written (`circle` is kept distinct from `ellipse`).
    pub label: String,
    major_px: Option<f64>,
}

impl SyntheticSpec {
    /// Semi-axes in pixels after applying the scaling rule.
    pub fn pixel_axes(&self) -> (f64, f64) {
        let target = match self.major_px {
            Some(px) => px,
            None if self.semi_major < MIN_SEMI_MAJOR_PX => DEFAULT_SEMI_MAJOR_PX,
            None => self.semi_major,
        };
        let s = target / self.semi_major;
        (self.semi_major * s, self.semi_minor * s)
    }

    pub fn aspect_ratio(&self) -> f64 {
        self.semi_major / self.semi_minor
    }
}

impl FromStr for SyntheticSpec {
    type Err = ShapeError;

    fn from_str(s: &str) -> Result<Self, ShapeError> {
        let bad = |reason: String| ShapeError::BadSpecString {
            spec: s.to_owned(),
            reason,
        };
        let (kind_str, params) = s
            .split_once(':')
            .ok_or_else(|| bad("expected kind:key=val,…".into()))?;
        let label = kind_str.trim().to_ascii_lowercase();
        let kind = match label.as_str() {
            "circle" | "ellipse" => ShapeKind::Ellipse,
            "lens" => ShapeKind::Lens,
            "rectangle" | "rect" => ShapeKind::Rectangle,
            other => return Err(bad(format!("unknown kind {other:?}"))),
        };
        let mut a = None;
        let mut b = None;
        let mut r = None;
        let mut count = 1usize;
        let mut n_vertices = DEFAULT_VERTICES;
        let mut major_px = None;
        for param in params.split(',').filter(|p| !p.trim().is_empty()) {
            let (key, value) = param
                .split_once('=')
                .ok_or_else(|| bad(format!("parameter {param:?} lacks '='")))?;
            let key = key.trim();
            let value = value.trim();
            let num = || {
                value
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite() && *v > 0.0)
                    .ok_or_else(|| bad(format!("{key} must be a positive number, got {value:?}")))
            };
            let int = || {
                value
                    .parse::<usize>()
                    .ok()
                    .filter(|v| *v > 0)
                    .ok_or_else(|| bad(format!("{key} must be a positive integer, got {value:?}")))
            };
            match key {
                "a" => a = Some(num()?),
                "b" => b = Some(num()?),
                "r" => r = Some(num()?),
                "n" => count = int()?,
                "vertices" => n_vertices = int()?,
                "major" => major_px = Some(num()?),
                other => return Err(bad(format!("unknown key {other:?}"))),
            }
        }
        let (semi_major, semi_minor) = match (label.as_str(), r, a, b) {
            ("circle", Some(r), None, None) => (r, r),
            ("circle", ..) => return Err(bad("circle takes r only".into())),
            (_, None, Some(a), Some(b)) => (a, b),
            _ => return Err(bad("expected a and b".into())),
        };
        if semi_major < semi_minor {
            return Err(bad(format!(
                "a ({semi_major}) must be at least b ({semi_minor})"
            )));
        }
        if n_vertices < MIN_VERTICES {
            return Err(bad(format!("vertices must be at least {MIN_VERTICES}")));
        }
        Ok(SyntheticSpec {
            kind,
            semi_major,
            semi_minor,
            count,
            n_vertices,
            label,
            major_px,
        })
    }
}

/// Materialize `spec.count` shapes with uniformly random rotation and a small
/// random offset from the grid center, drawn from a ChaCha8 stream seeded by
/// `seed`.
pub fn synthetic_records(
    spec: &SyntheticSpec,
    seed: u64,
    grid: (u32, u32),
) -> Result<Vec<InstanceRecord>, ShapeError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (a, b) = spec.pixel_axes();
    let half = grid.0.min(grid.1) as f64 / 2.0;
    let jitter = (half - a - 2.0).clamp(0.0, MAX_JITTER_PX);
    (0..spec.count)
        .map(|k| {
            let rotation = Angle::new(rng.random_range(0.0..TAU));
            let dx = if jitter > 0.0 {
                rng.random_range(-jitter..jitter)
            } else {
                0.0
            };
            let dy = if jitter > 0.0 {
                rng.random_range(-jitter..jitter)
            } else {
                0.0
            };
            let shape = ShapeSpec {
                kind: spec.kind,
                semi_major: a,
                semi_minor: b,
                rotation,
                center: Point2::new(grid.0 as f64 / 2.0 + dx, grid.1 as f64 / 2.0 + dy),
                n_vertices: spec.n_vertices,
            };
            Ok(InstanceRecord {
                image_id: "synthetic".into(),
                instance_id: format!("{}-{k}", spec.label),
                polygon: gen_shape(&shape)?,
                source: Source::Synthetic,
                image_size: grid,
            })
        })
        .collect()
}
