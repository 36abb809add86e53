//! Annotation loaders producing one [`InstanceRecord`] per outer contour.
//!
//! Problems with individual instances are collected in the [`LoadReport`]
//! instead of aborting the whole file.

mod airbus;
mod coco;
mod mask_image;

pub use airbus::{load_airbus_csv, DEFAULT_AIRBUS_SIZE};
pub use coco::load_coco;
pub use mask_image::load_mask_image;

use std::path::PathBuf;

use serde::Serialize;
use thiserror::Error;

use crate::geometry::{Point2, Polygon};
use crate::raster::{connected_components, mask_to_contour, BitMask};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error in {path} at line {line}, column {column}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}: expected header `ImageId,EncodedPixels`")]
    MissingHeader { path: PathBuf },
    #[error("cannot decode image {path}: {message}")]
    UnreadableImage { path: PathBuf, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    CocoJson,
    AirbusCsv,
    MaskImage,
    Synthetic,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InstanceRecord {
    pub image_id: String,
    pub instance_id: String,
    pub polygon: Polygon,
    pub source: Source,
    pub image_size: (u32, u32),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SkippedInstance {
    pub image_id: String,
    pub instance_id: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct LoadReport {
    pub records: Vec<InstanceRecord>,
    pub skipped: Vec<SkippedInstance>,
    pub warnings: Vec<String>,
}

impl LoadReport {
    fn skip(&mut self, image_id: &str, instance_id: &str, reason: impl Into<String>) {
        self.skipped.push(SkippedInstance {
            image_id: image_id.to_owned(),
            instance_id: instance_id.to_owned(),
            reason: reason.into(),
        });
    }

    /// Append one record per 4-connected component of `mask`. A single
    /// component keeps `base_id`; several get `base_id/k` suffixes.
    fn push_mask_components(
        &mut self,
        mask: &BitMask,
        image_id: &str,
        base_id: &str,
        source: Source,
    ) {
        let components = connected_components(mask);
        let split = components.len() > 1;
        for (k, comp) in components.iter().enumerate() {
            let instance_id = if split {
                format!("{base_id}/{k}")
            } else {
                base_id.to_owned()
            };
            match mask_to_contour(comp) {
                Ok(polygon) => self.records.push(InstanceRecord {
                    image_id: image_id.to_owned(),
                    instance_id,
                    polygon,
                    source,
                    image_size: mask.dimensions(),
                }),
                Err(e) => self.skip(image_id, &instance_id, e.to_string()),
            }
        }
    }
}

/// Clip `points` to `[0, w] × [0, h]`, drop consecutive duplicates and require
/// at least three vertices and one square pixel of area.
pub(crate) fn clean_polygon(
    points: Vec<Point2>,
    width: u32,
    height: u32,
) -> Result<Polygon, String> {
    let clipped = clip_to_rect(points, width as f64, height as f64);
    let mut out: Vec<Point2> = Vec::with_capacity(clipped.len());
    for p in clipped {
        if out.last() != Some(&p) {
            out.push(p);
        }
    }
    while out.len() > 1 && out.first() == out.last() {
        out.pop();
    }
    if out.len() < 3 {
        return Err(format!(
            "only {} distinct vertices after cleaning",
            out.len()
        ));
    }
    let poly = Polygon::new(out).map_err(|e| e.to_string())?;
    if poly.area() < 1.0 {
        return Err(format!("area {:.3} px² below 1", poly.area()));
    }
    Ok(poly)
}

/// Sutherland–Hodgman clip against an axis-aligned rectangle anchored at 0.
fn clip_to_rect(points: Vec<Point2>, width: f64, height: f64) -> Vec<Point2> {
    let inside_all = points
        .iter()
        .all(|p| (0.0..=width).contains(&p.x) && (0.0..=height).contains(&p.y));
    if inside_all {
        return points;
    }
    // (axis, bound, keep_below)
    let planes = [
        (0, 0.0, false),
        (0, width, true),
        (1, 0.0, false),
        (1, height, true),
    ];
    let mut poly = points;
    for (axis, bound, keep_below) in planes {
        if poly.is_empty() {
            break;
        }
        let coord = |p: &Point2| if axis == 0 { p.x } else { p.y };
        let inside = |p: &Point2| {
            if keep_below {
                coord(p) <= bound
            } else {
                coord(p) >= bound
            }
        };
        let mut next = Vec::with_capacity(poly.len() + 4);
        for i in 0..poly.len() {
            let cur = poly[i];
            let prev = poly[(i + poly.len() - 1) % poly.len()];
            let (ci, pi) = (inside(&cur), inside(&prev));
            if ci != pi {
                let t = (bound - coord(&prev)) / (coord(&cur) - coord(&prev));
                let mut x =
                    Point2::new(prev.x + t * (cur.x - prev.x), prev.y + t * (cur.y - prev.y));
                if axis == 0 {
                    x.x = bound;
                } else {
                    x.y = bound;
                }
                next.push(x);
            }
            if ci {
                next.push(cur);
            }
        }
        poly = next;
    }
    poly
}
