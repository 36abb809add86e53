use std::collections::HashMap;
use std::path::Path;

use serde::Deserialize;
use serde_json::Value;

use super::{clean_polygon, IngestError, InstanceRecord, LoadReport, Source};
use crate::geometry::Point2;

#[derive(Deserialize)]
struct CocoFile {
    #[serde(default)]
    images: Vec<CocoImage>,
    #[serde(default)]
    annotations: Vec<CocoAnnotation>,
}

#[derive(Deserialize)]
struct CocoImage {
    id: Value,
    width: u32,
    height: u32,
}

#[derive(Deserialize)]
struct CocoAnnotation {
    id: Value,
    image_id: Value,
    #[serde(default)]
    segmentation: Value,
}

fn id_string(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Flat `[x1, y1, x2, y2, …]` lists; a bare flat list is taken as one polygon.
fn polygon_lists(seg: &Value) -> Result<Vec<Vec<f64>>, String> {
    let as_coords = |v: &Value| -> Result<Vec<f64>, String> {
        v.as_array()
            .ok_or("polygon is not an array")?
            .iter()
            .map(|x| {
                x.as_f64()
                    .ok_or_else(|| format!("non-numeric coordinate {x}"))
            })
            .collect()
    };
    match seg {
        Value::Array(items) if items.iter().all(Value::is_number) => Ok(vec![as_coords(seg)?]),
        Value::Array(items) => items.iter().map(as_coords).collect(),
        Value::Object(_) => Err("RLE segmentation is not supported; polygons only".into()),
        Value::Null => Err("missing segmentation".into()),
        other => Err(format!("unexpected segmentation {other}")),
    }
}

/// Load a COCO-style annotation file (images + annotations with polygon
/// segmentations). Multi-polygon annotations yield one record per polygon
/// with `id/k` instance ids.
pub fn load_coco(path: impl AsRef<Path>) -> Result<LoadReport, IngestError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| IngestError::Io {
        path: path.to_owned(),
        source,
    })?;
    if text.trim().is_empty() {
        let mut report = LoadReport::default();
        report
            .warnings
            .push(format!("{}: empty annotation file", path.display()));
        return Ok(report);
    }
    let file: CocoFile = serde_json::from_str(&text).map_err(|e| IngestError::Parse {
        path: path.to_owned(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;

    let sizes: HashMap<String, (u32, u32)> = file
        .images
        .iter()
        .map(|img| (id_string(&img.id), (img.width, img.height)))
        .collect();

    let mut report = LoadReport::default();
    for ann in &file.annotations {
        let image_id = id_string(&ann.image_id);
        let ann_id = id_string(&ann.id);
        let Some(&(w, h)) = sizes.get(&image_id) else {
            report.skip(&image_id, &ann_id, "image id not listed in images[]");
            continue;
        };
        let lists = match polygon_lists(&ann.segmentation) {
            Ok(l) => l,
            Err(reason) => {
                report.skip(&image_id, &ann_id, reason);
                continue;
            }
        };
        let split = lists.len() > 1;
        for (k, coords) in lists.into_iter().enumerate() {
            let instance_id = if split {
                format!("{ann_id}/{k}")
            } else {
                ann_id.clone()
            };
            if coords.len() % 2 != 0 {
                report.skip(&image_id, &instance_id, "odd number of coordinates");
                continue;
            }
            let points = coords
                .chunks_exact(2)
                .map(|c| Point2::new(c[0], c[1]))
                .collect();
            match clean_polygon(points, w, h) {
                Ok(polygon) => report.records.push(InstanceRecord {
                    image_id: image_id.clone(),
                    instance_id,
                    polygon,
                    source: Source::CocoJson,
                    image_size: (w, h),
                }),
                Err(reason) => report.skip(&image_id, &instance_id, reason),
            }
        }
    }
    Ok(report)
}
