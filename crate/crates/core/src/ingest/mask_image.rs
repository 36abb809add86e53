use std::collections::BTreeMap;
use std::path::Path;

use image::DynamicImage;

use super::{IngestError, LoadReport, Source};
use crate::raster::BitMask;

fn gray_levels(img: &DynamicImage) -> Vec<u16> {
    match img {
        DynamicImage::ImageLuma8(g) => g.pixels().map(|p| p.0[0] as u16).collect(),
        DynamicImage::ImageLuma16(g) => g.pixels().map(|p| p.0[0]).collect(),
        DynamicImage::ImageLumaA8(g) => g.pixels().map(|p| p.0[0] as u16).collect(),
        DynamicImage::ImageLumaA16(g) => g.pixels().map(|p| p.0[0]).collect(),
        other => other.to_luma16().pixels().map(|p| p.0[0]).collect(),
    }
}

/// Load an instance-id mask: every distinct nonzero gray level is one
/// instance. Levels are visited in ascending order; the level value is the
/// instance id, suffixed `/k` when its pixels form several components.
pub fn load_mask_image(path: impl AsRef<Path>, image_id: &str) -> Result<LoadReport, IngestError> {
    let path = path.as_ref();
    let unreadable = |message: String| IngestError::UnreadableImage {
        path: path.to_owned(),
        message,
    };
    let img = image::open(path).map_err(|e| unreadable(e.to_string()))?;
    let (w, h) = (img.width(), img.height());
    let levels = gray_levels(&img);

    let mut by_level: BTreeMap<u16, Vec<usize>> = BTreeMap::new();
    for (i, &v) in levels.iter().enumerate() {
        if v != 0 {
            by_level.entry(v).or_default().push(i);
        }
    }

    let mut report = LoadReport::default();
    if by_level.is_empty() {
        report
            .warnings
            .push(format!("{}: no nonzero pixels", path.display()));
        return Ok(report);
    }
    for (level, pixels) in by_level {
        let mut mask = BitMask::new(w, h).map_err(|e| unreadable(e.to_string()))?;
        for i in pixels {
            mask.set(i as u32 / w, i as u32 % w, true);
        }
        report.push_mask_components(&mask, image_id, &level.to_string(), Source::MaskImage);
    }
    Ok(report)
}
