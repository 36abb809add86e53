use std::collections::HashMap;
use std::path::Path;

use super::{IngestError, LoadReport, Source};
use crate::raster::{rle_decode, RleString};

/// Airbus challenge images are 768×768.
pub const DEFAULT_AIRBUS_SIZE: (u32, u32) = (768, 768);

/// Load an `ImageId,EncodedPixels` CSV. Each non-empty row is one ship mask;
/// masks with several 4-connected pieces yield one record per piece.
///
/// Instance ids count ships per image (`"0"`, `"1"`, …), with a `/k` suffix
/// for split masks. Rows with malformed RLE are skipped and reported.
pub fn load_airbus_csv(
    path: impl AsRef<Path>,
    width: u32,
    height: u32,
) -> Result<LoadReport, IngestError> {
    let path = path.as_ref();
    let io_err = |source| IngestError::Io {
        path: path.to_owned(),
        source,
    };
    let file = std::fs::File::open(path).map_err(io_err)?;
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(file);
    let headers = reader.headers().map_err(|_| IngestError::MissingHeader {
        path: path.to_owned(),
    })?;
    let header_ok = headers.len() >= 2
        && headers[0].trim().trim_start_matches('\u{feff}') == "ImageId"
        && headers[1].trim() == "EncodedPixels";
    if !header_ok {
        return Err(IngestError::MissingHeader {
            path: path.to_owned(),
        });
    }

    let mut report = LoadReport::default();
    let mut ships_per_image: HashMap<String, usize> = HashMap::new();
    for (row, result) in reader.records().enumerate() {
        let line = row + 2;
        let record = match result {
            Ok(r) => r,
            Err(e) => {
                report.skip("", &format!("line {line}"), e.to_string());
                continue;
            }
        };
        let image_id = record.get(0).unwrap_or("").trim().to_owned();
        let encoded = record.get(1).unwrap_or("").trim();
        if encoded.is_empty() {
            continue;
        }
        let counter = ships_per_image.entry(image_id.clone()).or_insert(0);
        let ship_id = counter.to_string();
        *counter += 1;

        let mask = encoded
            .parse::<RleString>()
            .and_then(|rle| rle_decode(&rle, width, height));
        match mask {
            Ok(mask) if mask.is_empty() => report.skip(&image_id, &ship_id, "empty mask"),
            Ok(mask) => report.push_mask_components(&mask, &image_id, &ship_id, Source::AirbusCsv),
            Err(e) => report.skip(&image_id, &ship_id, format!("line {line}: {e}")),
        }
    }
    Ok(report)
}
