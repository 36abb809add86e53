use std::path::Path;

use ptm_core::fidelity::{synthetic_records, SyntheticSpec};
use ptm_core::ingest::{
    load_airbus_csv, load_coco, load_mask_image, LoadReport, DEFAULT_AIRBUS_SIZE,
};

use crate::args::{GlobalOpts, InputArgs, InputFormat};
use crate::CliError;

pub const DEFAULT_SYNTHETIC_GRID: (u32, u32) = (256, 256);

/// Where the records came from, for report headers.
#[derive(Debug, Clone, serde::Serialize)]
pub struct SourceInfo {
    pub kind: &'static str,
    pub name: String,
    /// sha256 of the file contents; absent for inline synthetic specs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sha256: Option<String>,
}

fn guess_format(path: &Path) -> Option<InputFormat> {
    let ext = path.extension()?.to_str()?.to_ascii_lowercase();
    match ext.as_str() {
        "json" => Some(InputFormat::Coco),
        "csv" => Some(InputFormat::Airbus),
        "png" | "tif" | "tiff" => Some(InputFormat::Mask),
        "txt" => Some(InputFormat::Synthetic),
        _ => None,
    }
}

fn sha256_file(path: &Path) -> Result<String, CliError> {
    use sha2::{Digest, Sha256};
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

fn parse_spec(text: &str) -> Result<SyntheticSpec, CliError> {
    text.parse().map_err(|e| CliError::Usage(format!("{e}")))
}

/// Batch `k` of synthetic shapes: seeded with `seed + k`, image id
/// `synthetic-k` so repeated kinds do not collide.
fn synthetic(spec: &SyntheticSpec, global: &GlobalOpts, k: u64) -> Result<LoadReport, CliError> {
    let grid = global
        .grid
        .map(|g| (g.width, g.height))
        .unwrap_or(DEFAULT_SYNTHETIC_GRID);
    let mut records = synthetic_records(spec, global.seed.wrapping_add(k), grid)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    for r in &mut records {
        r.image_id = format!("synthetic-{k}");
    }
    Ok(LoadReport {
        records,
        ..Default::default()
    })
}

/// Load every requested input in order. Inline `--synthetic` specs come
/// first, then files.
pub fn load_inputs(
    args: &InputArgs,
    global: &GlobalOpts,
) -> Result<(LoadReport, Vec<SourceInfo>), CliError> {
    if args.inputs.is_empty() && args.synthetic.is_empty() {
        return Err(CliError::Usage(
            "no input: pass annotation files or --synthetic SPEC".into(),
        ));
    }
    let mut all = LoadReport::default();
    let mut sources = Vec::new();
    let mut batch = 0u64;
    let mut absorb = |report: LoadReport| {
        all.records.extend(report.records);
        all.skipped.extend(report.skipped);
        all.warnings.extend(report.warnings);
    };

    for text in &args.synthetic {
        absorb(synthetic(&parse_spec(text)?, global, batch)?);
        batch += 1;
        sources.push(SourceInfo {
            kind: "synthetic",
            name: text.clone(),
            sha256: None,
        });
    }

    for path in &args.inputs {
        let format = global
            .format
            .or_else(|| guess_format(path))
            .ok_or_else(|| {
                CliError::Usage(format!(
                    "cannot tell the format of {}; pass --format",
                    path.display()
                ))
            })?;
        let ingest_err = |e: ptm_core::ingest::IngestError| CliError::Input(e.to_string());
        let report = match format {
            InputFormat::Coco => load_coco(path).map_err(ingest_err)?,
            InputFormat::Airbus => {
                let (w, h) = global
                    .grid
                    .map(|g| (g.width, g.height))
                    .unwrap_or(DEFAULT_AIRBUS_SIZE);
                load_airbus_csv(path, w, h).map_err(ingest_err)?
            }
            InputFormat::Mask => {
                let id = path.file_stem().and_then(|s| s.to_str()).unwrap_or("mask");
                load_mask_image(path, id).map_err(ingest_err)?
            }
            InputFormat::Synthetic => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
                let mut report = LoadReport::default();
                for line in text
                    .lines()
                    .map(str::trim)
                    .filter(|l| !l.is_empty() && !l.starts_with('#'))
                {
                    let part = synthetic(&parse_spec(line)?, global, batch)?;
                    batch += 1;
                    report.records.extend(part.records);
                }
                report
            }
        };
        absorb(report);
        sources.push(SourceInfo {
            kind: match format {
                InputFormat::Coco => "coco",
                InputFormat::Airbus => "airbus",
                InputFormat::Mask => "mask",
                InputFormat::Synthetic => "synthetic_file",
            },
            name: path.display().to_string(),
            sha256: Some(sha256_file(path)?),
        });
    }
    Ok((all, sources))
}

/// Report per-instance problems on stderr.
pub fn print_diagnostics(report: &LoadReport) {
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    for s in &report.skipped {
        eprintln!("skipped {}:{}: {}", s.image_id, s.instance_id, s.reason);
    }
}
