use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use ptm_core::codec::{decode, decode_uniform, encode_ptm, encode_uniform, PtmCode};
use ptm_core::fidelity::{
    run_fidelity, summarize, write_rows_csv, FidelityConfig, FidelitySummary,
};
use ptm_core::geometry::{Angle, Point2};
use ptm_core::ingest::InstanceRecord;
use ptm_core::loss::{gradcheck, GradcheckConfig};

use crate::args::{GlobalOpts, InputArgs};
use crate::input::{load_inputs, print_diagnostics, SourceInfo};
use crate::svg::{render, Scene};
use crate::CliError;

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))
}

fn output(path: Option<&PathBuf>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(create(p)?),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn io_err(e: io::Error) -> CliError {
    CliError::Input(format!("write failed: {e}"))
}

/// One line of `encode` output.
#[derive(Debug, Serialize, Deserialize)]
pub struct EncodedLine {
    pub image_id: String,
    pub instance_id: String,
    pub center: Point2,
    pub main_angle_rad: f64,
    pub m: usize,
    pub distances: Vec<f64>,
}

#[derive(Debug, Serialize)]
struct DecodedLine<'a> {
    image_id: &'a str,
    instance_id: &'a str,
    vertices: Vec<[f64; 2]>,
}

pub fn encode(args: &InputArgs, global: &GlobalOpts) -> Result<(), CliError> {
    let (report, _) = load_inputs(args, global)?;
    print_diagnostics(&report);
    let m = global.m as usize;
    let results: Vec<_> = report
        .records
        .par_iter()
        .map(|r| (r, encode_ptm(&r.polygon, m)))
        .collect();

    let mut out = output(global.output.as_ref())?;
    let mut written = 0;
    for (record, result) in results {
        match result {
            Ok(code) => {
                let line = EncodedLine {
                    image_id: record.image_id.clone(),
                    instance_id: record.instance_id.clone(),
                    center: code.center(),
                    main_angle_rad: code.main_angle().radians(),
                    m,
                    distances: code.distances().to_vec(),
                };
                serde_json::to_writer(&mut out, &line)
                    .map_err(|e| CliError::Input(e.to_string()))?;
                out.write_all(b"\n").map_err(io_err)?;
                written += 1;
            }
            Err(e) => eprintln!("skipped {}:{}: {e}", record.image_id, record.instance_id),
        }
    }
    out.flush().map_err(io_err)?;
    if written == 0 {
        return Err(CliError::Domain("no instance could be encoded".into()));
    }
    eprintln!("encoded {written} instance(s)");
    Ok(())
}

pub fn decode_cmd(inputs: &[PathBuf], global: &GlobalOpts) -> Result<(), CliError> {
    let mut out = output(global.output.as_ref())?;
    for path in inputs {
        let file = File::open(path)
            .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
        for (n, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
            if line.trim().is_empty() {
                continue;
            }
            let bad = |msg: String| CliError::Input(format!("{}:{}: {msg}", path.display(), n + 1));
            let enc: EncodedLine = serde_json::from_str(&line).map_err(|e| bad(e.to_string()))?;
            let code = PtmCode::new(
                enc.center,
                Angle::new(enc.main_angle_rad),
                enc.m,
                enc.distances,
            )
            .map_err(|e| bad(e.to_string()))?;
            let poly = decode(&code);
            let dec = DecodedLine {
                image_id: &enc.image_id,
                instance_id: &enc.instance_id,
                vertices: poly.vertices().iter().map(|p| [p.x, p.y]).collect(),
            };
            serde_json::to_writer(&mut out, &dec).map_err(|e| CliError::Input(e.to_string()))?;
            out.write_all(b"\n").map_err(io_err)?;
        }
    }
    out.flush().map_err(io_err)
}

#[derive(Debug, Serialize)]
struct BenchReport<'a> {
    seed: u64,
    m: usize,
    rays: usize,
    uniform_rays: usize,
    /// `WxH`, or `per-record` when the records have different image sizes.
    grid: Option<String>,
    sources: &'a [SourceInfo],
    instances: usize,
    load_skipped: usize,
    summary: FidelitySummary,
}

fn effective_grid(config: &FidelityConfig, records: &[InstanceRecord]) -> Option<String> {
    let (w, h) = match config.grid {
        Some(g) => g,
        None => {
            let first = records.first()?.image_size;
            if records.iter().any(|r| r.image_size != first) {
                return Some("per-record".into());
            }
            first
        }
    };
    Some(format!("{w}x{h}"))
}

/// Summary lands next to the CSV: `report.csv` → `report.summary.json`.
pub fn summary_path(csv: &Path) -> PathBuf {
    csv.with_extension("summary.json")
}

pub fn bench(args: &InputArgs, rays: Option<usize>, global: &GlobalOpts) -> Result<(), CliError> {
    if rays.is_some_and(|r| r < 3) {
        return Err(CliError::Usage("--rays must be at least 3".into()));
    }
    let (report, sources) = load_inputs(args, global)?;
    print_diagnostics(&report);
    let config = FidelityConfig {
        m: global.m as usize,
        uniform_rays: rays,
        grid: global.grid.map(|g| (g.width, g.height)),
    };
    let rows = run_fidelity(&report.records, &config);
    for row in rows.iter().filter(|r| r.skipped) {
        eprintln!(
            "skipped {}:{}: {}",
            row.image_id,
            row.instance_id,
            row.skip_reason.as_deref().unwrap_or("")
        );
    }
    let summary = summarize(&rows);
    let evaluated = summary.overall.count - summary.overall.skipped;
    let doc = BenchReport {
        seed: global.seed,
        m: config.m,
        rays: config.ptm_rays(),
        uniform_rays: config.uniform_rays(),
        grid: effective_grid(&config, &report.records),
        sources: &sources,
        instances: rows.len(),
        load_skipped: report.skipped.len(),
        summary,
    };
    let json =
        serde_json::to_string_pretty(&doc).map_err(|e| CliError::Input(e.to_string()))? + "\n";

    match &global.output {
        Some(csv_path) => {
            let mut w = create(csv_path)?;
            write_rows_csv(&rows, &mut w).map_err(|e| CliError::Input(e.to_string()))?;
            w.flush().map_err(io_err)?;
            let json_path = summary_path(csv_path);
            std::fs::write(&json_path, json).map_err(io_err)?;
            eprintln!("wrote {} and {}", csv_path.display(), json_path.display());
        }
        None => {
            let mut out = io::stdout().lock();
            out.write_all(json.as_bytes()).map_err(io_err)?;
        }
    }
    if evaluated == 0 {
        return Err(CliError::Domain("no instance could be evaluated".into()));
    }
    if let Some(w) = doc.summary.overall.win_rate {
        eprintln!(
            "{evaluated} instance(s), win rate {w:.3}, mean iou ptm {:.4} vs uniform {:.4}",
            doc.summary.overall.mean_iou_ptm.unwrap_or(f64::NAN),
            doc.summary.overall.mean_iou_uniform.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}

pub fn gradcheck_cmd(trials: usize, h: f64, global: &GlobalOpts) -> Result<(), CliError> {
    if !(h.is_finite() && h > 0.0) {
        return Err(CliError::Usage(format!(
            "--h must be a positive number, got {h}"
        )));
    }
    if trials == 0 {
        return Err(CliError::Usage("--trials must be at least 1".into()));
    }
    let report = gradcheck(GradcheckConfig {
        trials,
        step: h,
        seed: global.seed,
    });
    let json =
        serde_json::to_string_pretty(&report).map_err(|e| CliError::Input(e.to_string()))? + "\n";
    let mut out = output(global.output.as_ref())?;
    out.write_all(json.as_bytes()).map_err(io_err)?;
    out.flush().map_err(io_err)?;
    eprintln!(
        "{} trials, step {h:e}: max relative error {:.3e}, threshold {:.1e}, {} near-kink draw(s) resampled",
        report.trials, report.max_rel_err, report.threshold, report.resampled
    );
    if report.passed() {
        Ok(())
    } else {
        if let Some(w) = &report.worst {
            eprintln!(
                "worst case: component {} analytic {:e} numeric {:e} (full inputs in the report)",
                w.component, w.analytic, w.numeric
            );
        }
        Err(CliError::Domain("gradient check failed".into()))
    }
}

fn select<'a>(
    records: &'a [InstanceRecord],
    selector: Option<&str>,
) -> Result<&'a InstanceRecord, CliError> {
    match selector {
        None if records.len() == 1 => Ok(&records[0]),
        None if records.is_empty() => Err(CliError::Domain("input holds no instance".into())),
        None => Err(CliError::Usage(format!(
            "input holds {} instances; pick one with --instance",
            records.len()
        ))),
        Some(sel) => {
            let hits: Vec<&InstanceRecord> = records
                .iter()
                .filter(|r| match sel.rsplit_once(':') {
                    Some((img, inst)) if r.image_id == img => r.instance_id == inst,
                    _ => r.instance_id == sel,
                })
                .collect();
            match hits.as_slice() {
                [one] => Ok(one),
                [] => Err(CliError::Usage(format!("no instance matches {sel:?}"))),
                many => Err(CliError::Usage(format!(
                    "{} instances match {sel:?}; use image_id:instance_id",
                    many.len()
                ))),
            }
        }
    }
}

pub fn render_cmd(
    args: &InputArgs,
    instance: Option<&str>,
    rays: Option<usize>,
    no_rays: bool,
    global: &GlobalOpts,
) -> Result<(), CliError> {
    let m = global.m as usize;
    let uniform_rays = rays.unwrap_or(20 * m);
    if uniform_rays < 3 {
        return Err(CliError::Usage("--rays must be at least 3".into()));
    }
    let (report, _) = load_inputs(args, global)?;
    print_diagnostics(&report);
    let record = select(&report.records, instance)?;
    let domain = |e: ptm_core::codec::CodecError| {
        CliError::Domain(format!("{}:{}: {e}", record.image_id, record.instance_id))
    };
    let code = encode_ptm(&record.polygon, m).map_err(domain)?;
    let uniform = encode_uniform(&record.polygon, uniform_rays).map_err(domain)?;
    let svg = render(&Scene {
        truth: &record.polygon,
        code: &code,
        ptm: &decode(&code),
        uniform: &decode_uniform(&uniform),
        rays: !no_rays,
    });
    let mut out = output(global.output.as_ref())?;
    out.write_all(svg.as_bytes()).map_err(io_err)?;
    out.flush().map_err(io_err)
}
