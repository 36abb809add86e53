//! Template vs. uniform polar sampling at equal ray budget, measured as mask
//! IoU against the rasterized ground truth.

mod shapes;

pub use shapes::{
    gen_shape, synthetic_records, ShapeError, ShapeKind, ShapeSpec, SyntheticSpec,
    DEFAULT_SEMI_MAJOR_PX, DEFAULT_VERTICES, MIN_SEMI_MAJOR_PX, MIN_VERTICES,
};

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::codec::{decode, decode_uniform, encode_ptm, encode_uniform, CodecError, RAYS_PER_M};
use crate::geometry::{Point2, Polygon};
use crate::ingest::InstanceRecord;
use crate::raster::{mask_iou, rasterize, BitMask};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FidelityConfig {
    pub m: usize,
    /// Uniform ray count; `None` means the same budget as the template, 20m.
    pub uniform_rays: Option<usize>,
    /// Raster grid; `None` uses each record's image size.
    pub grid: Option<(u32, u32)>,
}

impl FidelityConfig {
    pub fn new(m: usize) -> Self {
        Self {
            m,
            uniform_rays: None,
            grid: None,
        }
    }

    pub fn ptm_rays(&self) -> usize {
        RAYS_PER_M * self.m
    }

    pub fn uniform_rays(&self) -> usize {
        self.uniform_rays.unwrap_or_else(|| self.ptm_rays())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FidelityRow {
    pub image_id: String,
    pub instance_id: String,
    pub aspect_ratio: f64,
    pub iou_ptm: Option<f64>,
    pub iou_uniform: Option<f64>,
    pub rays: usize,
    pub uniform_rays: usize,
    pub skipped: bool,
    pub skip_reason: Option<String>,
}

impl FidelityRow {
    /// Ties count as wins. `None` for skipped rows.
    pub fn ptm_wins(&self) -> Option<bool> {
        Some(self.iou_ptm? >= self.iou_uniform?)
    }
}

/// Ratio of the polygon's extents along its principal axes (from the area
/// second moments), rounded to 6 decimals.
pub fn aspect_ratio(poly: &Polygon) -> f64 {
    let o = poly.vertices()[0];
    let rel: Vec<Point2> = poly.vertices().iter().map(|&v| v - o).collect();
    let n = rel.len();
    let (mut a2, mut sx, mut sy, mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    for i in 0..n {
        let (p, q) = (rel[i], rel[(i + 1) % n]);
        let c = p.x * q.y - q.x * p.y;
        a2 += c;
        sx += c * (p.x + q.x);
        sy += c * (p.y + q.y);
        sxx += c * (p.x * p.x + p.x * q.x + q.x * q.x);
        syy += c * (p.y * p.y + p.y * q.y + q.y * q.y);
        sxy += c * (2.0 * p.x * p.y + p.x * q.y + q.x * p.y + 2.0 * q.x * q.y);
    }
    let area = a2 / 2.0;
    let (cx, cy) = (sx / (6.0 * area), sy / (6.0 * area));
    let cxx = sxx / 12.0 / area - cx * cx;
    let cyy = syy / 12.0 / area - cy * cy;
    let cxy = sxy / 24.0 / area - cx * cy;
    let phi = 0.5 * (2.0 * cxy).atan2(cxx - cyy);
    let (c, s) = (phi.cos(), phi.sin());
    let extent = |f: &dyn Fn(&Point2) -> f64| {
        let (lo, hi) = rel
            .iter()
            .map(f)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                (lo.min(v), hi.max(v))
            });
        hi - lo
    };
    let e1 = extent(&|p| p.x * c + p.y * s);
    let e2 = extent(&|p| -p.x * s + p.y * c);
    let ratio = e1.max(e2) / e1.min(e2);
    (ratio * 1e6).round() / 1e6
}

fn reconstruct_iou(truth: &BitMask, poly: &Polygon, grid: (u32, u32)) -> f64 {
    // a decoded polygon too thin to cover any area reconstructs nothing
    let mask =
        rasterize(poly, grid.0, grid.1).unwrap_or_else(|_| BitMask::new(grid.0, grid.1).unwrap());
    mask_iou(truth, &mask).expect("same grid")
}

fn fidelity_row(record: &InstanceRecord, config: &FidelityConfig) -> FidelityRow {
    let grid = config.grid.unwrap_or(record.image_size);
    let mut row = FidelityRow {
        image_id: record.image_id.clone(),
        instance_id: record.instance_id.clone(),
        aspect_ratio: aspect_ratio(&record.polygon),
        iou_ptm: None,
        iou_uniform: None,
        rays: config.ptm_rays(),
        uniform_rays: config.uniform_rays(),
        skipped: true,
        skip_reason: None,
    };
    let skip = |mut row: FidelityRow, reason: String| {
        row.skip_reason = Some(reason);
        row
    };
    let truth = match rasterize(&record.polygon, grid.0, grid.1) {
        Ok(mask) if mask.is_empty() => {
            return skip(row, "ground truth covers no pixel centers".into())
        }
        Ok(mask) => mask,
        Err(e) => return skip(row, e.to_string()),
    };
    let ptm = match encode_ptm(&record.polygon, config.m) {
        Ok(code) => decode(&code),
        Err(CodecError::CenterOutside(c)) => {
            return skip(row, format!("center outside ({:.3}, {:.3})", c.x, c.y));
        }
        Err(e) => return skip(row, e.to_string()),
    };
    let uniform = match encode_uniform(&record.polygon, config.uniform_rays()) {
        Ok(code) => decode_uniform(&code),
        Err(e) => return skip(row, e.to_string()),
    };
    row.iou_ptm = Some(reconstruct_iou(&truth, &ptm, grid));
    row.iou_uniform = Some(reconstruct_iou(&truth, &uniform, grid));
    row.skipped = false;
    row
}

/// One row per record, in record order. Rows are computed in parallel; the
/// result does not depend on the thread count.
pub fn run_fidelity(records: &[InstanceRecord], config: &FidelityConfig) -> Vec<FidelityRow> {
    records
        .par_iter()
        .map(|r| fidelity_row(r, config))
        .collect()
}

pub const BUCKETS: [&str; 4] = ["<2", "2-4", "4-8", ">=8"];

pub fn bucket_index(aspect_ratio: f64) -> usize {
    match aspect_ratio {
        r if r < 2.0 => 0,
        r if r < 4.0 => 1,
        r if r < 8.0 => 2,
        _ => 3,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BucketSummary {
    pub bucket: String,
    pub count: usize,
    pub skipped: usize,
    pub mean_iou_ptm: Option<f64>,
    pub median_iou_ptm: Option<f64>,
    pub mean_iou_uniform: Option<f64>,
    pub median_iou_uniform: Option<f64>,
    /// Fraction of evaluated rows with `iou_ptm >= iou_uniform`.
    pub win_rate: Option<f64>,
}

fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

fn median(xs: &[f64]) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[mid]
    } else {
        (v[mid - 1] + v[mid]) / 2.0
    })
}

impl BucketSummary {
    fn from_rows<'a>(bucket: &str, rows: impl IntoIterator<Item = &'a FidelityRow>) -> Self {
        let mut ptm = Vec::new();
        let mut uni = Vec::new();
        let mut count = 0;
        let mut skipped = 0;
        let mut wins = 0usize;
        for row in rows {
            count += 1;
            match (row.iou_ptm, row.iou_uniform) {
                (Some(p), Some(u)) if !row.skipped => {
                    ptm.push(p);
                    uni.push(u);
                    wins += usize::from(p >= u);
                }
                _ => skipped += 1,
            }
        }
        BucketSummary {
            bucket: bucket.to_owned(),
            count,
            skipped,
            mean_iou_ptm: mean(&ptm),
            median_iou_ptm: median(&ptm),
            mean_iou_uniform: mean(&uni),
            median_iou_uniform: median(&uni),
            win_rate: (!ptm.is_empty()).then(|| wins as f64 / ptm.len() as f64),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FidelitySummary {
    pub overall: BucketSummary,
    /// Always the four aspect-ratio buckets, in ascending order.
    pub buckets: Vec<BucketSummary>,
}

pub fn summarize(rows: &[FidelityRow]) -> FidelitySummary {
    let buckets = BUCKETS
        .iter()
        .enumerate()
        .map(|(i, name)| {
            BucketSummary::from_rows(
                name,
                rows.iter().filter(|r| bucket_index(r.aspect_ratio) == i),
            )
        })
        .collect();
    FidelitySummary {
        overall: BucketSummary::from_rows("all", rows),
        buckets,
    }
}

/// CSV with header `image_id,instance_id,aspect_ratio,iou_ptm,iou_uniform,
/// rays,uniform_rays,skipped,skip_reason`; skipped rows leave the IoU
/// columns empty.
pub fn write_rows_csv<W: Write>(rows: &[FidelityRow], out: W) -> csv::Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    for row in rows {
        writer.serialize(row)?;
    }
    if rows.is_empty() {
        writer.write_record([
            "image_id",
            "instance_id",
            "aspect_ratio",
            "iou_ptm",
            "iou_uniform",
            "rays",
            "uniform_rays",
            "skipped",
            "skip_reason",
        ])?;
    }
    writer.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::Source;

    fn record(id: &str, poly: Polygon, grid: (u32, u32)) -> InstanceRecord {
        InstanceRecord {
            image_id: "img".into(),
            instance_id: id.into(),
            polygon: poly,
            source: Source::Synthetic,
            image_size: grid,
        }
    }

    fn row(ar: f64, p: f64, u: f64) -> FidelityRow {
        FidelityRow {
            image_id: "i".into(),
            instance_id: "r".into(),
            aspect_ratio: ar,
            iou_ptm: Some(p),
            iou_uniform: Some(u),
            rays: 40,
            uniform_rays: 40,
            skipped: false,
            skip_reason: None,
        }
    }

    #[test]
    fn aspect_ratio_of_rotated_shapes() {
        for (kind, a, b) in [
            (ShapeKind::Ellipse, 40.0, 10.0),
            (ShapeKind::Lens, 80.0, 10.0),
            (ShapeKind::Rectangle, 30.0, 10.0),
        ] {
            for rot in [0.0, 0.3, 1.2, 2.9] {
                let spec = ShapeSpec {
                    rotation: crate::geometry::Angle::new(rot),
                    center: Point2::new(100.0, 90.0),
                    ..ShapeSpec::new(kind, a, b)
                };
                let ar = aspect_ratio(&gen_shape(&spec).unwrap());
                assert!((ar - a / b).abs() < 1e-5, "{kind} rot {rot}: {ar}");
            }
        }
    }

    #[test]
    fn empty_records_empty_report() {
        let rows = run_fidelity(&[], &FidelityConfig::new(2));
        assert!(rows.is_empty());
        let s = summarize(&rows);
        assert_eq!(s.overall.count, 0);
        assert_eq!(s.buckets.len(), 4);
        assert!(s.buckets.iter().all(|b| b.win_rate.is_none()));
    }

    #[test]
    fn circle_rows_close() {
        let spec = ShapeSpec {
            center: Point2::new(128.0, 128.0),
            ..ShapeSpec::new(ShapeKind::Ellipse, 50.0, 50.0)
        };
        let rec = record("c", gen_shape(&spec).unwrap(), (256, 256));
        let rows = run_fidelity(&[rec], &FidelityConfig::new(2));
        let (p, u) = (rows[0].iou_ptm.unwrap(), rows[0].iou_uniform.unwrap());
        assert!(p >= 0.98 && u >= 0.98, "{p} {u}");
        assert_eq!(rows[0].aspect_ratio, 1.0);
    }

    #[test]
    fn center_outside_is_skipped() {
        let c = Polygon::new(
            [
                (0.0, 0.0),
                (30.0, 0.0),
                (30.0, 5.0),
                (5.0, 5.0),
                (5.0, 25.0),
                (30.0, 25.0),
                (30.0, 30.0),
                (0.0, 30.0),
            ]
            .iter()
            .map(|&(x, y)| Point2::new(x + 10.0, y + 10.0))
            .collect(),
        )
        .unwrap();
        let rows = run_fidelity(&[record("c", c, (64, 64))], &FidelityConfig::new(1));
        assert!(rows[0].skipped);
        assert!(rows[0].iou_ptm.is_none());
        assert!(rows[0]
            .skip_reason
            .as_deref()
            .unwrap()
            .starts_with("center outside"));
        let s = summarize(&rows);
        assert_eq!((s.overall.count, s.overall.skipped), (1, 1));
        assert_eq!(s.overall.win_rate, None);
    }

    #[test]
    fn single_row_summary_equals_row() {
        let s = summarize(&[row(5.0, 0.9, 0.8)]);
        let b = &s.buckets[2];
        assert_eq!(b.count, 1);
        assert_eq!(b.mean_iou_ptm, Some(0.9));
        assert_eq!(b.median_iou_ptm, Some(0.9));
        assert_eq!(b.mean_iou_uniform, Some(0.8));
        assert_eq!(b.median_iou_uniform, Some(0.8));
        assert_eq!(b.win_rate, Some(1.0));
        assert_eq!(s.buckets.iter().map(|b| b.count).sum::<usize>(), 1);
    }

    #[test]
    fn ties_count_as_wins() {
        let s = summarize(&[row(1.0, 0.9, 0.9), row(1.5, 0.8, 0.85)]);
        assert_eq!(s.buckets[0].win_rate, Some(0.5));
        assert!((s.buckets[0].median_iou_ptm.unwrap() - 0.85).abs() < 1e-15);
    }

    #[test]
    fn bucket_edges() {
        assert_eq!(
            [1.999, 2.0, 3.99, 4.0, 7.99, 8.0, 30.0].map(bucket_index),
            [0, 1, 1, 2, 2, 3, 3]
        );
    }

    #[test]
    fn csv_layout() {
        let mut skipped = row(1.0, 0.0, 0.0);
        skipped.iou_ptm = None;
        skipped.iou_uniform = None;
        skipped.skipped = true;
        skipped.skip_reason = Some("x".into());
        let mut buf = Vec::new();
        write_rows_csv(&[row(8.0, 0.5, 0.25), skipped], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "image_id,instance_id,aspect_ratio,iou_ptm,iou_uniform,rays,uniform_rays,skipped,skip_reason");
        assert_eq!(lines[1], "i,r,8.0,0.5,0.25,40,40,false,");
        assert_eq!(lines[2], "i,r,1.0,,,40,40,true,x");
        let mut empty = Vec::new();
        write_rows_csv(&[], &mut empty).unwrap();
        assert!(String::from_utf8(empty).unwrap().starts_with("image_id,"));
    }

    #[test]
    fn deterministic_rows() {
        let spec: SyntheticSpec = "ellipse:a=4,b=1,n=6".parse().unwrap();
        let recs = synthetic_records(&spec, 7, (256, 256)).unwrap();
        let cfg = FidelityConfig::new(2);
        assert_eq!(run_fidelity(&recs, &cfg), run_fidelity(&recs, &cfg));
    }
}
