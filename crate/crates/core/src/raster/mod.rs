//! Binary masks on the pixel grid: polygon fill, pixel IoU, run-length codec
//! and boundary tracing.
//!
//! Pixel `(row, col)` covers `[col, col+1] × [row, row+1]`; its center is
//! `(col + 0.5, row + 0.5)`.

mod contour;
mod rle;

pub use contour::{connected_components, mask_to_contour};
pub use rle::{rle_decode, rle_encode, RleString};

use thiserror::Error;

use crate::geometry::{GeometryError, Polygon, DEGENERATE_AREA};

pub const MAX_DIMENSION: u32 = 16_384;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RasterError {
    #[error("mask dimensions {0}x{1} outside 1..={MAX_DIMENSION}")]
    InvalidDimensions(u32, u32),
    #[error("mask dimensions differ: {0:?} vs {1:?}")]
    DimensionMismatch((u32, u32), (u32, u32)),
    #[error("malformed RLE: {0}")]
    MalformedRle(String),
    #[error("mask is empty")]
    EmptyMask,
    #[error("mask has {0} connected components, expected one")]
    MultipleComponents(usize),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Row-major binary raster.
#[derive(Clone, PartialEq, Eq)]
pub struct BitMask {
    width: u32,
    height: u32,
    bits: Vec<bool>,
}

impl std::fmt::Debug for BitMask {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(
            f,
            "BitMask {}x{} ({} set)",
            self.width,
            self.height,
            self.count()
        )?;
        if self.width <= 64 && self.height <= 64 {
            for r in 0..self.height {
                let line: String = (0..self.width)
                    .map(|c| if self.get(r, c) { '#' } else { '.' })
                    .collect();
                writeln!(f, "{line}")?;
            }
        }
        Ok(())
    }
}

impl BitMask {
    pub fn new(width: u32, height: u32) -> Result<Self, RasterError> {
        if width == 0 || height == 0 || width > MAX_DIMENSION || height > MAX_DIMENSION {
            return Err(RasterError::InvalidDimensions(width, height));
        }
        Ok(Self {
            width,
            height,
            bits: vec![false; width as usize * height as usize],
        })
    }

    /// Build from row-major bits.
    pub fn from_bits(width: u32, height: u32, bits: Vec<bool>) -> Result<Self, RasterError> {
        let mut mask = Self::new(width, height)?;
        if bits.len() != mask.bits.len() {
            return Err(RasterError::InvalidDimensions(width, height));
        }
        mask.bits = bits;
        Ok(mask)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dimensions(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    fn index(&self, row: u32, col: u32) -> usize {
        row as usize * self.width as usize + col as usize
    }

    pub fn get(&self, row: u32, col: u32) -> bool {
        self.bits[self.index(row, col)]
    }

    /// Like [`get`](Self::get) but out-of-grid coordinates read as unset.
    pub fn get_signed(&self, row: i64, col: i64) -> bool {
        row >= 0
            && col >= 0
            && row < self.height as i64
            && col < self.width as i64
            && self.get(row as u32, col as u32)
    }

    pub fn set(&mut self, row: u32, col: u32, value: bool) {
        let i = self.index(row, col);
        self.bits[i] = value;
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|b| *b)
    }

    /// Set pixels as `(row, col)`, in row-major order.
    pub fn iter_set(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        let w = self.width;
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, b)| **b)
            .map(move |(i, _)| ((i / w as usize) as u32, (i % w as usize) as u32))
    }
}

/// Fill every pixel whose center lies inside `poly` or on its boundary
/// (even-odd rule). Parts of the polygon outside the grid are clipped.
pub fn rasterize(poly: &Polygon, width: u32, height: u32) -> Result<BitMask, RasterError> {
    let mut mask = BitMask::new(width, height)?;
    let area = poly.signed_area();
    if !area.is_finite() || area.abs() < DEGENERATE_AREA {
        return Err(GeometryError::DegeneratePolygon(area).into());
    }
    let (lo, hi) = poly.bounds();
    let row_start = (lo.y - 0.5).ceil().max(0.0) as i64;
    let row_end = ((hi.y - 0.5).floor() as i64).min(height as i64 - 1);
    let verts = poly.vertices();
    let n = verts.len();
    let mut crossings: Vec<f64> = Vec::new();
    let mut on_boundary: Vec<(f64, f64)> = Vec::new();
    for row in row_start.max(0)..=row_end {
        let yc = row as f64 + 0.5;
        crossings.clear();
        on_boundary.clear();
        for i in 0..n {
            let a = verts[i];
            let b = verts[(i + 1) % n];
            if a.y == yc && b.y == yc {
                on_boundary.push((a.x.min(b.x), a.x.max(b.x)));
                continue;
            }
            if a.y == yc {
                on_boundary.push((a.x, a.x));
            }
            // half-open in y so each crossing at a shared vertex counts once
            if (a.y > yc) != (b.y > yc) {
                crossings.push(a.x + (yc - a.y) * (b.x - a.x) / (b.y - a.y));
            }
        }
        crossings.sort_by(f64::total_cmp);
        for pair in crossings.chunks_exact(2) {
            fill_span(&mut mask, row as u32, pair[0], pair[1]);
        }
        for &(x0, x1) in &on_boundary {
            fill_span(&mut mask, row as u32, x0, x1);
        }
    }
    Ok(mask)
}

/// Set pixels in `row` whose center x lies in `[x0, x1]`.
fn fill_span(mask: &mut BitMask, row: u32, x0: f64, x1: f64) {
    let first = (x0 - 0.5).ceil().max(0.0);
    let last = (x1 - 0.5).floor().min(mask.width as f64 - 1.0);
    if first > last {
        return;
    }
    let start = mask.index(row, first as u32);
    let end = mask.index(row, last as u32);
    mask.bits[start..=end].fill(true);
}

/// Intersection over union of two masks; two empty masks score 1.
pub fn mask_iou(a: &BitMask, b: &BitMask) -> Result<f64, RasterError> {
    if a.dimensions() != b.dimensions() {
        return Err(RasterError::DimensionMismatch(
            a.dimensions(),
            b.dimensions(),
        ));
    }
    let (mut inter, mut union) = (0usize, 0usize);
    for (&x, &y) in a.bits.iter().zip(&b.bits) {
        inter += (x && y) as usize;
        union += (x || y) as usize;
    }
    Ok(if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    })
}
