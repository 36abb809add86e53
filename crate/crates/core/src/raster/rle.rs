//! Uncompressed run-length strings as used by the Airbus ship challenge:
//! `start length` pairs over a column-major scan, starts 1-indexed.
//!
//! For a 3×2 mask (width 3, height 2) the scan order is
//!
//! ```text
//!   col:   0  1  2
//! row 0:   1  3  5
//! row 1:   2  4  6
//! ```
//!
//! so a mask with only the middle column set encodes as `"3 2"`.

use std::fmt;
use std::str::FromStr;

use super::{BitMask, RasterError};

/// `(start, run_length)` pairs, 1-indexed column-major.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RleString {
    pub pairs: Vec<(u64, u64)>,
}

impl RleString {
    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Total number of set pixels.
    pub fn area(&self) -> u64 {
        self.pairs.iter().map(|p| p.1).sum()
    }
}

impl fmt::Display for RleString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (start, len)) in self.pairs.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{start} {len}")?;
        }
        Ok(())
    }
}

impl FromStr for RleString {
    type Err = RasterError;

    /// Parses whitespace-separated integers. Ordering is checked by [`rle_decode`].
    fn from_str(s: &str) -> Result<Self, RasterError> {
        let nums = s
            .split_whitespace()
            .map(|tok| {
                tok.parse::<u64>()
                    .map_err(|_| RasterError::MalformedRle(format!("not an integer: {tok:?}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        if nums.len() % 2 != 0 {
            return Err(RasterError::MalformedRle(format!(
                "odd number of integers ({})",
                nums.len()
            )));
        }
        Ok(RleString {
            pairs: nums.chunks_exact(2).map(|c| (c[0], c[1])).collect(),
        })
    }
}

pub fn rle_encode(mask: &BitMask) -> RleString {
    let (w, h) = (mask.width() as u64, mask.height() as u64);
    let mut pairs = Vec::new();
    let mut run_start: Option<u64> = None;
    for col in 0..w {
        for row in 0..h {
            let pos = col * h + row + 1;
            match (mask.get(row as u32, col as u32), run_start) {
                (true, None) => run_start = Some(pos),
                (false, Some(s)) => {
                    pairs.push((s, pos - s));
                    run_start = None;
                }
                _ => {}
            }
        }
    }
    if let Some(s) = run_start {
        pairs.push((s, w * h + 1 - s));
    }
    RleString { pairs }
}

/// Decode onto a `width × height` grid. Starts must be at least 1 and strictly
/// increasing, runs non-empty, non-overlapping and inside the grid.
pub fn rle_decode(rle: &RleString, width: u32, height: u32) -> Result<BitMask, RasterError> {
    let mut mask = BitMask::new(width, height)?;
    let h = height as u64;
    let total = width as u64 * h;
    let mut next_free = 1u64;
    for (i, &(start, len)) in rle.pairs.iter().enumerate() {
        if start < next_free {
            return Err(RasterError::MalformedRle(format!(
                "pair {i}: start {start} overlaps or precedes the previous run"
            )));
        }
        if len == 0 {
            return Err(RasterError::MalformedRle(format!(
                "pair {i}: zero-length run"
            )));
        }
        let end = start
            .checked_add(len)
            .filter(|&e| e <= total + 1)
            .ok_or_else(|| {
                RasterError::MalformedRle(format!(
                    "pair {i}: run {start}+{len} exceeds {total} pixels"
                ))
            })?;
        for pos in start - 1..end - 1 {
            mask.set((pos % h) as u32, (pos / h) as u32, true);
        }
        next_free = end;
    }
    Ok(mask)
}
