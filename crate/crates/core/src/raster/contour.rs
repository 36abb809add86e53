//! Outer boundary tracing along pixel edges (crack following) and
//! 4-connected component labeling.

use std::collections::VecDeque;

use super::{BitMask, RasterError};
use crate::geometry::{Point2, Polygon};

/// Split a mask into its 4-connected components, ordered by the row-major
/// position of each component's first pixel.
pub fn connected_components(mask: &BitMask) -> Vec<BitMask> {
    let (w, h) = mask.dimensions();
    let mut label = vec![u32::MAX; w as usize * h as usize];
    let mut components = Vec::new();
    let mut queue = VecDeque::new();
    for (r0, c0) in mask.iter_set() {
        let i0 = r0 as usize * w as usize + c0 as usize;
        if label[i0] != u32::MAX {
            continue;
        }
        let id = components.len() as u32;
        let mut comp = BitMask::new(w, h).expect("dimensions already valid");
        label[i0] = id;
        queue.push_back((r0, c0));
        while let Some((r, c)) = queue.pop_front() {
            comp.set(r, c, true);
            let neighbors = [
                (r.wrapping_sub(1), c),
                (r + 1, c),
                (r, c.wrapping_sub(1)),
                (r, c + 1),
            ];
            for (nr, nc) in neighbors {
                if nr < h && nc < w && mask.get(nr, nc) {
                    let ni = nr as usize * w as usize + nc as usize;
                    if label[ni] == u32::MAX {
                        label[ni] = id;
                        queue.push_back((nr, nc));
                    }
                }
            }
        }
        components.push(comp);
    }
    components
}

/// Counter-clockwise (positive shoelace area) outer boundary of a single
/// 4-connected region, with vertices only at direction changes.
///
/// The trace keeps the region on its left. Where two set pixels touch only
/// at a corner it turns toward the diagonal pixel, so holes that reach the
/// outside through such a pinch are not followed.
pub fn mask_to_contour(mask: &BitMask) -> Result<Polygon, RasterError> {
    let start = mask.iter_set().next().ok_or(RasterError::EmptyMask)?;
    let components = connected_components(mask).len();
    if components > 1 {
        return Err(RasterError::MultipleComponents(components));
    }

    // pixel lying in the quadrant (sx, sy) of corner (x, y)
    let pixel = |x: i64, y: i64, sx: i64, sy: i64| {
        let col = if sx > 0 { x } else { x - 1 };
        let row = if sy > 0 { y } else { y - 1 };
        mask.get_signed(row, col)
    };

    // top-left corner of the first pixel, heading along its top edge
    let origin = (start.1 as i64, start.0 as i64);
    let start_dir = (1i64, 0i64);
    let mut pos = origin;
    let mut dir = start_dir;
    let mut vertices = vec![Point2::new(origin.0 as f64, origin.1 as f64)];
    loop {
        pos = (pos.0 + dir.0, pos.1 + dir.1);
        let left = (-dir.1, dir.0);
        let right = (dir.1, -dir.0);
        let front_left = pixel(pos.0, pos.1, dir.0 + left.0, dir.1 + left.1);
        let front_right = pixel(pos.0, pos.1, dir.0 + right.0, dir.1 + right.1);
        let next = if front_right {
            right
        } else if front_left {
            dir
        } else {
            left
        };
        if pos == origin && next == start_dir {
            break;
        }
        if next != dir {
            vertices.push(Point2::new(pos.0 as f64, pos.1 as f64));
        }
        dir = next;
    }
    Ok(Polygon::new(vertices)?)
}
