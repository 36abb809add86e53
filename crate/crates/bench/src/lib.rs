//! Inputs shared by the criterion benches.

use ptm_core::codec::build_template;
use ptm_core::fidelity::{gen_shape, ShapeKind, ShapeSpec};
use ptm_core::geometry::{Angle, Point2, Polygon};
use ptm_core::raster::{rasterize, BitMask};

/// A lens of the given aspect ratio, 100 px semi-major axis, centered on a
/// 256×256 grid and tilted by 0.3 rad.
pub fn lens(aspect: f64, n_vertices: usize) -> Polygon {
    gen_shape(&ShapeSpec {
        rotation: Angle::new(0.3),
        center: Point2::new(128.0, 128.0),
        n_vertices,
        ..ShapeSpec::new(ShapeKind::Lens, 100.0, 100.0 / aspect)
    })
    .expect("valid lens")
}

pub fn lens_mask(aspect: f64) -> BitMask {
    rasterize(&lens(aspect, 720), 256, 256).expect("lens covers pixels")
}

/// Distances, targets and angular widths for one m=2 template.
pub fn loss_inputs() -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let t = build_template(2, Angle::new(0.4)).expect("m >= 1");
    let n = t.len();
    let d = (0..n).map(|i| 5.0 + (i as f64 * 0.7).sin()).collect();
    let d_star = (0..n).map(|i| 5.0 + (i as f64 * 0.3).cos()).collect();
    (d, d_star, t.delta_thetas().to_vec())
}
