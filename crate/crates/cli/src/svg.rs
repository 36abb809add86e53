//! SVG layers, bottom to top:
//!
//! | id        | color     | content                                 |
//! |-----------|-----------|-----------------------------------------|
//! | `truth`   | `#000000` | ground-truth outline                    |
//! | `rays`    | `#9e9e9e` | one `<line>` per template ray           |
//! | `ptm`     | `#d62728` | polygon decoded from the template code  |
//! | `uniform` | `#1f77b4` | polygon decoded from the uniform code   |
//! | `center`  | `#2ca02c` | mass center marker                      |

use std::fmt::Write;

use ptm_core::codec::{PolarCode, PtmCode};
use ptm_core::geometry::{Point2, Polygon};

pub const TRUTH_COLOR: &str = "#000000";
pub const RAY_COLOR: &str = "#9e9e9e";
pub const PTM_COLOR: &str = "#d62728";
pub const UNIFORM_COLOR: &str = "#1f77b4";
pub const CENTER_COLOR: &str = "#2ca02c";

fn points(poly: &Polygon) -> String {
    poly.vertices()
        .iter()
        .map(|p| format!("{:.3},{:.3}", p.x, p.y))
        .collect::<Vec<_>>()
        .join(" ")
}

pub struct Scene<'a> {
    pub truth: &'a Polygon,
    pub code: &'a PtmCode,
    pub ptm: &'a Polygon,
    pub uniform: &'a Polygon,
    pub rays: bool,
}

pub fn render(scene: &Scene<'_>) -> String {
    let mut lo = Point2::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for poly in [scene.truth, scene.ptm, scene.uniform] {
        let (a, b) = poly.bounds();
        lo = Point2::new(lo.x.min(a.x), lo.y.min(a.y));
        hi = Point2::new(hi.x.max(b.x), hi.y.max(b.y));
    }
    let span = (hi.x - lo.x).max(hi.y - lo.y);
    let pad = 0.05 * span;
    let stroke = span / 400.0;
    let (x0, y0) = (lo.x - pad, lo.y - pad);
    let (w, h) = (hi.x - lo.x + 2.0 * pad, hi.y - lo.y + 2.0 * pad);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{x0:.3} {y0:.3} {w:.3} {h:.3}" width="{:.0}" height="{:.0}">"#,
        800.0 * w / w.max(h),
        800.0 * h / w.max(h)
    );
    let _ = writeln!(
        out,
        r#"<g id="truth" fill="none" stroke="{TRUTH_COLOR}" stroke-width="{:.4}"><polygon points="{}"/></g>"#,
        2.0 * stroke,
        points(scene.truth)
    );
    if scene.rays {
        let c = scene.code.center();
        let _ = writeln!(
            out,
            r#"<g id="rays" stroke="{RAY_COLOR}" stroke-width="{stroke:.4}">"#
        );
        for (theta, d) in scene.code.angles().iter().zip(scene.code.distances()) {
            let end = c.along(*theta, *d);
            let _ = writeln!(
                out,
                r#"<line x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}"/>"#,
                c.x, c.y, end.x, end.y
            );
        }
        let _ = writeln!(out, "</g>");
    }
    let _ = writeln!(
        out,
        r#"<g id="ptm" fill="none" stroke="{PTM_COLOR}" stroke-width="{:.4}"><polygon points="{}"/></g>"#,
        1.5 * stroke,
        points(scene.ptm)
    );
    let _ = writeln!(
        out,
        r#"<g id="uniform" fill="none" stroke="{UNIFORM_COLOR}" stroke-width="{:.4}" stroke-dasharray="{:.3} {:.3}"><polygon points="{}"/></g>"#,
        1.5 * stroke,
        6.0 * stroke,
        4.0 * stroke,
        points(scene.uniform)
    );
    let c = scene.code.center();
    let _ = writeln!(
        out,
        r#"<circle id="center" cx="{:.3}" cy="{:.3}" r="{:.4}" fill="{CENTER_COLOR}"/>"#,
        c.x,
        c.y,
        3.0 * stroke
    );
    out.push_str("</svg>\n");
    out
}
