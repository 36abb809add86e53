//! Polar template mask (PTM) encoding for elongated instance outlines.
//!
//! A PTM code samples an outline with 20m rays from its mass center. Ray
//! angles follow a template anchored at the outline's farthest vertex, with
//! four times denser sampling near the main axis than across it.

pub mod codec;
pub mod fidelity;
pub mod geometry;
pub mod ingest;
pub mod loss;
pub mod raster;

pub use codec::{
    build_template, decode, decode_uniform, encode_ptm, encode_uniform, find_main_direction,
    CodecError, PolarCode, PolarTemplate, PtmCode, UniformCode, RAYS_PER_M,
};
pub use fidelity::{
    run_fidelity, summarize, FidelityConfig, FidelityRow, FidelitySummary, ShapeSpec, SyntheticSpec,
};
pub use geometry::{mass_center, ray_max_distance, Angle, GeometryError, Point2, Polygon};
pub use ingest::{IngestError, InstanceRecord, LoadReport};
pub use loss::{pt_iou_loss, total_loss, LossError, LossEval, LossInputs};
pub use raster::{mask_iou, rasterize, rle_decode, rle_encode, BitMask, RasterError, RleString};
