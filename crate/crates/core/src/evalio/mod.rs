//! Metrics and file interchange.

mod flo;
mod metrics;
mod png;
mod report;

pub use flo::{decode_flo, encode_flo, read_flo, write_flo, FLO_MAGIC};
pub use metrics::{confidence_stratified_psnr, epe, warping_psnr, EpeStats};
pub use png::{
    confidence_to_gray, flow_to_rgb, read_luma, read_mask, visualize_confidence, visualize_flow, write_luma,
    write_mask,
};
pub use report::{FrameReport, ReportWriter, CSV_HEADER};
