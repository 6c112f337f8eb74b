//! Watermark generation, embedding and non-blind verification.

mod embed;
mod spec;
mod verify;

pub use embed::embed;
pub use spec::{generate_watermark, WatermarkParams, WatermarkSpec, SPEC_FORMAT_VERSION};
pub use verify::{
    align_size, extract, ncc, select_candidate, verify, verify_against, VerificationReport,
    DEFAULT_TAU,
};
