//! Bit-accurate software model of an approximate-computing pupil segmentation
//! datapath.
//!
//! The segmentation pipeline smooths an 8-bit NIR-style eye image with a
//! shift-add 3x3 Gaussian, runs two branches (Prewitt edge detection on the
//! smoothed image, and intensity thresholding followed by a boundary-only
//! Prewitt pass on the binarized mask), ANDs the two edge maps and localizes
//! the pupil from the dark-region mask.
//!
//! Every arithmetic step of the approximate variant runs on explicit one-bit
//! full-adder cells (exact, carry-only, or lower-part-OR), so the software
//! output is bit-identical to the hardware datapath it models. An exact
//! reference pipeline, exhaustive adder error characterization, hardware cost
//! proxies, and PSNR/SSIM comparison are included for verification.

pub mod binarization;
pub mod bitlevel;
pub mod characterization;
pub mod cli;
pub mod filters;
pub mod metrics;
pub mod pgm;
pub mod pipeline;
pub mod report;
pub mod synth;

/// Errors shared across the crate. Each top-level CLI exit code maps onto one
/// of the groups below (parse / configuration / no-pupil).
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("image {width}x{height} is too small, need at least {min}x{min}")]
    ImageTooSmall {
        width: usize,
        height: usize,
        min: usize,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("value {value} does not fit in {width} bits")]
    Range { value: u64, width: usize },

    #[error("no pupil found: {0}")]
    NoPupil(String),

    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("format error: {0}")]
    Format(String),

    #[error("invalid eye spec: {0}")]
    EyeSpec(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
