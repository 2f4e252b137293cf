//! Threshold binarization, exact and truncated-comparator forms.
//!
//! The truncated form drops the k low bits of both operands before
//! comparing. With a threshold whose k low bits are zero the two forms agree
//! at every value except the threshold itself: the exact form uses a strict
//! `>`, the truncated hardware has no equality path left and reports `>=`.

use crate::bitlevel::{truncated_compare_ge, Word};
use crate::filters::GrayImage;
use crate::{Error, Result};

/// Per-pixel {0,1} mask.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BinaryImage {
    width: usize,
    height: usize,
    bits: Vec<u8>,
}

impl BinaryImage {
    pub fn new(width: usize, height: usize, bits: Vec<u8>) -> Result<Self> {
        if bits.len() != width * height {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} mask needs {} entries, got {}",
                width,
                height,
                width * height,
                bits.len()
            )));
        }
        debug_assert!(bits.iter().all(|&b| b <= 1));
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.bits[y * self.width + x]
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b == 1).count()
    }

    pub fn complement(&self) -> Self {
        Self {
            width: self.width,
            height: self.height,
            bits: self.bits.iter().map(|&b| 1 - b).collect(),
        }
    }

    /// {0,1} -> {0,255} grayscale, for feeding a mask back through a filter
    /// or writing it as an image.
    pub fn to_gray(&self) -> GrayImage {
        GrayImage::new(
            self.width,
            self.height,
            self.bits.iter().map(|&b| b * 255).collect(),
        )
        .expect("mask dimensions are valid")
    }
}

/// Threshold operating point: value T, comparator word width, and how many
/// LSBs the truncated comparator drops.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct ThresholdParams {
    pub value: u32,
    pub ignored_lsbs: usize,
    pub word_width: usize,
}

impl ThresholdParams {
    /// The k low bits of the threshold must be zero; otherwise the truncated
    /// comparator would misreport a whole band of values, not just T itself.
    pub fn new(value: u32, ignored_lsbs: usize, word_width: usize) -> Result<Self> {
        if word_width == 0 || word_width > 32 {
            return Err(Error::Config(format!("bad comparator width {word_width}")));
        }
        if word_width < 32 && value >> word_width != 0 {
            return Err(Error::Range {
                value: value as u64,
                width: word_width,
            });
        }
        if ignored_lsbs >= word_width {
            return Err(Error::Config(format!(
                "cannot ignore {ignored_lsbs} LSBs of a {word_width}-bit comparator"
            )));
        }
        if !value.is_multiple_of(1 << ignored_lsbs) {
            return Err(Error::Config(format!(
                "threshold {value} is not a multiple of 2^{ignored_lsbs}; \
                 the truncated comparison would not match the exact one"
            )));
        }
        Ok(Self {
            value,
            ignored_lsbs,
            word_width,
        })
    }

    pub fn with_ignored_lsbs(self, ignored_lsbs: usize) -> Result<Self> {
        Self::new(self.value, ignored_lsbs, self.word_width)
    }
}

fn check_range<T: Copy + Into<u32>>(values: &[T], params: &ThresholdParams) -> Result<()> {
    if params.word_width < 32 {
        for &v in values {
            let v: u32 = v.into();
            if v >> params.word_width != 0 {
                return Err(Error::Range {
                    value: v as u64,
                    width: params.word_width,
                });
            }
        }
    }
    Ok(())
}

/// Exact binarization: 1 where value > T, else 0.
pub fn binarize_exact<T: Copy + Into<u32>>(
    values: &[T],
    width: usize,
    height: usize,
    params: &ThresholdParams,
) -> Result<BinaryImage> {
    check_range(values, params)?;
    let bits = values
        .iter()
        .map(|&v| (v.into() > params.value) as u8)
        .collect();
    BinaryImage::new(width, height, bits)
}

/// Truncated-comparator binarization: the per-pixel decision runs on the
/// bit-level comparator that drops the configured LSBs of both operands.
pub fn binarize_truncated<T: Copy + Into<u32>>(
    values: &[T],
    width: usize,
    height: usize,
    params: &ThresholdParams,
) -> Result<BinaryImage> {
    check_range(values, params)?;
    let threshold = Word::from_unsigned(params.value as u64, params.word_width)?;
    let bits = values
        .iter()
        .map(|&v| {
            let word = Word::from_unsigned(v.into() as u64, params.word_width)?;
            Ok(truncated_compare_ge(&word, &threshold, params.ignored_lsbs)? as u8)
        })
        .collect::<Result<_>>()?;
    BinaryImage::new(width, height, bits)
}

pub fn binarize_gray_exact(img: &GrayImage, params: &ThresholdParams) -> Result<BinaryImage> {
    binarize_exact(img.pixels(), img.width(), img.height(), params)
}

pub fn binarize_gray_truncated(img: &GrayImage, params: &ThresholdParams) -> Result<BinaryImage> {
    binarize_truncated(img.pixels(), img.width(), img.height(), params)
}
