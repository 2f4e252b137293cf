//! Gaussian smoothing and Prewitt gradients, each in an exact reference form
//! and a bit-accurate shift-add datapath form running on configured adder
//! cells.

use crate::bitlevel::{ripple_add, ripple_sub, AdderConfig, CellKind, Word};
use crate::{Error, Result};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// 8-bit grayscale raster, row-major.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 || pixels.len() != width * height {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} image needs {} pixels, got {}",
                width,
                height,
                width * height,
                pixels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn constant(width: usize, height: usize, value: u8) -> Self {
        Self {
            width,
            height,
            pixels: vec![value; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    /// Replicate-edge access: coordinates are clamped to the image bounds.
    #[inline]
    pub fn get_clamped(&self, x: isize, y: isize) -> u8 {
        let x = x.clamp(0, self.width as isize - 1) as usize;
        let y = y.clamp(0, self.height as isize - 1) as usize;
        self.get(x, y)
    }

    pub fn transposed(&self) -> Self {
        let mut pixels = vec![0u8; self.pixels.len()];
        for y in 0..self.height {
            for x in 0..self.width {
                pixels[x * self.height + y] = self.get(x, y);
            }
        }
        Self {
            width: self.height,
            height: self.width,
            pixels,
        }
    }
}

/// Integer 3x3 Gaussian kernel; weights sum to 16 so the divide is a 4-bit
/// right shift. Corresponds to the sigma=1 smoothing stage.
pub const GAUSSIAN_KERNEL: [[u16; 3]; 3] = [[1, 2, 1], [2, 4, 2], [1, 2, 1]];
pub const GAUSSIAN_DIVISOR_SHIFT: u32 = 4;

/// Minimum adder width for the Gaussian/Prewitt datapaths: pre-shift Gaussian
/// sums reach 16*255 = 4080 and Prewitt terms span -765..=765.
pub const DATAPATH_WIDTH: usize = 12;

/// Signed per-pixel gradient pair plus a magnitude raster.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GradientField {
    pub width: usize,
    pub height: usize,
    pub gx: Vec<i32>,
    pub gy: Vec<i32>,
    pub magnitude: Vec<u16>,
}

fn check_min_size(img: &GrayImage, min: usize) -> Result<()> {
    if img.width() < min || img.height() < min {
        return Err(Error::ImageTooSmall {
            width: img.width(),
            height: img.height(),
            min,
        });
    }
    Ok(())
}

fn check_datapath_width(cfg: &AdderConfig) -> Result<()> {
    if cfg.width() < DATAPATH_WIDTH {
        return Err(Error::Config(format!(
            "adder width {} is too narrow for the {DATAPATH_WIDTH}-bit filter sums",
            cfg.width()
        )));
    }
    Ok(())
}

fn map_rows<T: Send>(height: usize, f: impl Fn(usize) -> Vec<T> + Sync + Send) -> Vec<T> {
    #[cfg(feature = "parallel")]
    {
        (0..height).into_par_iter().flat_map_iter(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..height).flat_map(f).collect()
    }
}

/// Exact 3x3 Gaussian smoothing with replicate-edge padding; output has the
/// input's dimensions.
pub fn gaussian_reference(img: &GrayImage) -> Result<GrayImage> {
    check_min_size(img, 3)?;
    let (w, h) = (img.width(), img.height());
    let pixels = map_rows(h, |y| {
        (0..w)
            .map(|x| {
                let mut sum = 0u32;
                for dy in 0..3 {
                    for dx in 0..3 {
                        let v = img.get_clamped(x as isize + dx - 1, y as isize + dy - 1);
                        sum += GAUSSIAN_KERNEL[dy as usize][dx as usize] as u32 * v as u32;
                    }
                }
                (sum >> GAUSSIAN_DIVISOR_SHIFT) as u8
            })
            .collect()
    });
    GrayImage::new(w, h, pixels)
}

/// Accumulates `terms` left to right through `ripple_add`, truncating each
/// widened result back to the adder width. The filter sums have headroom at
/// `DATAPATH_WIDTH`, and an LOA or carry-only result never exceeds the exact
/// sum, so the dropped carry bit is always zero here.
fn accumulate(terms: &[u64], cfg: &AdderConfig) -> Word {
    let width = cfg.width();
    let mut acc = Word::from_unsigned(terms[0], width).unwrap();
    for &t in &terms[1..] {
        let term = Word::from_unsigned(t, width).unwrap();
        let sum = ripple_add(&acc, &term, cfg).unwrap();
        debug_assert!(!sum.bit(width));
        acc = sum.truncate(width);
    }
    acc
}

fn neighborhood(img: &GrayImage, x: usize, y: usize) -> [u64; 9] {
    let mut p = [0u64; 9];
    for dy in 0..3 {
        for dx in 0..3 {
            p[dy * 3 + dx] =
                img.get_clamped(x as isize + dx as isize - 1, y as isize + dy as isize - 1) as u64;
        }
    }
    p
}

/// The smoothing stage realized as the hardware would compute it: weight-2
/// terms as a left shift by 1, weight-4 as a left shift by 2, additions on
/// the configured cells in row-major kernel order, then a 4-bit right shift.
///
/// A carry-only prefix models cells whose sum wires are simply absent: the
/// carry network still computes every carry exactly, so the accumulation runs
/// at full precision and only the final result loses its low prefix bits
/// (which the shift then discards when the prefix is at most 4 long).
pub fn gaussian_datapath(img: &GrayImage, cfg: &AdderConfig) -> Result<GrayImage> {
    check_min_size(img, 3)?;
    check_datapath_width(cfg)?;
    let (w, h) = (img.width(), img.height());
    let carry_only_prefix = (cfg.prefix_kind() == Some(CellKind::CarryOnly)).then(|| {
        (
            AdderConfig::all_exact(cfg.width()),
            !((1u64 << cfg.prefix_len()) - 1),
        )
    });
    let pixels = map_rows(h, |y| {
        (0..w)
            .map(|x| {
                let p = neighborhood(img, x, y);
                let mut terms = [0u64; 9];
                for i in 0..9 {
                    let weight = GAUSSIAN_KERNEL[i / 3][i % 3];
                    terms[i] = p[i] << weight.trailing_zeros();
                }
                let pre_shift = match &carry_only_prefix {
                    Some((exact_cfg, mask)) => accumulate(&terms, exact_cfg).value() & mask,
                    None => accumulate(&terms, cfg).value(),
                };
                (pre_shift >> GAUSSIAN_DIVISOR_SHIFT).min(255) as u8
            })
            .collect()
    });
    GrayImage::new(w, h, pixels)
}

/// Prewitt Gx/Gy on the configured adders, replicate-edge padding. The
/// magnitude raster is left zeroed; fill it with one of the magnitude
/// functions below.
pub fn prewitt_gradients(img: &GrayImage, cfg: &AdderConfig) -> Result<GradientField> {
    check_min_size(img, 3)?;
    check_datapath_width(cfg)?;
    let (w, h) = (img.width(), img.height());
    let pairs: Vec<(i32, i32)> = map_rows(h, |y| {
        (0..w)
            .map(|x| {
                let p = neighborhood(img, x, y);
                // p[0..9] = p1..p9, row-major top-left to bottom-right.
                let gx_pos = accumulate(&[p[2], p[5], p[8]], cfg);
                let gx_neg = accumulate(&[p[0], p[3], p[6]], cfg);
                let gy_pos = accumulate(&[p[6], p[7], p[8]], cfg);
                let gy_neg = accumulate(&[p[0], p[1], p[2]], cfg);
                let gx = ripple_sub(&gx_pos, &gx_neg, cfg).unwrap() as i32;
                let gy = ripple_sub(&gy_pos, &gy_neg, cfg).unwrap() as i32;
                (gx, gy)
            })
            .collect()
    });
    let (gx, gy) = pairs.into_iter().unzip();
    Ok(GradientField {
        width: w,
        height: h,
        gx,
        gy,
        magnitude: vec![0; w * h],
    })
}

fn isqrt(v: u64) -> u64 {
    let mut r = (v as f64).sqrt() as u64;
    while (r + 1) * (r + 1) <= v {
        r += 1;
    }
    while r * r > v {
        r -= 1;
    }
    r
}

/// Reference magnitude: floor(sqrt(gx^2 + gy^2)) per pixel.
pub fn gradient_magnitude_exact(gf: &GradientField) -> GradientField {
    let mut out = gf.clone();
    for (m, (&gx, &gy)) in out.magnitude.iter_mut().zip(gf.gx.iter().zip(&gf.gy)) {
        *m = isqrt((gx as i64 * gx as i64 + gy as i64 * gy as i64) as u64) as u16;
    }
    out
}

/// Approximate magnitude |gx| + |gy|, the addition on the configured cells.
/// Absolute values come from two's-complement negation of the negative
/// operand.
pub fn gradient_magnitude_approx(gf: &GradientField, cfg: &AdderConfig) -> Result<GradientField> {
    check_datapath_width(cfg)?;
    let width = cfg.width();
    let mut out = gf.clone();
    for (m, (&gx, &gy)) in out.magnitude.iter_mut().zip(gf.gx.iter().zip(&gf.gy)) {
        let ax = Word::from_unsigned(gx.unsigned_abs() as u64, width).unwrap();
        let ay = Word::from_unsigned(gy.unsigned_abs() as u64, width).unwrap();
        let sum = ripple_add(&ax, &ay, cfg)?;
        debug_assert!(!sum.bit(width));
        *m = sum.truncate(width).value() as u16;
    }
    Ok(out)
}

#[cfg(test)]
pub(crate) fn test_image(w: usize, h: usize, seed: u64) -> GrayImage {
    // Small xorshift fill, enough for unit tests.
    let mut state = seed.wrapping_mul(0x9e3779b97f4a7c15).max(1);
    let pixels = (0..w * h)
        .map(|_| {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state & 0xff) as u8
        })
        .collect();
    GrayImage::new(w, h, pixels).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exact12() -> AdderConfig {
        AdderConfig::all_exact(12)
    }

    #[test]
    fn gaussian_preserves_constants() {
        for c in [0u8, 1, 16, 128, 255] {
            let img = GrayImage::constant(8, 8, c);
            let out = gaussian_reference(&img).unwrap();
            assert!(out.pixels().iter().all(|&p| p == c), "c={c}");
        }
    }

    #[test]
    fn gaussian_single_bright_pixel() {
        let mut pixels = vec![0u8; 49];
        pixels[3 * 7 + 3] = 255;
        let img = GrayImage::new(7, 7, pixels).unwrap();
        let out = gaussian_reference(&img).unwrap();
        assert_eq!(out.get(3, 3), 63); // (4 * 255) >> 4
    }

    #[test]
    fn gaussian_3x3_constant_16() {
        let img = GrayImage::constant(3, 3, 16);
        assert_eq!(gaussian_reference(&img).unwrap().get(1, 1), 16);
    }

    #[test]
    fn gaussian_rejects_small_images() {
        let img = GrayImage::constant(2, 5, 0);
        assert!(matches!(
            gaussian_reference(&img),
            Err(Error::ImageTooSmall { .. })
        ));
    }

    #[test]
    fn datapath_all_exact_matches_reference() {
        let img = test_image(16, 16, 7);
        assert_eq!(
            gaussian_datapath(&img, &exact12()).unwrap(),
            gaussian_reference(&img).unwrap()
        );
    }

    #[test]
    fn datapath_carry_only_4_matches_reference() {
        let cfg = AdderConfig::with_prefix(12, CellKind::CarryOnly, 4).unwrap();
        for seed in 0..5 {
            let img = test_image(16, 16, seed);
            assert_eq!(
                gaussian_datapath(&img, &cfg).unwrap(),
                gaussian_reference(&img).unwrap()
            );
        }
    }

    #[test]
    fn datapath_loa_constant_128_bounded() {
        let cfg = AdderConfig::with_prefix(12, CellKind::ApproxLOA, 5).unwrap();
        let img = GrayImage::constant(8, 8, 128);
        let out = gaussian_datapath(&img, &cfg).unwrap();
        for &p in out.pixels() {
            assert!((p as i32 - 128).abs() <= 2, "got {p}");
        }
    }

    #[test]
    fn datapath_rejects_narrow_adder() {
        let img = GrayImage::constant(8, 8, 0);
        assert!(matches!(
            gaussian_datapath(&img, &AdderConfig::all_exact(8)),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn prewitt_constant_is_zero() {
        let gf = prewitt_gradients(&GrayImage::constant(8, 8, 77), &exact12()).unwrap();
        assert!(gf.gx.iter().all(|&v| v == 0));
        assert!(gf.gy.iter().all(|&v| v == 0));
    }

    #[test]
    fn prewitt_vertical_step() {
        let mut pixels = vec![255u8; 64];
        for y in 0..8 {
            pixels[y * 8] = 0;
        }
        let img = GrayImage::new(8, 8, pixels).unwrap();
        let gf = prewitt_gradients(&img, &exact12()).unwrap();
        // Column 1 sees 0 on the left, 255 on the right.
        for y in 0..8 {
            assert_eq!(gf.gx[y * 8 + 1], 765);
            assert_eq!(gf.gy[y * 8 + 1], 0);
        }
    }

    #[test]
    fn prewitt_horizontal_step() {
        let mut pixels = vec![255u8; 64];
        pixels[..8].fill(0);
        let img = GrayImage::new(8, 8, pixels).unwrap();
        let gf = prewitt_gradients(&img, &exact12()).unwrap();
        for x in 0..8 {
            assert_eq!(gf.gy[8 + x], 765);
        }
    }

    #[test]
    fn magnitude_exact_cases() {
        let gf = GradientField {
            width: 3,
            height: 1,
            gx: vec![3, 765, -5],
            gy: vec![4, 0, -12],
            magnitude: vec![0; 3],
        };
        let m = gradient_magnitude_exact(&gf);
        assert_eq!(m.magnitude, vec![5, 765, 13]);
    }

    #[test]
    fn magnitude_approx_cases() {
        let gf = GradientField {
            width: 3,
            height: 1,
            gx: vec![3, 765, -100],
            gy: vec![4, 0, 100],
            magnitude: vec![0; 3],
        };
        let m = gradient_magnitude_approx(&gf, &exact12()).unwrap();
        assert_eq!(m.magnitude, vec![7, 765, 200]);
    }
}
