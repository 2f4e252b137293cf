//! PSNR and SSIM between 8-bit rasters, plus the wall-clock stage timer.

use std::time::{Duration, Instant};

use crate::filters::GrayImage;
use crate::{Error, Result};

pub const SSIM_WINDOW: usize = 11;
pub const SSIM_SIGMA: f64 = 1.5;
const SSIM_C1: f64 = (0.01 * 255.0) * (0.01 * 255.0);
const SSIM_C2: f64 = (0.03 * 255.0) * (0.03 * 255.0);

fn check_dims(a: &GrayImage, b: &GrayImage) -> Result<()> {
    if a.width() != b.width() || a.height() != b.height() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} vs {}x{}",
            a.width(),
            a.height(),
            b.width(),
            b.height()
        )));
    }
    Ok(())
}

/// 10 log10(255^2 / MSE); +infinity when the images are identical.
pub fn psnr(a: &GrayImage, b: &GrayImage) -> Result<f64> {
    check_dims(a, b)?;
    let sq_err: u64 = a
        .pixels()
        .iter()
        .zip(b.pixels())
        .map(|(&x, &y)| {
            let d = x as i64 - y as i64;
            (d * d) as u64
        })
        .sum();
    if sq_err == 0 {
        return Ok(f64::INFINITY);
    }
    let mse = sq_err as f64 / a.pixels().len() as f64;
    Ok(10.0 * (255.0 * 255.0 / mse).log10())
}

fn gaussian_window() -> [f64; SSIM_WINDOW * SSIM_WINDOW] {
    let mut w = [0.0; SSIM_WINDOW * SSIM_WINDOW];
    let c = (SSIM_WINDOW / 2) as f64;
    let mut total = 0.0;
    for y in 0..SSIM_WINDOW {
        for x in 0..SSIM_WINDOW {
            let d2 = (x as f64 - c).powi(2) + (y as f64 - c).powi(2);
            let v = (-d2 / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp();
            w[y * SSIM_WINDOW + x] = v;
            total += v;
        }
    }
    for v in &mut w {
        *v /= total;
    }
    w
}

/// Mean local SSIM over every fully contained 11x11 window, Gaussian
/// weighted (sigma 1.5), stabilizers C1 = (0.01*255)^2 and C2 = (0.03*255)^2.
pub fn ssim(a: &GrayImage, b: &GrayImage) -> Result<f64> {
    check_dims(a, b)?;
    if a.width() < SSIM_WINDOW || a.height() < SSIM_WINDOW {
        return Err(Error::ImageTooSmall {
            width: a.width(),
            height: a.height(),
            min: SSIM_WINDOW,
        });
    }
    let weights = gaussian_window();
    let (w, h) = (a.width(), a.height());
    let mut total = 0.0;
    let mut windows = 0u64;
    for y0 in 0..=h - SSIM_WINDOW {
        for x0 in 0..=w - SSIM_WINDOW {
            let mut mu_a = 0.0;
            let mut mu_b = 0.0;
            for wy in 0..SSIM_WINDOW {
                for wx in 0..SSIM_WINDOW {
                    let wt = weights[wy * SSIM_WINDOW + wx];
                    mu_a += wt * a.get(x0 + wx, y0 + wy) as f64;
                    mu_b += wt * b.get(x0 + wx, y0 + wy) as f64;
                }
            }
            let mut var_a = 0.0;
            let mut var_b = 0.0;
            let mut cov = 0.0;
            for wy in 0..SSIM_WINDOW {
                for wx in 0..SSIM_WINDOW {
                    let wt = weights[wy * SSIM_WINDOW + wx];
                    let da = a.get(x0 + wx, y0 + wy) as f64 - mu_a;
                    let db = b.get(x0 + wx, y0 + wy) as f64 - mu_b;
                    var_a += wt * da * da;
                    var_b += wt * db * db;
                    cov += wt * da * db;
                }
            }
            let num = (2.0 * mu_a * mu_b + SSIM_C1) * (2.0 * cov + SSIM_C2);
            let den = (mu_a * mu_a + mu_b * mu_b + SSIM_C1) * (var_a + var_b + SSIM_C2);
            total += num / den;
            windows += 1;
        }
    }
    Ok(total / windows as f64)
}

/// One labeled wall-clock measurement.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StageTiming {
    pub stage: String,
    pub duration: Duration,
}

/// Runs `f`, records its wall-clock duration under `label`, and passes the
/// result through unchanged.
pub fn time_stage<T>(label: &str, timings: &mut Vec<StageTiming>, f: impl FnOnce() -> T) -> T {
    let start = Instant::now();
    let out = f();
    timings.push(StageTiming {
        stage: label.to_string(),
        duration: start.elapsed(),
    });
    out
}
