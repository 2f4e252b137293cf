//! Deterministic synthetic eye images with analytic ground truth.
//!
//! The rendering is deliberately simple: concentric dark-pupil / iris /
//! sclera disks, an optional uniform eyelid band over the top of the pupil,
//! optional bright specular dots inside the pupil, and seeded Gaussian
//! pixel noise. Noise comes from ChaCha8 seeded with the spec's 64-bit seed
//! and is drawn in row-major pixel order, so a (spec, seed) pair always
//! produces the same bytes on every platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::filters::GrayImage;
use crate::{Error, Result};

pub const DEFAULT_PUPIL_INTENSITY: u8 = 10;
pub const DEFAULT_IRIS_INTENSITY: u8 = 100;
pub const DEFAULT_SCLERA_INTENSITY: u8 = 220;
pub const DEFAULT_EYELID_INTENSITY: u8 = 150;
pub const HIGHLIGHT_INTENSITY: u8 = 250;

#[derive(Clone, Debug)]
pub struct EyeSpec {
    pub width: usize,
    pub height: usize,
    pub pupil_center: (f64, f64),
    pub pupil_radius: f64,
    pub pupil_intensity: u8,
    pub iris_radius: f64,
    pub iris_intensity: u8,
    pub sclera_intensity: u8,
    pub eyelid_intensity: u8,
    pub highlight_count: usize,
    pub highlight_radius: f64,
    /// Fraction of the pupil disk's vertical extent covered by the eyelid
    /// band, measured from the top.
    pub eyelid_fraction: f64,
    pub noise_sigma: f64,
    pub seed: u64,
}

impl EyeSpec {
    /// Pupil centered in a square image, no occlusion, no highlights, no
    /// noise.
    pub fn centered(size: usize, pupil_radius: f64, iris_radius: f64, seed: u64) -> Self {
        let c = (size as f64 - 1.0) / 2.0;
        Self {
            width: size,
            height: size,
            pupil_center: (c, c),
            pupil_radius,
            pupil_intensity: DEFAULT_PUPIL_INTENSITY,
            iris_radius,
            iris_intensity: DEFAULT_IRIS_INTENSITY,
            sclera_intensity: DEFAULT_SCLERA_INTENSITY,
            eyelid_intensity: DEFAULT_EYELID_INTENSITY,
            highlight_count: 0,
            highlight_radius: 1.5,
            eyelid_fraction: 0.0,
            noise_sigma: 0.0,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::EyeSpec(msg));
        if self.width == 0 || self.height == 0 {
            return fail("image dimensions must be positive".into());
        }
        if self.pupil_radius <= 0.0 || self.pupil_radius.is_nan() {
            return fail("pupil radius must be positive".into());
        }
        if self.pupil_radius >= self.iris_radius {
            return fail(format!(
                "pupil radius {} must be smaller than iris radius {}",
                self.pupil_radius, self.iris_radius
            ));
        }
        let (cx, cy) = self.pupil_center;
        let r = self.pupil_radius;
        if cx - r < 0.0
            || cy - r < 0.0
            || cx + r > self.width as f64 - 1.0
            || cy + r > self.height as f64 - 1.0
        {
            return fail(format!(
                "pupil (center ({cx}, {cy}), radius {r}) does not fit in {}x{}",
                self.width, self.height
            ));
        }
        if !(0.0..=1.0).contains(&self.eyelid_fraction) {
            return fail(format!(
                "eyelid fraction {} outside [0, 1]",
                self.eyelid_fraction
            ));
        }
        if self.noise_sigma < 0.0 {
            return fail("noise sigma must be non-negative".into());
        }
        Ok(())
    }
}

/// Analytic pupil parameters of a generated image.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GroundTruth {
    pub center: (f64, f64),
    pub radius: f64,
}

pub fn generate_eye(spec: &EyeSpec) -> Result<(GrayImage, GroundTruth)> {
    spec.validate()?;
    let (w, h) = (spec.width, spec.height);
    let (cx, cy) = spec.pupil_center;
    let mut pixels = vec![0u8; w * h];
    for y in 0..h {
        for x in 0..w {
            let d = ((x as f64 - cx).powi(2) + (y as f64 - cy).powi(2)).sqrt();
            pixels[y * w + x] = if d < spec.pupil_radius {
                spec.pupil_intensity
            } else if d < spec.iris_radius {
                spec.iris_intensity
            } else {
                spec.sclera_intensity
            };
        }
    }

    if spec.eyelid_fraction > 0.0 {
        let cutoff = cy - spec.pupil_radius + spec.eyelid_fraction * 2.0 * spec.pupil_radius;
        for y in 0..h {
            if (y as f64) < cutoff {
                pixels[y * w..(y + 1) * w].fill(spec.eyelid_intensity);
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    for _ in 0..spec.highlight_count {
        // Rejection-sample a dot center well inside the pupil.
        let (hx, hy) = loop {
            let hx = cx + rng.gen_range(-spec.pupil_radius..spec.pupil_radius);
            let hy = cy + rng.gen_range(-spec.pupil_radius..spec.pupil_radius);
            let d = ((hx - cx).powi(2) + (hy - cy).powi(2)).sqrt();
            if d + spec.highlight_radius < spec.pupil_radius {
                break (hx, hy);
            }
        };
        for y in 0..h {
            for x in 0..w {
                let d = ((x as f64 - hx).powi(2) + (y as f64 - hy).powi(2)).sqrt();
                if d < spec.highlight_radius {
                    pixels[y * w + x] = HIGHLIGHT_INTENSITY;
                }
            }
        }
    }

    if spec.noise_sigma > 0.0 {
        let normal = Normal::new(0.0, spec.noise_sigma)
            .map_err(|e| Error::EyeSpec(format!("bad noise sigma: {e}")))?;
        for p in &mut pixels {
            let v = *p as f64 + normal.sample(&mut rng);
            *p = v.round().clamp(0.0, 255.0) as u8;
        }
    }

    let truth = GroundTruth {
        center: spec.pupil_center,
        radius: spec.pupil_radius,
    };
    Ok((GrayImage::new(w, h, pixels)?, truth))
}
