//! The full segmentation pipeline: Gaussian smoothing, a gradient-threshold
//! edge branch, an intensity-threshold mask branch with a boundary-only
//! second Prewitt pass, pointwise AND of the two edge maps, and pupil
//! localization from the dark-region mask.

use crate::binarization::{
    binarize_exact, binarize_gray_exact, binarize_gray_truncated, binarize_truncated, BinaryImage,
    ThresholdParams,
};
use crate::bitlevel::{AdderConfig, CellKind};
use crate::filters::{
    gaussian_datapath, gaussian_reference, gradient_magnitude_approx, gradient_magnitude_exact,
    prewitt_gradients, GrayImage, DATAPATH_WIDTH,
};
use crate::metrics::{time_stage, StageTiming};
use crate::{Error, Result};

pub const MIN_IMAGE_SIZE: usize = 16;

/// Default approximate prefix length (LOA cells at the LSB end).
pub const DEFAULT_APPROX_PREFIX: usize = 5;
pub const DEFAULT_INTENSITY_THRESHOLD: u32 = 96;
pub const DEFAULT_INTENSITY_IGNORED_LSBS: usize = 5;
pub const DEFAULT_GRADIENT_THRESHOLD: u32 = 128;
pub const DEFAULT_GRADIENT_IGNORED_LSBS: usize = 7;

/// Stage labels in execution order; every run records exactly these.
pub const STAGES: [&str; 7] = [
    "gaussian",
    "prewitt1",
    "threshold_gradient",
    "binarize_intensity",
    "prewitt2",
    "combine",
    "localize",
];

#[derive(Clone, Copy, PartialEq, Eq, Debug, serde::Serialize)]
pub enum Variant {
    Exact,
    Approximate,
}

#[derive(Clone, Debug)]
pub struct PipelineConfig {
    pub variant: Variant,
    pub gaussian_cfg: AdderConfig,
    pub prewitt_cfg: AdderConfig,
    pub intensity_threshold: ThresholdParams,
    pub gradient_threshold: ThresholdParams,
}

impl PipelineConfig {
    /// Reference configuration: exact adders, strict comparisons, Euclidean
    /// gradient magnitude.
    pub fn exact() -> Self {
        Self {
            variant: Variant::Exact,
            gaussian_cfg: AdderConfig::all_exact(DATAPATH_WIDTH),
            prewitt_cfg: AdderConfig::all_exact(DATAPATH_WIDTH),
            intensity_threshold: ThresholdParams::new(DEFAULT_INTENSITY_THRESHOLD, 0, 8)
                .expect("valid default"),
            gradient_threshold: ThresholdParams::new(DEFAULT_GRADIENT_THRESHOLD, 0, DATAPATH_WIDTH)
                .expect("valid default"),
        }
    }

    /// Hardware operating point: 5 LOA cells at the LSB end of both filter
    /// adders, truncated comparators dropping 5 (intensity) and 7 (gradient)
    /// LSBs, |Gx| + |Gy| magnitude.
    pub fn approximate() -> Self {
        Self {
            variant: Variant::Approximate,
            gaussian_cfg: AdderConfig::with_prefix(
                DATAPATH_WIDTH,
                CellKind::ApproxLOA,
                DEFAULT_APPROX_PREFIX,
            )
            .expect("valid default"),
            prewitt_cfg: AdderConfig::with_prefix(
                DATAPATH_WIDTH,
                CellKind::ApproxLOA,
                DEFAULT_APPROX_PREFIX,
            )
            .expect("valid default"),
            intensity_threshold: ThresholdParams::new(
                DEFAULT_INTENSITY_THRESHOLD,
                DEFAULT_INTENSITY_IGNORED_LSBS,
                8,
            )
            .expect("valid default"),
            gradient_threshold: ThresholdParams::new(
                DEFAULT_GRADIENT_THRESHOLD,
                DEFAULT_GRADIENT_IGNORED_LSBS,
                DATAPATH_WIDTH,
            )
            .expect("valid default"),
        }
    }

    /// Stable textual hash of the full configuration (FNV-1a over a
    /// canonical rendering), echoed into reports.
    pub fn fingerprint(&self) -> String {
        let repr = format!(
            "{:?}|{:?}|{:?}|{:?}|{:?}",
            self.variant,
            self.gaussian_cfg,
            self.prewitt_cfg,
            self.intensity_threshold,
            self.gradient_threshold
        );
        let mut hash = 0xcbf29ce484222325u64;
        for b in repr.bytes() {
            hash ^= b as u64;
            hash = hash.wrapping_mul(0x100000001b3);
        }
        format!("{hash:016x}")
    }
}

/// Everything a pipeline run produces, including intermediate rasters so
/// variants can be compared at every stage boundary.
#[derive(Clone, Debug)]
pub struct PupilResult {
    pub smoothed: GrayImage,
    /// Edge branch: thresholded gradient magnitude of the smoothed image.
    pub edge_branch: BinaryImage,
    /// Mask branch: boundary of the binarized dark region.
    pub boundary_branch: BinaryImage,
    /// Pointwise AND of the two branches.
    pub edge_map: BinaryImage,
    /// Dark region (intensity at or below the threshold) as 1s.
    pub pupil_mask: BinaryImage,
    pub center: (f64, f64),
    pub radius: f64,
    pub stage_timings: Vec<StageTiming>,
}

/// Pointwise logical AND of two edge maps.
pub fn combine_edge_maps(e1: &BinaryImage, e2: &BinaryImage) -> Result<BinaryImage> {
    if e1.width() != e2.width() || e1.height() != e2.height() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} vs {}x{}",
            e1.width(),
            e1.height(),
            e2.width(),
            e2.height()
        )));
    }
    let bits = e1
        .bits()
        .iter()
        .zip(e2.bits())
        .map(|(&a, &b)| a & b)
        .collect();
    BinaryImage::new(e1.width(), e1.height(), bits)
}

/// Centroid and equivalent-disk radius of the largest 4-connected component.
pub fn localize_pupil(mask: &BinaryImage) -> Result<((f64, f64), f64)> {
    let (w, h) = (mask.width(), mask.height());
    let mut visited = vec![false; w * h];
    let mut best: Option<(usize, f64, f64)> = None; // (area, sum_x, sum_y)
    let mut queue = Vec::new();
    for start in 0..w * h {
        if mask.bits()[start] == 0 || visited[start] {
            continue;
        }
        let mut area = 0usize;
        let (mut sum_x, mut sum_y) = (0f64, 0f64);
        visited[start] = true;
        queue.push(start);
        while let Some(idx) = queue.pop() {
            area += 1;
            let (x, y) = (idx % w, idx / w);
            sum_x += x as f64;
            sum_y += y as f64;
            let mut push = |nx: usize, ny: usize| {
                let nidx = ny * w + nx;
                if mask.bits()[nidx] == 1 && !visited[nidx] {
                    visited[nidx] = true;
                    queue.push(nidx);
                }
            };
            if x > 0 {
                push(x - 1, y);
            }
            if x + 1 < w {
                push(x + 1, y);
            }
            if y > 0 {
                push(x, y - 1);
            }
            if y + 1 < h {
                push(x, y + 1);
            }
        }
        if best.is_none_or(|(a, _, _)| area > a) {
            best = Some((area, sum_x, sum_y));
        }
    }
    let (area, sum_x, sum_y) =
        best.ok_or_else(|| Error::NoPupil("mask has no foreground pixels".into()))?;
    let center = (sum_x / area as f64, sum_y / area as f64);
    let radius = (area as f64 / std::f64::consts::PI).sqrt();
    Ok((center, radius))
}

/// Runs the complete pipeline on one image.
pub fn run_pipeline(img: &GrayImage, cfg: &PipelineConfig) -> Result<PupilResult> {
    if img.width() < MIN_IMAGE_SIZE || img.height() < MIN_IMAGE_SIZE {
        return Err(Error::ImageTooSmall {
            width: img.width(),
            height: img.height(),
            min: MIN_IMAGE_SIZE,
        });
    }
    let approx = cfg.variant == Variant::Approximate;
    let mut timings = Vec::new();

    let smoothed = time_stage(STAGES[0], &mut timings, || {
        if approx {
            gaussian_datapath(img, &cfg.gaussian_cfg)
        } else {
            gaussian_reference(img)
        }
    })?;

    // Edge branch: Prewitt on the smoothed image, magnitude thresholded.
    let magnitude = time_stage(STAGES[1], &mut timings, || -> Result<_> {
        let gf = prewitt_gradients(&smoothed, &cfg.prewitt_cfg)?;
        if approx {
            gradient_magnitude_approx(&gf, &cfg.prewitt_cfg)
        } else {
            Ok(gradient_magnitude_exact(&gf))
        }
    })?;
    let edge_branch = time_stage(STAGES[2], &mut timings, || {
        let m = &magnitude.magnitude;
        if approx {
            binarize_truncated(m, magnitude.width, magnitude.height, &cfg.gradient_threshold)
        } else {
            binarize_exact(m, magnitude.width, magnitude.height, &cfg.gradient_threshold)
        }
    })?;

    // Mask branch: dark region below the intensity threshold, boundary
    // extracted by a second Prewitt pass. The pass input is already binary,
    // so no further binarization is applied: any nonzero magnitude is
    // boundary. Exact adder cells are used here in both variants; LOA
    // subtraction is biased on equal operands, which on a constant mask
    // region would flag every pixel as boundary.
    let pupil_mask = time_stage(STAGES[3], &mut timings, || {
        let bright = if approx {
            binarize_gray_truncated(&smoothed, &cfg.intensity_threshold)
        } else {
            binarize_gray_exact(&smoothed, &cfg.intensity_threshold)
        };
        bright.map(|b| b.complement())
    })?;
    let boundary_branch = time_stage(STAGES[4], &mut timings, || -> Result<_> {
        let scaled = pupil_mask.to_gray();
        let exact_cfg = AdderConfig::all_exact(cfg.prewitt_cfg.width());
        let gf = prewitt_gradients(&scaled, &exact_cfg)?;
        let gf = if approx {
            gradient_magnitude_approx(&gf, &exact_cfg)?
        } else {
            gradient_magnitude_exact(&gf)
        };
        let bits = gf.magnitude.iter().map(|&m| (m > 0) as u8).collect();
        BinaryImage::new(gf.width, gf.height, bits)
    })?;

    let edge_map = time_stage(STAGES[5], &mut timings, || {
        combine_edge_maps(&edge_branch, &boundary_branch)
    })?;

    if pupil_mask.count_ones() == 0 {
        return Err(Error::NoPupil("dark-region mask is empty".into()));
    }
    if edge_map.count_ones() == 0 {
        return Err(Error::NoPupil("combined edge map is empty".into()));
    }

    let (center, radius) = time_stage(STAGES[6], &mut timings, || localize_pupil(&pupil_mask))?;

    Ok(PupilResult {
        smoothed,
        edge_branch,
        boundary_branch,
        edge_map,
        pupil_mask,
        center,
        radius,
        stage_timings: timings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{generate_eye, EyeSpec};

    #[test]
    fn combine_is_intersection() {
        let e1 = BinaryImage::new(2, 2, vec![1, 1, 0, 0]).unwrap();
        let e2 = BinaryImage::new(2, 2, vec![1, 0, 1, 0]).unwrap();
        let c = combine_edge_maps(&e1, &e2).unwrap();
        assert_eq!(c.bits(), &[1, 0, 0, 0]);
        assert_eq!(combine_edge_maps(&e1, &e1).unwrap(), e1);
        let zero = BinaryImage::new(2, 2, vec![0; 4]).unwrap();
        assert_eq!(combine_edge_maps(&e1, &zero).unwrap(), zero);
    }

    #[test]
    fn combine_rejects_mismatched_dims() {
        let e1 = BinaryImage::new(2, 2, vec![0; 4]).unwrap();
        let e2 = BinaryImage::new(3, 2, vec![0; 6]).unwrap();
        assert!(combine_edge_maps(&e1, &e2).is_err());
    }

    #[test]
    fn localize_single_pixel() {
        let mut bits = vec![0u8; 100];
        bits[7 * 10 + 5] = 1;
        let mask = BinaryImage::new(10, 10, bits).unwrap();
        let ((cx, cy), r) = localize_pupil(&mask).unwrap();
        assert_eq!((cx, cy), (5.0, 7.0));
        assert!((r - (1.0 / std::f64::consts::PI).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn localize_picks_largest_component() {
        let mut bits = vec![0u8; 400];
        // 10x10 block at (2,2), 3x3 block at (15,15).
        for y in 2..12 {
            for x in 2..12 {
                bits[y * 20 + x] = 1;
            }
        }
        for y in 15..18 {
            for x in 15..18 {
                bits[y * 20 + x] = 1;
            }
        }
        let mask = BinaryImage::new(20, 20, bits).unwrap();
        let ((cx, cy), _) = localize_pupil(&mask).unwrap();
        assert!((cx - 6.5).abs() < 1e-12 && (cy - 6.5).abs() < 1e-12);
    }

    #[test]
    fn localize_disk_recovers_geometry() {
        let mut bits = vec![0u8; 64 * 64];
        for y in 0..64 {
            for x in 0..64 {
                let d2 = (x as f64 - 32.0).powi(2) + (y as f64 - 32.0).powi(2);
                if d2 < 100.0 {
                    bits[y * 64 + x] = 1;
                }
            }
        }
        let mask = BinaryImage::new(64, 64, bits).unwrap();
        let ((cx, cy), r) = localize_pupil(&mask).unwrap();
        assert!((cx - 32.0).abs() <= 0.5 && (cy - 32.0).abs() <= 0.5);
        assert!((r - 10.0).abs() <= 0.5);
    }

    #[test]
    fn localize_empty_mask_is_no_pupil() {
        let mask = BinaryImage::new(4, 4, vec![0; 16]).unwrap();
        assert!(matches!(localize_pupil(&mask), Err(Error::NoPupil(_))));
    }

    #[test]
    fn uniform_image_yields_no_pupil() {
        let img = GrayImage::constant(32, 32, 50);
        assert!(matches!(
            run_pipeline(&img, &PipelineConfig::exact()),
            Err(Error::NoPupil(_))
        ));
    }

    #[test]
    fn small_image_rejected() {
        let img = GrayImage::constant(8, 8, 50);
        assert!(matches!(
            run_pipeline(&img, &PipelineConfig::exact()),
            Err(Error::ImageTooSmall { .. })
        ));
    }

    #[test]
    fn synthetic_eye_exact_variant() {
        let spec = EyeSpec::centered(64, 14.0, 22.0, 42);
        let (img, truth) = generate_eye(&spec).unwrap();
        let res = run_pipeline(&img, &PipelineConfig::exact()).unwrap();
        // Edge map is a subset of both branches.
        for i in 0..res.edge_map.bits().len() {
            assert!(res.edge_map.bits()[i] <= res.edge_branch.bits()[i]);
            assert!(res.edge_map.bits()[i] <= res.boundary_branch.bits()[i]);
        }
        // Edge pixels sit on the pupil boundary, not on the iris/sclera ring.
        for y in 0..64usize {
            for x in 0..64usize {
                if res.edge_map.get(x, y) == 1 {
                    let d = ((x as f64 - truth.center.0).powi(2)
                        + (y as f64 - truth.center.1).powi(2))
                    .sqrt();
                    assert!(
                        (d - truth.radius).abs() <= 2.5,
                        "edge pixel ({x},{y}) at distance {d}, pupil radius {}",
                        truth.radius
                    );
                }
            }
        }
        assert!((res.center.0 - truth.center.0).abs() <= 2.0);
        assert!((res.center.1 - truth.center.1).abs() <= 2.0);
        assert!((res.radius - truth.radius).abs() / truth.radius <= 0.1);
    }

    #[test]
    fn approximate_variant_close_to_exact() {
        let spec = EyeSpec::centered(64, 12.0, 20.0, 7);
        let (img, _) = generate_eye(&spec).unwrap();
        let exact = run_pipeline(&img, &PipelineConfig::exact()).unwrap();
        let approx = run_pipeline(&img, &PipelineConfig::approximate()).unwrap();
        let p = crate::metrics::psnr(&exact.edge_map.to_gray(), &approx.edge_map.to_gray()).unwrap();
        assert!(p > 20.0, "edge-map PSNR {p}");
        assert!((exact.center.0 - approx.center.0).abs() <= 2.0);
        assert!((exact.center.1 - approx.center.1).abs() <= 2.0);
    }

    #[test]
    fn pipeline_is_deterministic() {
        let spec = EyeSpec::centered(64, 12.0, 20.0, 11);
        let (img, _) = generate_eye(&spec).unwrap();
        let a = run_pipeline(&img, &PipelineConfig::approximate()).unwrap();
        let b = run_pipeline(&img, &PipelineConfig::approximate()).unwrap();
        assert_eq!(a.edge_map, b.edge_map);
        assert_eq!(a.pupil_mask, b.pupil_mask);
        assert_eq!(a.center, b.center);
        assert_eq!(a.radius, b.radius);
    }

    #[test]
    fn stage_timings_cover_every_stage() {
        let spec = EyeSpec::centered(64, 12.0, 20.0, 3);
        let (img, _) = generate_eye(&spec).unwrap();
        let res = run_pipeline(&img, &PipelineConfig::exact()).unwrap();
        let labels: Vec<&str> = res.stage_timings.iter().map(|t| t.stage.as_str()).collect();
        assert_eq!(labels, STAGES);
    }

    #[test]
    fn fingerprint_distinguishes_variants() {
        assert_ne!(
            PipelineConfig::exact().fingerprint(),
            PipelineConfig::approximate().fingerprint()
        );
        assert_eq!(
            PipelineConfig::exact().fingerprint(),
            PipelineConfig::exact().fingerprint()
        );
    }
}
